"""Windowed interaction graphs and bucketed activity series.

The account graph collapses the interactions of a time window onto nodes that
are either plain addresses or clusters from a chosen clustering version. At
entity granularity, interactions that stay inside one cluster are folded into
that node's metrics instead of drawn as self-loop edges, so switching
granularity conserves total value: entity edge total plus intra-cluster total
equals the address-level edge total for the same window.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .clustering import ClusterView
from .errors import EmptyWindow, UnknownClusteringVersion
from .store import LedgerStore, StoreSnapshot

SECONDS_PER_HOUR = 3600
SECONDS_PER_DAY = 86400


class Granularity(Enum):
    ADDRESS = "address"
    ENTITY = "entity"


@dataclass(frozen=True, slots=True)
class NodeMetrics:
    tx_count: int
    total_in_value: int
    total_out_value: int
    member_count: int
    intra_value: int


@dataclass(frozen=True, slots=True)
class GraphNode:
    id: str
    label: str | None
    metrics: NodeMetrics


@dataclass(frozen=True, slots=True)
class GraphEdge:
    from_id: str
    to_id: str
    count: int
    total_value: int


@dataclass(frozen=True, slots=True)
class AccountGraph:
    start: int
    end: int
    granularity: Granularity
    clustering_version: int | None
    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]


class _NodeAcc:
    __slots__ = ("in_value", "out_value", "txs", "intra")

    def __init__(self):
        self.in_value = 0
        self.out_value = 0
        self.txs: set[str] = set()
        self.intra = 0


def account_graph(
    store: LedgerStore,
    start: int,
    end: int,
    granularity: Granularity,
    view: ClusterView | None = None,
    snap: StoreSnapshot | None = None,
    label_of: Callable[[str], str | None] | None = None,
) -> AccountGraph:
    """Aggregate the window's interactions into a directed value-flow graph.

    ``view`` is required at entity granularity; addresses the view has never
    seen stay singleton entities under their own id.
    """
    if end <= start:
        raise EmptyWindow(f"window [{start}, {end}) is empty")
    if granularity is Granularity.ENTITY and view is None:
        raise UnknownClusteringVersion("entity granularity requires a clustering")

    entity = granularity is Granularity.ENTITY
    nodes: dict[str, _NodeAcc] = {}
    edges: dict[tuple[str, str], list[int]] = {}

    def node(node_id: str) -> _NodeAcc:
        acc = nodes.get(node_id)
        if acc is None:
            acc = nodes[node_id] = _NodeAcc()
        return acc

    for item in store.interactions_by_window(start, end, snap):
        src = view.cluster_of(item.from_addr) if entity else item.from_addr
        dst = view.cluster_of(item.to_addr) if entity else item.to_addr
        src_acc = node(src)
        dst_acc = node(dst)
        src_acc.txs.add(item.tx)
        dst_acc.txs.add(item.tx)
        if entity and src == dst:
            src_acc.intra += item.value
            src_acc.in_value += item.value
            src_acc.out_value += item.value
            continue
        src_acc.out_value += item.value
        dst_acc.in_value += item.value
        pair = edges.setdefault((src, dst), [0, 0])
        pair[0] += 1
        pair[1] += item.value

    def member_count(node_id: str) -> int:
        if not entity:
            return 1
        members = view.members_by_id.get(node_id)
        return len(members) if members is not None else 1

    graph_nodes = tuple(
        GraphNode(
            id=node_id,
            label=label_of(node_id) if label_of is not None else None,
            metrics=NodeMetrics(
                tx_count=len(acc.txs),
                total_in_value=acc.in_value,
                total_out_value=acc.out_value,
                member_count=member_count(node_id),
                intra_value=acc.intra,
            ),
        )
        for node_id, acc in sorted(nodes.items())
    )
    graph_edges = tuple(
        GraphEdge(src, dst, count, value)
        for (src, dst), (count, value) in sorted(edges.items())
    )
    return AccountGraph(
        start=start,
        end=end,
        granularity=granularity,
        clustering_version=view.version if entity else None,
        nodes=graph_nodes,
        edges=graph_edges,
    )


class BucketWidth(Enum):
    DAY = "day"
    HOUR = "hour"


class GroupBy(Enum):
    NONE = "none"
    CHANNEL = "channel"
    CONTRACT = "contract"


@dataclass(frozen=True, slots=True)
class StatsPoint:
    start: int
    tx_count: int


@dataclass(frozen=True, slots=True)
class StatsSeries:
    key: str
    points: tuple[StatsPoint, ...]


@dataclass(frozen=True, slots=True)
class StatsResult:
    start: int
    end: int
    bucket: BucketWidth
    group_by: GroupBy
    series: tuple[StatsSeries, ...]


def stats(
    store: LedgerStore,
    start: int,
    end: int,
    bucket: BucketWidth,
    group_by: GroupBy = GroupBy.NONE,
    snap: StoreSnapshot | None = None,
) -> StatsResult:
    """Per-bucket transaction counts over [start, end).

    Buckets are aligned to UTC hour or day boundaries and zero-filled across
    the whole window. Ungrouped output always contains exactly one series
    (key ""); grouped output lists one series per group that has at least one
    transaction in the window, so group totals stay additive.
    """
    if end <= start:
        raise EmptyWindow(f"window [{start}, {end}) is empty")
    width = SECONDS_PER_DAY if bucket is BucketWidth.DAY else SECONDS_PER_HOUR
    first = (start // width) * width
    bucket_starts = range(first, end, width)

    counts: dict[str, dict[int, int]] = {}
    for stored in store.all_txs(snap):
        ts = stored.tx.timestamp
        if not (start <= ts < end):
            continue
        if group_by is GroupBy.CHANNEL:
            key = stored.tx.channel
        elif group_by is GroupBy.CONTRACT:
            key = stored.tx.contract or ""
        else:
            key = ""
        per_key = counts.setdefault(key, {})
        aligned = (ts // width) * width
        per_key[aligned] = per_key.get(aligned, 0) + 1

    keys = [""] if group_by is GroupBy.NONE else sorted(counts)
    series = tuple(
        StatsSeries(
            key,
            tuple(
                StatsPoint(s, counts.get(key, {}).get(s, 0)) for s in bucket_starts
            ),
        )
        for key in keys
    )
    return StatsResult(start, end, bucket, group_by, series)
