"""Bounded k-hop traversal of the transaction DAG.

A trace starts at one transaction and walks spend edges up to k hops in the
requested direction. Forward follows value being spent onward (this tx's
outputs feeding later txs), backward follows where inputs came from. Hop
numbers are minimum BFS distance from the origin. The returned edge set is
the induced subgraph: every stored edge whose endpoints are both in the node
set, including edges between two frontier nodes that BFS itself never walked.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidParams
from .model import TxEdge
from .store import LedgerStore, StoreSnapshot


class Direction(Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    BOTH = "both"


@dataclass(frozen=True, slots=True)
class TraceNode:
    tx_id: str
    hop: int
    timestamp: int
    contract: str | None


@dataclass(frozen=True, slots=True)
class TraceSubgraph:
    origin: str
    direction: Direction
    k: int
    nodes: tuple[TraceNode, ...]
    edges: tuple[TxEdge, ...]
    truncated: bool


def _neighbors(
    store: LedgerStore, tx_id: str, direction: Direction, snap: StoreSnapshot | None
) -> list[str]:
    out, inc = store.edges_by_tx(tx_id, snap)
    found: list[str] = []
    if direction in (Direction.FORWARD, Direction.BOTH):
        found.extend(e.target_tx for e in out)
    if direction in (Direction.BACKWARD, Direction.BOTH):
        found.extend(e.source_tx for e in inc)
    return found


def trace(
    store: LedgerStore,
    origin_tx: str,
    k: int,
    direction: Direction = Direction.FORWARD,
    snap: StoreSnapshot | None = None,
) -> TraceSubgraph:
    """BFS from origin_tx, at most k hops, in the given direction.

    Raises InvalidParams for negative k and NotFound for an unknown origin.
    k=0 yields just the origin node. ``truncated`` reports whether any hop-k
    node still has an unexplored neighbor in the walked direction.
    """
    if not isinstance(k, int) or isinstance(k, bool) or k < 0:
        raise InvalidParams(f"hop count must be a non-negative integer, got {k!r}")
    store.tx_by_id(origin_tx, snap)  # raises NotFound for unknown origin

    hops: dict[str, int] = {origin_tx: 0}
    queue: deque[str] = deque([origin_tx])
    while queue:
        current = queue.popleft()
        depth = hops[current]
        if depth == k:
            continue
        for neighbor in _neighbors(store, current, direction, snap):
            if neighbor not in hops:
                hops[neighbor] = depth + 1
                queue.append(neighbor)

    truncated = False
    if k >= 0:
        for tx_id, depth in hops.items():
            if depth != k:
                continue
            if any(n not in hops for n in _neighbors(store, tx_id, direction, snap)):
                truncated = True
                break

    edges: list[TxEdge] = []
    for tx_id in hops:
        out, _inc = store.edges_by_tx(tx_id, snap)
        # Outgoing side only: each induced edge is collected exactly once,
        # at its source, regardless of trace direction.
        edges.extend(e for e in out if e.target_tx in hops)

    nodes = []
    for tx_id, depth in sorted(hops.items(), key=lambda kv: (kv[1], kv[0])):
        stored = store.tx_by_id(tx_id, snap)
        nodes.append(TraceNode(tx_id, depth, stored.tx.timestamp, stored.tx.contract))
    edges.sort(key=lambda e: (e.source_tx, e.output_index, e.target_tx, e.input_index))
    return TraceSubgraph(origin_tx, direction, k, tuple(nodes), tuple(edges), truncated)
