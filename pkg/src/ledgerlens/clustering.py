"""Address clustering: co-spend heuristic plus analyst overrides.

Addresses that jointly own the inputs of one transaction are assumed to be
controlled by the same entity, and that relation is closed transitively.
Analysts adjust the result with explicit rules: Merge forces a set of
addresses into one entity, Isolate pins an address into its own singleton no
matter what, and the built-in heuristic can be switched off entirely. Rule
sets are unordered; Isolate wins over Merge and the heuristic for its
address, and the heuristic stays off if any toggle disables it.

Every rebuild produces a new immutable numbered version. Queries name a
version (or take the latest), so concurrent readers keep a stable entity view
while a rebuild runs.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import InvalidRule, NotFound, UnknownClusteringVersion
from .model import TxModel, validate_address
from .store import LedgerStore, StoreSnapshot

MULTI_INPUT = "multi-input"


class RuleKind(Enum):
    MERGE = "merge"
    ISOLATE = "isolate"
    HEURISTIC = "heuristic"


@dataclass(frozen=True, slots=True)
class ClusterRule:
    kind: RuleKind
    addresses: tuple[str, ...] = ()
    heuristic: str | None = None
    enabled: bool | None = None

    def __post_init__(self):
        if self.kind is RuleKind.MERGE:
            if len(set(self.addresses)) < 2:
                raise InvalidRule("merge rule needs at least two distinct addresses")
            for addr in self.addresses:
                validate_address(addr)
            if self.heuristic is not None or self.enabled is not None:
                raise InvalidRule("merge rule takes addresses only")
        elif self.kind is RuleKind.ISOLATE:
            if len(self.addresses) != 1:
                raise InvalidRule("isolate rule takes exactly one address")
            validate_address(self.addresses[0])
            if self.heuristic is not None or self.enabled is not None:
                raise InvalidRule("isolate rule takes an address only")
        else:
            if self.heuristic != MULTI_INPUT:
                raise InvalidRule(f"unknown heuristic {self.heuristic!r}")
            if not isinstance(self.enabled, bool):
                raise InvalidRule("heuristic toggle needs enabled: true|false")
            if self.addresses:
                raise InvalidRule("heuristic toggle takes no addresses")

    def to_dict(self) -> dict:
        if self.kind is RuleKind.MERGE:
            return {"kind": "merge", "addresses": list(self.addresses)}
        if self.kind is RuleKind.ISOLATE:
            return {"kind": "isolate", "address": self.addresses[0]}
        return {"kind": "heuristic", "name": self.heuristic, "enabled": self.enabled}

    @classmethod
    def from_dict(cls, record) -> "ClusterRule":
        if not isinstance(record, dict):
            raise InvalidRule(f"rule must be an object, got {type(record).__name__}")
        kind = record.get("kind")
        if kind == "merge":
            allowed = {"kind", "addresses"}
            addresses = record.get("addresses")
            if not isinstance(addresses, list) or not all(isinstance(a, str) for a in addresses):
                raise InvalidRule("merge rule needs an address list")
            rule = cls(RuleKind.MERGE, tuple(addresses))
        elif kind == "isolate":
            allowed = {"kind", "address"}
            address = record.get("address")
            if not isinstance(address, str):
                raise InvalidRule("isolate rule needs an address")
            rule = cls(RuleKind.ISOLATE, (address,))
        elif kind == "heuristic":
            allowed = {"kind", "name", "enabled"}
            rule = cls(
                RuleKind.HEURISTIC,
                heuristic=record.get("name"),
                enabled=record.get("enabled"),
            )
        else:
            raise InvalidRule(f"unknown rule kind {kind!r}")
        unknown = set(record) - allowed
        if unknown:
            raise InvalidRule(f"unknown rule fields: {sorted(unknown)}")
        return rule


class _UnionFind:
    def __init__(self):
        self._parent: dict[str, str] = {}
        self._size: dict[str, int] = {}

    def find(self, item: str) -> str:
        parent = self._parent
        if item not in parent:
            parent[item] = item
            self._size[item] = 1
            return item
        root = item
        while parent[root] != root:
            root = parent[root]
        while parent[item] != root:
            parent[item], item = root, parent[item]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size[rb]


def build_partition(
    groups: Iterable[Sequence[str]],
    rules: Iterable[ClusterRule],
    known: Iterable[str],
) -> dict[str, str]:
    """Map every known address to its cluster id (the lexicographically
    smallest member). Pure: output depends only on the inputs, never on the
    iteration order of ``groups`` or ``rules``.
    """
    known_set = set(known)
    rule_list = list(rules)
    for rule in rule_list:
        for addr in rule.addresses:
            if addr not in known_set:
                raise InvalidRule(f"rule references unknown address {addr!r}")
    isolated = {r.addresses[0] for r in rule_list if r.kind is RuleKind.ISOLATE}
    heuristic_on = all(
        r.enabled for r in rule_list if r.kind is RuleKind.HEURISTIC
    )

    uf = _UnionFind()
    for addr in known_set:
        uf.find(addr)
    if heuristic_on:
        for group in groups:
            live = [a for a in group if a not in isolated and a in known_set]
            for left, right in zip(live, live[1:]):
                uf.union(left, right)
    for rule in rule_list:
        if rule.kind is not RuleKind.MERGE:
            continue
        live = [a for a in rule.addresses if a not in isolated]
        for left, right in zip(live, live[1:]):
            uf.union(left, right)

    components: dict[str, list[str]] = {}
    for addr in known_set:
        components.setdefault(uf.find(addr), []).append(addr)
    partition: dict[str, str] = {}
    for members in components.values():
        cluster_id = min(members)
        for addr in members:
            partition[addr] = cluster_id
    return partition


def co_spend_groups(store: LedgerStore, snap: StoreSnapshot | None = None) -> list[tuple[str, ...]]:
    """Distinct input-owner sets of multi-owner spends. Account transfers and
    transactions with a single resolved owner contribute nothing."""
    groups: list[tuple[str, ...]] = []
    for stored in store.all_txs(snap):
        if stored.tx.model is not TxModel.UTXO or not stored.tx.inputs:
            continue
        _out, incoming = store.edges_by_tx(stored.tx.id, snap)
        owners = sorted({e.owner for e in incoming})
        if len(owners) >= 2:
            groups.append(tuple(owners))
    return groups


@dataclass(frozen=True, slots=True)
class ClusterView:
    """One immutable clustering version."""

    version: int
    snapshot_id: int
    rules: tuple[ClusterRule, ...]
    partition: dict[str, str]
    members_by_id: dict[str, tuple[str, ...]]

    def cluster_of(self, address: str) -> str:
        # Addresses ingested after this version was built stay singletons.
        return self.partition.get(address, address)

    def members(self, cluster_id: str) -> tuple[str, ...]:
        found = self.members_by_id.get(cluster_id)
        if found is None:
            raise NotFound(f"cluster {cluster_id!r} not found in version {self.version}")
        return found

    def cluster_ids(self) -> list[str]:
        return sorted(self.members_by_id)


class ClusteringService:
    """Holds the version history and runs rebuilds."""

    def __init__(self):
        self._lock = threading.Lock()
        self._versions: list[ClusterView] = []

    def rebuild(
        self,
        store: LedgerStore,
        rules: Iterable[ClusterRule],
        snap: StoreSnapshot | None = None,
    ) -> ClusterView:
        snap = snap or store.snapshot()
        rule_tuple = tuple(rules)
        partition = build_partition(
            co_spend_groups(store, snap), rule_tuple, store.known_addresses(snap)
        )
        members: dict[str, list[str]] = {}
        for addr, cluster_id in partition.items():
            members.setdefault(cluster_id, []).append(addr)
        members_by_id = {cid: tuple(sorted(addrs)) for cid, addrs in members.items()}
        with self._lock:
            view = ClusterView(
                version=len(self._versions) + 1,
                snapshot_id=snap.snapshot_id,
                rules=rule_tuple,
                partition=partition,
                members_by_id=members_by_id,
            )
            self._versions.append(view)
            return view

    def get(self, version: int | None = None) -> ClusterView:
        """Fetch one version; None means latest. Raises when absent."""
        with self._lock:
            if not self._versions:
                raise UnknownClusteringVersion("no clustering has been built")
            if version is None:
                return self._versions[-1]
            if not isinstance(version, int) or version < 1 or version > len(self._versions):
                raise UnknownClusteringVersion(f"clustering version {version!r} not found")
            return self._versions[version - 1]

    def latest_version(self) -> int:
        with self._lock:
            return len(self._versions)
