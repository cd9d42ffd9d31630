"""Persistent, indexed cache of parsed and aggregated ledger data.

Two interchangeable backends behind one class: pure in-memory, and in-memory
indexes backed by a single-file append-only journal (``path`` given). The
journal starts with a magic/version header line; incompatible files are
refused. Reopening a journal replays every committed batch through the normal
ingest path, so indexes and aggregates are rebuilt exactly.

Concurrency: single writer, many readers. A commit mutates the indexes under
the store lock and then publishes a new snapshot id; every read filters by the
snapshot id it targets, so a reader never observes a partially committed
batch.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from .aggregate import (
    DanglingInput,
    DoubleSpend,
    Interaction,
    ResolvedOutput,
    compute_fee,
    derive_interactions,
    link_inputs,
)
from .errors import DuplicateTxId, NotFound, StoreVersionError, TipConflict
from .model import ParsedBlock, ParsedTransaction, TxEdge, TxModel
from .parser import block_to_record, parse_block

MAGIC_KEY = "ledgerlens_store"
FORMAT_VERSION = 1


@dataclass(frozen=True, slots=True)
class ChannelTip:
    channel: str
    height: int
    hash: str


@dataclass(frozen=True, slots=True)
class Counts:
    blocks: int = 0
    txs: int = 0
    edges: int = 0
    interactions: int = 0

    def to_dict(self) -> dict:
        return {
            "blocks": self.blocks,
            "txs": self.txs,
            "edges": self.edges,
            "interactions": self.interactions,
        }


@dataclass(frozen=True, slots=True)
class StoreSnapshot:
    """Immutable view marker: reads against it see exactly its commit state."""

    snapshot_id: int
    tips: tuple[ChannelTip, ...]
    counts: Counts


@dataclass(frozen=True, slots=True)
class StoredTx:
    tx: ParsedTransaction
    fee: int | None
    seq: int


@dataclass(frozen=True, slots=True)
class StoredBlock:
    block: ParsedBlock
    seq: int


class _Staging:
    """Uncommitted overlay for one ingest batch; discarded wholesale on error."""

    def __init__(self, store: "LedgerStore"):
        self.store = store
        self.blocks: list[ParsedBlock] = []
        self.block_hashes: dict[str, tuple[str, int]] = {}
        self.txs: dict[str, tuple[ParsedTransaction, int | None]] = {}
        self.tx_order: list[str] = []
        self.edges: list[TxEdge] = []
        self.spent: dict[tuple[str, int], str] = {}
        self.dangling: list[DanglingInput] = []
        self.double_spends: list[DoubleSpend] = []
        self.interactions: list[Interaction] = []
        self.tips: dict[str, tuple[int, str, int]] = {}

    def tip(self, channel: str) -> tuple[int, str, int] | None:
        return self.tips.get(channel) or self.store._tips.get(channel)

    def resolver(self, channel: str) -> Callable[[str, int], ResolvedOutput | None]:
        def resolve(source_tx: str, output_index: int) -> ResolvedOutput | None:
            entry = self.txs.get(source_tx)
            if entry is not None:
                tx = entry[0]
            else:
                stored = self.store._txs.get(source_tx)
                if stored is None:
                    return None
                tx = stored.tx
            # Channels are separated ledgers: cross-channel refs stay dangling.
            if tx.channel != channel or output_index >= len(tx.outputs):
                return None
            out = tx.outputs[output_index]
            key = (source_tx, output_index)
            spent = key in self.spent or key in self.store._spent
            return ResolvedOutput(out.address, out.value, spent)

        return resolve


class LedgerStore:
    """Ingests ParsedBlocks and serves indexed lookups over committed snapshots."""

    def __init__(self, path: str | Path | None = None):
        self._lock = threading.RLock()
        self._snapshot_id = 0
        self._blocks: dict[tuple[str, int], StoredBlock] = {}
        self._block_hashes: dict[str, tuple[str, int]] = {}
        self._txs: dict[str, StoredTx] = {}
        self._tx_order: list[str] = []
        self._addr_txs: dict[str, list[str]] = {}
        self._addresses: dict[str, int] = {}
        self._edges_out: dict[str, list[tuple[int, TxEdge]]] = {}
        self._edges_in: dict[str, list[tuple[int, TxEdge]]] = {}
        self._spent: dict[tuple[str, int], str] = {}
        self._edge_count = 0
        self._interactions: list[tuple[int, Interaction]] = []
        self._dangling: list[tuple[int, DanglingInput]] = []
        self._double_spends: list[tuple[int, DoubleSpend]] = []
        self._tips: dict[str, tuple[int, str, int]] = {}
        self._aux_replayed: list[tuple[str, dict]] = []
        self._journal = None
        self._path = Path(path) if path is not None else None
        if self._path is not None:
            self._open_journal()

    # ---------------------------------------------------------------- journal

    def _open_journal(self) -> None:
        assert self._path is not None
        if self._path.exists() and self._path.stat().st_size > 0:
            with self._path.open("r", encoding="utf-8") as fh:
                header_line = fh.readline()
                try:
                    header = json.loads(header_line)
                except json.JSONDecodeError:
                    raise StoreVersionError(f"{self._path} is not a ledgerlens store file") from None
                if not isinstance(header, dict) or MAGIC_KEY not in header:
                    raise StoreVersionError(f"{self._path} is not a ledgerlens store file")
                if header[MAGIC_KEY] != FORMAT_VERSION:
                    raise StoreVersionError(
                        f"store format version {header[MAGIC_KEY]} is not supported "
                        f"(expected {FORMAT_VERSION})"
                    )
                for line in fh:
                    if not line.strip():
                        continue
                    record = json.loads(line)
                    kind = record.get("kind")
                    if kind == "blocks":
                        # within one batch later blocks chain onto earlier
                        # ones, which are not in self._tips yet
                        blocks = []
                        batch_tips: dict[str, object] = {}
                        for raw in record["records"]:
                            channel = raw.get("channel")
                            prev = batch_tips.get(channel, self._tips.get(channel))
                            block = parse_block(raw, prev)
                            batch_tips[channel] = block
                            blocks.append(block)
                        self._ingest_locked(blocks, journal=False)
                    elif kind == "aux":
                        self._aux_replayed.append((record["tag"], record["data"]))
        else:
            with self._path.open("w", encoding="utf-8") as fh:
                fh.write(json.dumps({MAGIC_KEY: FORMAT_VERSION}) + "\n")
        self._journal = self._path.open("a", encoding="utf-8")

    def _journal_write(self, record: dict) -> None:
        if self._journal is None:
            return
        self._journal.write(json.dumps(record, separators=(",", ":"), ensure_ascii=False) + "\n")
        self._journal.flush()
        os.fsync(self._journal.fileno())

    def append_aux(self, tag: str, data: dict) -> None:
        """Journal a non-ledger event (labels, cluster rules) for replay on reopen."""
        with self._lock:
            self._journal_write({"kind": "aux", "tag": tag, "data": data})

    def aux_records(self) -> list[tuple[str, dict]]:
        """Aux events replayed from the journal at open, in file order."""
        return list(self._aux_replayed)

    def close(self) -> None:
        with self._lock:
            if self._journal is not None:
                self._journal.close()
                self._journal = None

    def __enter__(self) -> "LedgerStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # ----------------------------------------------------------------- ingest

    def ingest(self, blocks: Iterable[ParsedBlock]) -> StoreSnapshot:
        """Atomically commit blocks plus their edges, interactions and indexes.

        Re-ingesting an already-stored block (same hash) is a no-op. Any
        conflict rolls back the whole batch.
        """
        with self._lock:
            return self._ingest_locked(list(blocks), journal=True)

    def _ingest_locked(self, blocks: list[ParsedBlock], journal: bool) -> StoreSnapshot:
        staging = _Staging(self)
        for block in blocks:
            known = self._block_hashes.get(block.hash) or staging.block_hashes.get(block.hash)
            if known is not None:
                if known != (block.channel, block.height):
                    raise TipConflict(
                        f"block hash {block.hash} already stored at {known}, "
                        f"got ({block.channel!r}, {block.height})"
                    )
                continue  # idempotent re-ingest
            tip = staging.tip(block.channel)
            if tip is None:
                if block.height != 0:
                    raise TipConflict(
                        f"channel {block.channel!r} has no tip; block height {block.height} "
                        "does not start a chain"
                    )
            else:
                tip_height, tip_hash, tip_ts = tip
                if block.height != tip_height + 1 or block.prev_hash != tip_hash:
                    raise TipConflict(
                        f"block {block.height} ({block.prev_hash[:8]}..) contradicts tip "
                        f"{tip_height} ({tip_hash[:8]}..) on {block.channel!r}"
                    )
                if block.timestamp < tip_ts:
                    raise TipConflict("block timestamp precedes channel tip")
            for tx in block.txs:
                if tx.id in self._txs or tx.id in staging.txs:
                    raise DuplicateTxId(f"tx id {tx.id} already stored")
            resolve = staging.resolver(block.channel)
            for tx in block.txs:
                edges: list[TxEdge] = []
                fee: int | None = None
                if tx.model is TxModel.UTXO:
                    link = link_inputs(tx, resolve)
                    edges = link.edges
                    staging.dangling.extend(link.dangling)
                    staging.double_spends.extend(link.double_spends)
                    for e in edges:
                        staging.spent[(e.source_tx, e.output_index)] = e.target_tx
                    fee = compute_fee(tx, edges)
                staging.edges.extend(edges)
                staging.interactions.extend(derive_interactions(tx, edges))
                staging.txs[tx.id] = (tx, fee)
                staging.tx_order.append(tx.id)
            staging.blocks.append(block)
            staging.block_hashes[block.hash] = (block.channel, block.height)
            staging.tips[block.channel] = (block.height, block.hash, block.timestamp)

        if not staging.blocks:
            return self.snapshot()

        seq = self._snapshot_id + 1
        for block in staging.blocks:
            self._blocks[(block.channel, block.height)] = StoredBlock(block, seq)
            self._block_hashes[block.hash] = (block.channel, block.height)
        for tx_id in staging.tx_order:
            tx, fee = staging.txs[tx_id]
            self._txs[tx_id] = StoredTx(tx, fee, seq)
            self._tx_order.append(tx_id)
            self._index_tx_addresses(tx, seq)
        for edge in staging.edges:
            self._edges_out.setdefault(edge.source_tx, []).append((seq, edge))
            self._edges_in.setdefault(edge.target_tx, []).append((seq, edge))
            self._spent[(edge.source_tx, edge.output_index)] = edge.target_tx
            self._index_address(edge.owner, edge.target_tx, seq)
        self._edge_count += len(staging.edges)
        self._interactions.extend((seq, i) for i in staging.interactions)
        self._dangling.extend((seq, d) for d in staging.dangling)
        self._double_spends.extend((seq, d) for d in staging.double_spends)
        self._tips.update(staging.tips)
        self._snapshot_id = seq
        if journal:
            self._journal_write(
                {"kind": "blocks", "records": [block_to_record(b) for b in staging.blocks]}
            )
        return self.snapshot()

    def _index_tx_addresses(self, tx: ParsedTransaction, seq: int) -> None:
        for out in tx.outputs:
            self._index_address(out.address, tx.id, seq)
        if tx.transfer is not None:
            self._index_address(tx.transfer.from_addr, tx.id, seq)
            self._index_address(tx.transfer.to_addr, tx.id, seq)
        for signer in tx.signers:
            self._index_address(signer, tx.id, seq)

    def _index_address(self, address: str, tx_id: str, seq: int) -> None:
        if address not in self._addresses:
            self._addresses[address] = seq
        bucket = self._addr_txs.setdefault(address, [])
        if not bucket or bucket[-1] != tx_id:
            bucket.append(tx_id)

    # ------------------------------------------------------------------ reads

    def snapshot(self) -> StoreSnapshot:
        with self._lock:
            tips = tuple(
                ChannelTip(ch, h, hsh)
                for ch, (h, hsh, _ts) in sorted(self._tips.items())
            )
            counts = Counts(
                blocks=len(self._blocks),
                txs=len(self._txs),
                edges=self._edge_count,
                interactions=len(self._interactions),
            )
            return StoreSnapshot(self._snapshot_id, tips, counts)

    def _seq_bound(self, snap: StoreSnapshot | None) -> int:
        return self._snapshot_id if snap is None else snap.snapshot_id

    def tip_anchor(self, channel: str) -> tuple[int, str, int] | None:
        """(height, hash, timestamp) of a channel's tip, for continuation parses."""
        with self._lock:
            return self._tips.get(channel)

    def block_location(self, block_hash: str) -> tuple[str, int] | None:
        """(channel, height) where a block hash is stored, if anywhere."""
        with self._lock:
            return self._block_hashes.get(block_hash)

    def tx_by_id(self, tx_id: str, snap: StoreSnapshot | None = None) -> StoredTx:
        with self._lock:
            stored = self._txs.get(tx_id)
            if stored is None or stored.seq > self._seq_bound(snap):
                raise NotFound(f"transaction {tx_id} not found")
            return stored

    def block_by_height(
        self, channel: str, height: int, snap: StoreSnapshot | None = None
    ) -> StoredBlock:
        with self._lock:
            stored = self._blocks.get((channel, height))
            if stored is None or stored.seq > self._seq_bound(snap):
                raise NotFound(f"block {height} on channel {channel!r} not found")
            return stored

    def txs_by_address(self, address: str, snap: StoreSnapshot | None = None) -> list[StoredTx]:
        """Txs where the address is signer, input owner, output address or
        transfer endpoint, ordered by (channel, height, tx_index)."""
        with self._lock:
            bound = self._seq_bound(snap)
            if self._addresses.get(address, bound + 1) > bound:
                raise NotFound(f"address {address!r} not found")
            seen: set[str] = set()
            result = []
            for tx_id in self._addr_txs.get(address, ()):
                if tx_id in seen:
                    continue
                seen.add(tx_id)
                stored = self._txs[tx_id]
                if stored.seq <= bound:
                    result.append(stored)
            result.sort(key=lambda s: (s.tx.channel, s.tx.block_height, s.tx.tx_index))
            return result

    def edges_by_tx(
        self, tx_id: str, snap: StoreSnapshot | None = None
    ) -> tuple[list[TxEdge], list[TxEdge]]:
        """(outgoing, incoming) edges; outgoing = this tx's outputs being spent."""
        with self._lock:
            bound = self._seq_bound(snap)
            stored = self._txs.get(tx_id)
            if stored is None or stored.seq > bound:
                raise NotFound(f"transaction {tx_id} not found")
            out = [e for s, e in self._edges_out.get(tx_id, ()) if s <= bound]
            inc = [e for s, e in self._edges_in.get(tx_id, ()) if s <= bound]
            return out, inc

    def interactions_by_window(
        self, start: int, end: int, snap: StoreSnapshot | None = None
    ) -> list[Interaction]:
        """Interactions with start <= timestamp < end, deterministically ordered."""
        with self._lock:
            bound = self._seq_bound(snap)
            found = [
                i
                for s, i in self._interactions
                if s <= bound and start <= i.timestamp < end
            ]
        found.sort(key=lambda i: (i.timestamp, i.tx, i.from_addr, i.to_addr, i.value))
        return found

    def all_txs(self, snap: StoreSnapshot | None = None) -> list[StoredTx]:
        with self._lock:
            bound = self._seq_bound(snap)
            return [
                self._txs[tx_id]
                for tx_id in self._tx_order
                if self._txs[tx_id].seq <= bound
            ]

    def known_addresses(self, snap: StoreSnapshot | None = None) -> list[str]:
        with self._lock:
            bound = self._seq_bound(snap)
            return sorted(a for a, s in self._addresses.items() if s <= bound)

    def has_address(self, address: str, snap: StoreSnapshot | None = None) -> bool:
        with self._lock:
            seq = self._addresses.get(address)
            return seq is not None and seq <= self._seq_bound(snap)

    def dangling_inputs(self, snap: StoreSnapshot | None = None) -> list[DanglingInput]:
        with self._lock:
            bound = self._seq_bound(snap)
            return [d for s, d in self._dangling if s <= bound]

    def double_spends(self, snap: StoreSnapshot | None = None) -> list[DoubleSpend]:
        with self._lock:
            bound = self._seq_bound(snap)
            return [d for s, d in self._double_spends if s <= bound]

    def channels(self, snap: StoreSnapshot | None = None) -> list[str]:
        with self._lock:
            bound = self._seq_bound(snap)
            return sorted({b.block.channel for b in self._blocks.values() if b.seq <= bound})
