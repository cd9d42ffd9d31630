"""Synthetic ledger dumps with constructive ground truth.

Everything is driven by splitmix64 with fixed, documented constants, so a
given parameter set produces byte-identical dumps on any machine and any
Python build. The ground truth (spend edges, interaction totals, the cluster
partition, per-org grant counts) is recorded while the data is being built,
never by running the analytics afterwards, so it can serve as an independent
oracle for them.

The grants scenario models organizations exchanging access permissions on
per-sector channels: every transaction is one grant of value 1, and each
org's published-model count lands in the truth file for the UI to size nodes
by.
"""

from __future__ import annotations

import argparse
import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import InvalidParams
from .model import derive_tx_id, format_timestamp
from .parser import tx_canonical_bytes

MASK64 = (1 << 64) - 1
BASE_TIMESTAMP = 1704067200  # 2024-01-01T00:00:00Z
BLOCK_INTERVAL = 3600
CONTRACTS = ("pay", "settle", "swap")


class SplitMix64:
    """splitmix64 (Steele et al.): tiny, seedable, reproducible everywhere."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return self.next_u64() % n

    def chance(self, rate: float) -> bool:
        return self.next_u64() < int(rate * 2.0**64)

    def pick(self, seq):
        return seq[self.below(len(seq))]


class GenModel(Enum):
    UTXO = "utxo"
    ACCOUNT = "account"
    MIXED = "mixed"


class Scenario(Enum):
    RANDOM = "random"
    GRANTS = "grants"


@dataclass(frozen=True, slots=True)
class GenParams:
    seed: int = 1
    model: GenModel = GenModel.UTXO
    channels: int = 1
    blocks: int = 10
    txs_per_block: int = 5
    addresses: int = 50
    multi_input_rate: float = 0.0
    scenario: Scenario = Scenario.RANDOM

    def validate(self) -> None:
        if not isinstance(self.seed, int) or not (0 <= self.seed <= MASK64):
            raise InvalidParams(f"seed must be a u64, got {self.seed!r}")
        for name in ("channels", "blocks", "txs_per_block", "addresses"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise InvalidParams(f"{name} must be a positive integer, got {value!r}")
        rate = self.multi_input_rate
        if not isinstance(rate, (int, float)) or isinstance(rate, bool) or not (0 <= rate <= 1):
            raise InvalidParams(f"multi_input_rate must be in [0, 1], got {rate!r}")
        if self.scenario is Scenario.GRANTS and self.addresses < 2 * self.channels:
            raise InvalidParams(
                "grants scenario needs at least two orgs per channel "
                f"(addresses >= {2 * self.channels}, got {self.addresses})"
            )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "model": self.model.value,
            "channels": self.channels,
            "blocks": self.blocks,
            "txs_per_block": self.txs_per_block,
            "addresses": self.addresses,
            "multi_input_rate": self.multi_input_rate,
            "scenario": self.scenario.value,
        }


@dataclass(frozen=True, slots=True)
class GeneratedLedger:
    dump: bytes
    truth: dict
    labels: bytes | None = None


class _UnionFind:
    def __init__(self):
        self.parent: dict[str, str] = {}

    def find(self, a: str) -> str:
        self.parent.setdefault(a, a)
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


class _TruthBuilder:
    """Accumulates oracle data while the dump is being written."""

    def __init__(self):
        self.edges: list[dict] = []
        self.totals: dict[tuple[str, str], list[int]] = {}
        self.uf = _UnionFind()
        self.addresses: set[str] = set()
        self.tx_count = 0
        self.block_count = 0

    def add_interaction(self, from_addr: str, to_addr: str, value: int) -> None:
        acc = self.totals.setdefault((from_addr, to_addr), [0, 0])
        acc[0] += 1
        acc[1] += value

    # Same proportional rule the dump consumer applies: floor split by input
    # contribution, remainder to the smallest owner, self-source when nothing
    # resolves. Kept local so the truth never calls the code under test.
    def split_outputs(self, owners_value: dict[str, int], outputs: list[dict]) -> None:
        total_in = sum(owners_value.values())
        if total_in == 0:
            for out in outputs:
                self.add_interaction(out["address"], out["address"], out["value"])
            return
        owners = sorted(owners_value)
        for out in outputs:
            shares = {a: out["value"] * owners_value[a] // total_in for a in owners}
            shares[owners[0]] += out["value"] - sum(shares.values())
            for a in owners:
                self.add_interaction(a, out["address"], shares[a])

    def finish(self, params: GenParams) -> dict:
        clusters: dict[str, list[str]] = {}
        for addr in self.addresses:
            clusters.setdefault(self.uf.find(addr), []).append(addr)
        expected_clusters = {
            cid: sorted(members) for cid, members in clusters.items()
        }
        self.edges.sort(
            key=lambda e: (e["source_tx"], e["output_index"], e["target_tx"], e["input_index"])
        )
        totals = [
            {"from": f, "to": t, "count": c, "value": v}
            for (f, t), (c, v) in sorted(self.totals.items())
        ]
        return {
            "params": params.to_dict(),
            "counts": {"blocks": self.block_count, "txs": self.tx_count},
            "expected_clusters": expected_clusters,
            "expected_edges": self.edges,
            "expected_interaction_totals": totals,
        }


def _block_hash(channel: str, height: int, prev_hash: str, timestamp: int,
                tx_ids: list[str]) -> str:
    payload = json.dumps(
        [channel, height, prev_hash, timestamp, tx_ids], separators=(",", ":")
    ).encode()
    return hashlib.sha256(payload).hexdigest()


def _dump_line(record: dict) -> str:
    return json.dumps(record, separators=(",", ":"), ensure_ascii=False)


class _ChannelState:
    __slots__ = ("name", "prev_hash", "pool")

    def __init__(self, name: str):
        self.name = name
        self.prev_hash = "0" * 64
        self.pool: list[tuple[str, int, str, int]] = []  # (tx, index, owner, value)


def _generate_random(params: GenParams, rng: SplitMix64) -> GeneratedLedger:
    addresses = [f"addr-{i:04d}" for i in range(params.addresses)]
    states = [_ChannelState(f"ch-{c:02d}") for c in range(params.channels)]
    truth = _TruthBuilder()
    mint_counter = 0
    nonces: dict[str, int] = {}
    lines: list[str] = []

    for height in range(params.blocks):
        for c, state in enumerate(states):
            timestamp = BASE_TIMESTAMP + height * BLOCK_INTERVAL + c * 17
            tx_records: list[dict] = []
            tx_ids: list[str] = []
            for _ in range(params.txs_per_block):
                if params.model is GenModel.MIXED:
                    account = rng.chance(0.5)
                else:
                    account = params.model is GenModel.ACCOUNT
                if account:
                    sender = rng.pick(addresses)
                    receiver = rng.pick(addresses)
                    value = 1 + rng.below(1000)
                    record = {
                        "model": "account",
                        "from": sender,
                        "to": receiver,
                        "value": value,
                        "nonce": nonces.get(sender, 0),
                    }
                    nonces[sender] = record["nonce"] + 1
                    if rng.chance(0.3):
                        record["contract"] = rng.pick(CONTRACTS)
                    tx_id = derive_tx_id(tx_canonical_bytes(record))
                    truth.add_interaction(sender, receiver, value)
                    truth.addresses.update((sender, receiver))
                else:
                    record, tx_id, mint_counter = _utxo_tx(
                        rng, state, addresses, params.multi_input_rate,
                        mint_counter, timestamp, truth,
                    )
                tx_records.append(record)
                tx_ids.append(tx_id)
                truth.tx_count += 1
            block_hash = _block_hash(state.name, height, state.prev_hash, timestamp, tx_ids)
            lines.append(_dump_line({
                "height": height,
                "hash": block_hash,
                "prev_hash": state.prev_hash,
                "timestamp": format_timestamp(timestamp),
                "channel": state.name,
                "txs": tx_records,
            }))
            state.prev_hash = block_hash
            truth.block_count += 1

    dump = ("\n".join(lines) + "\n").encode("utf-8")
    return GeneratedLedger(dump, truth.finish(params))


def _utxo_tx(rng: SplitMix64, state: _ChannelState, addresses: list[str],
             multi_input_rate: float, mint_counter: int, timestamp: int,
             truth: _TruthBuilder) -> tuple[dict, str, int]:
    pool = state.pool
    spend = bool(pool) and rng.chance(0.8)
    if not spend:
        outputs = []
        for _ in range(1 + rng.below(2)):
            mint_counter += 1
            outputs.append({
                "address": rng.pick(addresses),
                # strictly increasing values keep every mint's bytes unique
                "value": 1000 + 97 * mint_counter,
            })
        record = {
            "model": "utxo",
            "inputs": [],
            "outputs": outputs,
            "signers": [outputs[0]["address"]],
        }
        tx_id = derive_tx_id(tx_canonical_bytes(record))
        for out in outputs:
            truth.add_interaction(out["address"], out["address"], out["value"])
            truth.addresses.add(out["address"])
        for index, out in enumerate(outputs):
            pool.append((tx_id, index, out["address"], out["value"]))
        return record, tx_id, mint_counter

    n_in = 1
    if len(pool) >= 2 and rng.chance(multi_input_rate):
        n_in = 2 + (1 if len(pool) >= 3 and rng.chance(0.5) else 0)
    picked: list[tuple[str, int, str, int]] = []
    for _ in range(n_in):
        slot = rng.below(len(pool))
        pool[slot], pool[-1] = pool[-1], pool[slot]
        picked.append(pool.pop())
    total_in = sum(entry[3] for entry in picked)
    fee = rng.below(min(4, total_in))
    out_total = total_in - fee
    # every output gets at least 1, so the pool never holds zero-value coins
    n_out = 2 if out_total >= 2 and rng.chance(0.5) else 1
    base = out_total // n_out
    outputs = []
    for index in range(n_out):
        value = base + (out_total - base * n_out if index == 0 else 0)
        outputs.append({"address": rng.pick(addresses), "value": value})
    owners = sorted({entry[2] for entry in picked})
    record = {
        "model": "utxo",
        "inputs": [{"tx": src, "index": idx} for src, idx, _owner, _v in picked],
        "outputs": outputs,
        "signers": owners,
    }
    if rng.chance(0.3):
        record["contract"] = rng.pick(CONTRACTS)
    tx_id = derive_tx_id(tx_canonical_bytes(record))

    owners_value: dict[str, int] = {}
    for input_index, (src, idx, owner, value) in enumerate(picked):
        truth.edges.append({
            "source_tx": src,
            "output_index": idx,
            "target_tx": tx_id,
            "input_index": input_index,
            "value": value,
            "owner": owner,
            "timestamp": timestamp,
        })
        owners_value[owner] = owners_value.get(owner, 0) + value
    if len(owners) >= 2:
        for left, right in zip(owners, owners[1:]):
            truth.uf.union(left, right)
    truth.split_outputs(owners_value, outputs)
    truth.addresses.update(owners)
    truth.addresses.update(out["address"] for out in outputs)
    for index, out in enumerate(outputs):
        pool.append((tx_id, index, out["address"], out["value"]))
    return record, tx_id, mint_counter


def _generate_grants(params: GenParams, rng: SplitMix64) -> GeneratedLedger:
    orgs = [f"org-{i:02d}" for i in range(params.addresses)]
    channels = [f"sector-{c:02d}" for c in range(params.channels)]
    by_channel: dict[str, list[str]] = {ch: [] for ch in channels}
    for i, org in enumerate(orgs):
        by_channel[channels[i % params.channels]].append(org)

    # counted as grants are emitted, so truth matches the dump exactly
    grants_per_org = {org: 0 for org in orgs}
    truth = _TruthBuilder()
    truth.addresses.update(orgs)
    nonces: dict[str, int] = {}
    lines: list[str] = []
    prev_hashes = {ch: "0" * 64 for ch in channels}

    for height in range(params.blocks):
        for c, channel in enumerate(channels):
            members = by_channel[channel]
            timestamp = BASE_TIMESTAMP + height * BLOCK_INTERVAL + c * 17
            tx_records: list[dict] = []
            tx_ids: list[str] = []
            for _ in range(params.txs_per_block):
                giver = rng.pick(members)
                receiver = giver
                while receiver == giver:
                    receiver = rng.pick(members)
                record = {
                    "model": "account",
                    "contract": "grant",
                    "from": giver,
                    "to": receiver,
                    "value": 1,
                    "nonce": nonces.get(giver, 0),
                }
                nonces[giver] = record["nonce"] + 1
                grants_per_org[receiver] += 1
                tx_records.append(record)
                tx_ids.append(derive_tx_id(tx_canonical_bytes(record)))
                truth.add_interaction(giver, receiver, 1)
                truth.tx_count += 1
            block_hash = _block_hash(channel, height, prev_hashes[channel], timestamp, tx_ids)
            lines.append(_dump_line({
                "height": height,
                "hash": block_hash,
                "prev_hash": prev_hashes[channel],
                "timestamp": format_timestamp(timestamp),
                "channel": channel,
                "txs": tx_records,
            }))
            prev_hashes[channel] = block_hash
            truth.block_count += 1

    dump = ("\n".join(lines) + "\n").encode("utf-8")
    truth_dict = truth.finish(params)
    truth_dict["grants_per_org"] = grants_per_org
    truth_dict["org_labels"] = {org: f"Org-{org.split('-')[1]}" for org in orgs}
    label_lines = [
        json.dumps({"target": org, "label": truth_dict["org_labels"][org]},
                   separators=(",", ":"))
        for org in orgs
    ]
    labels = ("\n".join(label_lines) + "\n").encode("utf-8")
    return GeneratedLedger(dump, truth_dict, labels)


def generate(params: GenParams) -> GeneratedLedger:
    params.validate()
    rng = SplitMix64(params.seed)
    if params.scenario is Scenario.GRANTS:
        return _generate_grants(params, rng)
    return _generate_random(params, rng)


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(
        prog="ledger-gen",
        description="Generate a deterministic synthetic ledger dump plus ground truth.",
    )
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--model", choices=[m.value for m in GenModel], default="utxo")
    parser.add_argument("--channels", type=int, default=1)
    parser.add_argument("--blocks", type=int, default=10, help="blocks per channel")
    parser.add_argument("--txs", type=int, default=5, help="transactions per block")
    parser.add_argument("--addresses", type=int, default=50)
    parser.add_argument("--multi-input-rate", type=float, default=0.0)
    parser.add_argument("--scenario", choices=[s.value for s in Scenario], default="random")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    params = GenParams(
        seed=args.seed,
        model=GenModel(args.model),
        channels=args.channels,
        blocks=args.blocks,
        txs_per_block=args.txs,
        addresses=args.addresses,
        multi_input_rate=args.multi_input_rate,
        scenario=Scenario(args.scenario),
    )
    try:
        result = generate(params)
    except InvalidParams as exc:
        parser.error(exc.detail)
        return
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "dump.jsonl").write_bytes(result.dump)
    (out_dir / "truth.json").write_text(
        json.dumps(result.truth, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    if result.labels is not None:
        (out_dir / "labels.ndjson").write_bytes(result.labels)
    print(
        f"wrote {truth_summary(result.truth)} to {out_dir}"
    )


def truth_summary(truth: dict) -> str:
    counts = truth["counts"]
    return f"{counts['blocks']} blocks / {counts['txs']} txs"


if __name__ == "__main__":
    main()
