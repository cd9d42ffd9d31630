import hashlib
import json
from dataclasses import dataclass

import pytest

from ledgerlens import (
    GeneratedLedger,
    GenModel,
    GenParams,
    LedgerStore,
    ParseMode,
    derive_tx_id,
    format_timestamp,
    generate,
    parse_stream,
)
from ledgerlens.parser import tx_canonical_bytes

BASE_TS = 1704067200  # 2024-01-01T00:00:00Z


def tx_id_of(record: dict) -> str:
    return derive_tx_id(tx_canonical_bytes(record))


def make_block(height: int, prev_hash: str, timestamp: int, channel: str,
               txs: list[dict], salt: str = "") -> dict:
    block_hash = hashlib.sha256(
        f"{channel}/{height}/{prev_hash}/{salt}".encode()
    ).hexdigest()
    return {
        "height": height,
        "hash": block_hash,
        "prev_hash": prev_hash,
        "timestamp": format_timestamp(timestamp),
        "channel": channel,
        "txs": txs,
    }


def chain(groups: list[list[dict]], channel: str = "main",
          start_ts: int = BASE_TS, step: int = 600) -> list[dict]:
    """Build a linked chain of block records, one block per tx group."""
    records = []
    prev = "0" * 64
    for height, txs in enumerate(groups):
        record = make_block(height, prev, start_ts + height * step, channel, txs)
        records.append(record)
        prev = record["hash"]
    return records


def dump_bytes(records: list[dict]) -> bytes:
    return ("\n".join(json.dumps(r) for r in records) + "\n").encode()


def ingest_dump(dump: bytes, store: LedgerStore | None = None) -> LedgerStore:
    store = store or LedgerStore()
    blocks, report = parse_stream(dump, ParseMode.STRICT)
    assert not report.errors, report.errors
    store.ingest(blocks)
    return store


@dataclass(frozen=True)
class Fig1a:
    """Two mints feeding a join tx, then a two-step chain: the classic
    one-hop/two-hop tracing example."""

    dump: bytes
    records: list
    ids: dict  # 1..5 -> tx id

    def __getattr__(self, name: str) -> str:
        if name.startswith("id") and name[2:].isdigit():
            return self.ids[int(name[2:])]
        raise AttributeError(name)


@pytest.fixture(scope="session")
def fig1a() -> Fig1a:
    tx1 = {"model": "utxo", "inputs": [], "outputs": [{"address": "a1", "value": 10}],
           "signers": ["a1"]}
    tx2 = {"model": "utxo", "inputs": [], "outputs": [{"address": "a2", "value": 5}],
           "signers": ["a2"]}
    id1, id2 = tx_id_of(tx1), tx_id_of(tx2)
    tx3 = {"model": "utxo",
           "inputs": [{"tx": id1, "index": 0}, {"tx": id2, "index": 0}],
           "outputs": [{"address": "a3", "value": 14}], "signers": ["a1", "a2"]}
    id3 = tx_id_of(tx3)
    tx4 = {"model": "utxo", "inputs": [{"tx": id3, "index": 0}],
           "outputs": [{"address": "a4", "value": 13}], "signers": ["a3"]}
    id4 = tx_id_of(tx4)
    tx5 = {"model": "utxo", "inputs": [{"tx": id4, "index": 0}],
           "outputs": [{"address": "a5", "value": 12}], "signers": ["a4"]}
    id5 = tx_id_of(tx5)
    records = chain([[tx1, tx2], [tx3], [tx4], [tx5]])
    return Fig1a(
        dump=dump_bytes(records),
        records=records,
        ids={1: id1, 2: id2, 3: id3, 4: id4, 5: id5},
    )


@pytest.fixture()
def fig1a_store(fig1a) -> LedgerStore:
    return ingest_dump(fig1a.dump)


@pytest.fixture(scope="session")
def gen_medium() -> GeneratedLedger:
    return generate(GenParams(
        seed=11, model=GenModel.UTXO, channels=2, blocks=30, txs_per_block=25,
        addresses=80, multi_input_rate=0.25,
    ))


@pytest.fixture(scope="session")
def medium_store(gen_medium) -> LedgerStore:
    """Read-only shared store over the medium fixture. Do not ingest into it."""
    return ingest_dump(gen_medium.dump)


@pytest.fixture(scope="session")
def gen_mixed() -> GeneratedLedger:
    return generate(GenParams(
        seed=29, model=GenModel.MIXED, channels=2, blocks=20, txs_per_block=20,
        addresses=60, multi_input_rate=0.25,
    ))


@pytest.fixture(scope="session")
def mixed_store(gen_mixed) -> LedgerStore:
    """Read-only shared store over the mixed-model fixture."""
    return ingest_dump(gen_mixed.dump)


@pytest.fixture(scope="session")
def gen_rates() -> dict[float, GeneratedLedger]:
    return {
        rate: generate(GenParams(
            seed=int(20 + rate * 100), model=GenModel.UTXO, channels=1, blocks=25,
            txs_per_block=40, addresses=120, multi_input_rate=rate,
        ))
        for rate in (0.0, 0.25, 0.5)
    }
