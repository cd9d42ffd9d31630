"""Block dump parsing: newline-delimited JSON records in, ParsedBlocks out.

Validates structure and hash-chain linkage per channel. Content hashes are
treated as opaque; linkage is checked but hashes are never recomputed from
block contents. Transactions missing an "id" get one derived from the
canonical serialization (sorted keys, no whitespace, UTF-8, SHA-256).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable, Iterator

from .errors import ChainMismatch, DuplicateTxId, MalformedRecord, ModelViolation
from .model import (
    GENESIS_PREV_HASH,
    InputRef,
    Output,
    ParsedBlock,
    ParsedTransaction,
    Transfer,
    TxModel,
    derive_tx_id,
    format_timestamp,
    is_tx_id,
    parse_timestamp,
)

BLOCK_KEYS = {"height", "hash", "prev_hash", "timestamp", "channel", "txs"}
UTXO_TX_KEYS = {"model", "id", "contract", "inputs", "outputs", "signers"}
ACCOUNT_TX_KEYS = {"model", "id", "contract", "from", "to", "value", "nonce"}
INPUT_KEYS = {"tx", "index"}
OUTPUT_KEYS = {"address", "value"}


class ParseMode(Enum):
    STRICT = "strict"
    LENIENT = "lenient"


# (height, hash, timestamp) of the last accepted block on a channel; lets a
# continuation dump anchor against a previously ingested tip.
Anchor = tuple[int, str, int]


@dataclass
class ParseReport:
    blocks_ok: int = 0
    blocks_rejected: int = 0
    txs_ok: int = 0
    errors: list[dict] = field(default_factory=list)

    def record_error(self, height: int, kind: str, detail: str) -> None:
        self.blocks_rejected += 1
        self.errors.append({"height": height, "kind": kind, "detail": detail})

    def to_dict(self) -> dict:
        return {
            "blocks_ok": self.blocks_ok,
            "blocks_rejected": self.blocks_rejected,
            "txs_ok": self.txs_ok,
            "errors": list(self.errors),
        }


def _reject_unknown_keys(obj: dict, known: set[str], mode: ParseMode, what: str) -> None:
    if mode is ParseMode.STRICT:
        unknown = set(obj) - known
        if unknown:
            raise MalformedRecord(f"unknown {what} keys: {sorted(unknown)}")


def _get_str(obj: dict, key: str, what: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str):
        raise MalformedRecord(f"{what}.{key} must be a string, got {value!r}")
    return value


def _get_count(obj: dict, key: str, what: str) -> int:
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise MalformedRecord(f"{what}.{key} must be a non-negative integer, got {value!r}")
    return value


def _optional_str(obj: dict, key: str, mode: ParseMode, what: str) -> str | None:
    if key not in obj:
        return None
    value = obj[key]
    if value is None:
        if mode is ParseMode.STRICT:
            raise MalformedRecord(f"{what}.{key} must be a string when present, not null")
        return None
    if not isinstance(value, str) or not value:
        raise MalformedRecord(f"{what}.{key} must be a non-empty string, got {value!r}")
    return value


def tx_canonical_record(record: dict) -> dict:
    """Schema-known fields of a tx record, minus "id", for id derivation.

    Built from whitelisted keys only so Lenient-mode extra keys never leak
    into the digest.
    """
    model = record.get("model")
    if model == "utxo":
        keys = UTXO_TX_KEYS
    elif model == "account":
        keys = ACCOUNT_TX_KEYS
    else:
        raise MalformedRecord(f"tx.model must be 'utxo' or 'account', got {model!r}")
    canonical = {k: record[k] for k in keys if k != "id" and k in record and record[k] is not None}
    return canonical


def tx_canonical_bytes(record: dict) -> bytes:
    """Canonical serialization: keys sorted lexicographically, no whitespace, UTF-8."""
    return json.dumps(
        tx_canonical_record(record), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def _parse_tx(
    raw: object,
    mode: ParseMode,
    channel: str,
    height: int,
    tx_index: int,
    timestamp: int,
) -> ParsedTransaction:
    if not isinstance(raw, dict):
        raise MalformedRecord(f"tx record must be an object, got {type(raw).__name__}")
    model_name = raw.get("model")
    if model_name == "utxo":
        model, known = TxModel.UTXO, UTXO_TX_KEYS
        foreign = set(raw) & (ACCOUNT_TX_KEYS - UTXO_TX_KEYS)
    elif model_name == "account":
        model, known = TxModel.ACCOUNT, ACCOUNT_TX_KEYS
        foreign = set(raw) & (UTXO_TX_KEYS - ACCOUNT_TX_KEYS)
    else:
        raise MalformedRecord(f"tx.model must be 'utxo' or 'account', got {model_name!r}")
    if foreign:
        raise ModelViolation(f"{model_name} tx mixes fields of the other model: {sorted(foreign)}")
    _reject_unknown_keys(raw, known, mode, "tx")

    contract = _optional_str(raw, "contract", mode, "tx")

    inputs: tuple[InputRef, ...] = ()
    outputs: tuple[Output, ...] = ()
    transfer: Transfer | None = None
    signers: tuple[str, ...] = ()
    if model is TxModel.UTXO:
        raw_inputs = raw.get("inputs")
        raw_outputs = raw.get("outputs")
        raw_signers = raw.get("signers")
        if not isinstance(raw_inputs, list) or not isinstance(raw_outputs, list):
            raise MalformedRecord("utxo tx requires 'inputs' and 'outputs' lists")
        if not isinstance(raw_signers, list):
            raise MalformedRecord("utxo tx requires a 'signers' list")
        parsed_inputs = []
        for item in raw_inputs:
            if not isinstance(item, dict):
                raise MalformedRecord("tx input must be an object")
            _reject_unknown_keys(item, INPUT_KEYS, mode, "input")
            src = _get_str(item, "tx", "input")
            if not is_tx_id(src):
                raise MalformedRecord(f"input.tx must be 64-hex, got {src!r}")
            parsed_inputs.append(InputRef(src, _get_count(item, "index", "input")))
        parsed_outputs = []
        for item in raw_outputs:
            if not isinstance(item, dict):
                raise MalformedRecord("tx output must be an object")
            _reject_unknown_keys(item, OUTPUT_KEYS, mode, "output")
            parsed_outputs.append(
                Output(_get_str(item, "address", "output"), _get_count(item, "value", "output"))
            )
        for s in raw_signers:
            if not isinstance(s, str):
                raise MalformedRecord(f"signer must be a string, got {s!r}")
        inputs = tuple(parsed_inputs)
        outputs = tuple(parsed_outputs)
        signers = tuple(raw_signers)
    else:
        transfer = Transfer(
            from_addr=_get_str(raw, "from", "tx"),
            to_addr=_get_str(raw, "to", "tx"),
            value=_get_count(raw, "value", "tx"),
            nonce=_get_count(raw, "nonce", "tx"),
        )

    tx_id = raw.get("id")
    if tx_id is None:
        normalized = _tx_record_fields(model, contract, inputs, outputs, transfer, signers)
        tx_id = derive_tx_id(tx_canonical_bytes(normalized))
    elif not is_tx_id(tx_id):
        raise MalformedRecord(f"tx.id must be 64-char lowercase hex, got {tx_id!r}")

    try:
        return ParsedTransaction(
            id=tx_id,
            model=model,
            block_height=height,
            tx_index=tx_index,
            timestamp=timestamp,
            channel=channel,
            contract=contract,
            inputs=inputs,
            outputs=outputs,
            transfer=transfer,
            signers=signers,
        )
    except ModelViolation:
        raise
    except ValueError as exc:
        raise MalformedRecord(str(exc)) from None


def parse_block(
    record: dict | str | bytes,
    prev: ParsedBlock | Anchor | None = None,
    mode: ParseMode = ParseMode.STRICT,
    _seen_ids: set[str] | None = None,
) -> ParsedBlock:
    """Parse and validate one raw block record against the previous accepted block.

    ``prev`` is the last accepted block on the same channel (or its
    (height, hash, timestamp) anchor), absent for genesis.
    """
    if isinstance(record, (str, bytes)):
        try:
            record = json.loads(record)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"invalid JSON: {exc}") from None
    if not isinstance(record, dict):
        raise MalformedRecord(f"block record must be an object, got {type(record).__name__}")
    _reject_unknown_keys(record, BLOCK_KEYS, mode, "block")

    height = _get_count(record, "height", "block")
    block_hash = _get_str(record, "hash", "block")
    prev_hash = _get_str(record, "prev_hash", "block")
    if not is_tx_id(block_hash) or not is_tx_id(prev_hash):
        raise MalformedRecord("block hash and prev_hash must be 64-char lowercase hex")
    timestamp = parse_timestamp(_get_str(record, "timestamp", "block"))
    channel = _get_str(record, "channel", "block")
    if not channel:
        raise MalformedRecord("block.channel must be non-empty")
    raw_txs = record.get("txs")
    if not isinstance(raw_txs, list):
        raise MalformedRecord("block.txs must be a list")

    if prev is None:
        if height != 0:
            raise ChainMismatch(f"block height {height} on {channel!r} has no predecessor")
        if prev_hash != GENESIS_PREV_HASH:
            raise ChainMismatch("genesis prev_hash must be 64 zeros")
    else:
        prev_height, prev_hash_expected, prev_ts = (
            (prev.height, prev.hash, prev.timestamp) if isinstance(prev, ParsedBlock) else prev
        )
        if height != prev_height + 1:
            raise ChainMismatch(
                f"height {height} does not extend accepted height {prev_height} on {channel!r}"
            )
        if prev_hash != prev_hash_expected:
            raise ChainMismatch(f"prev_hash {prev_hash} != accepted hash {prev_hash_expected}")
        if timestamp < prev_ts:
            raise ChainMismatch(
                f"block timestamp {format_timestamp(timestamp)} precedes predecessor's"
            )

    seen = _seen_ids if _seen_ids is not None else set()
    txs = []
    for index, raw_tx in enumerate(raw_txs):
        tx = _parse_tx(raw_tx, mode, channel, height, index, timestamp)
        if tx.id in seen:
            raise DuplicateTxId(f"tx id {tx.id} already seen in this parse session")
        seen.add(tx.id)
        txs.append(tx)

    return ParsedBlock(
        height=height,
        hash=block_hash,
        prev_hash=prev_hash,
        timestamp=timestamp,
        channel=channel,
        txs=tuple(txs),
    )


def _iter_lines(source: bytes | str | IO | Iterable) -> Iterator[str]:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        yield from source.splitlines()
        return
    for line in source:
        yield line.decode("utf-8") if isinstance(line, bytes) else line


def parse_stream(
    source: bytes | str | IO | Iterable,
    mode: ParseMode = ParseMode.STRICT,
    anchors: dict[str, Anchor] | None = None,
) -> tuple[list[ParsedBlock], ParseReport]:
    """Parse a newline-delimited block dump, possibly with interleaved channels.

    Strict mode stops at the first error; Lenient skips rejected blocks and
    keeps going. Either way errors land in the report rather than raising.
    Successors of a rejected block on the same channel fail ChainMismatch
    because the channel's accepted tip never advances past the bad block.
    ``anchors`` carries per-channel tips when the stream continues an
    already-ingested chain.
    """
    report = ParseReport()
    blocks: list[ParsedBlock] = []
    tips: dict[str, ParsedBlock | Anchor] = dict(anchors or {})
    seen_ids: set[str] = set()

    for line in _iter_lines(source):
        if not line.strip():
            continue
        raw_height = -1
        try:
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(f"invalid JSON: {exc}") from None
            if isinstance(record, dict):
                h = record.get("height")
                if isinstance(h, int) and not isinstance(h, bool):
                    raw_height = h
            channel = record.get("channel") if isinstance(record, dict) else None
            prev = tips.get(channel) if isinstance(channel, str) else None
            block = parse_block(record, prev, mode, _seen_ids=seen_ids)
        except (MalformedRecord, ChainMismatch, DuplicateTxId, ModelViolation) as exc:
            report.record_error(raw_height, exc.code, exc.detail)
            if mode is ParseMode.STRICT:
                break
            continue
        blocks.append(block)
        tips[block.channel] = block
        report.blocks_ok += 1
        report.txs_ok += len(block.txs)

    return blocks, report


def tx_to_record(tx: ParsedTransaction) -> dict:
    """Dump-format JSON object for a transaction, id included."""
    record: dict = {"model": tx.model.value, "id": tx.id}
    if tx.contract is not None:
        record["contract"] = tx.contract
    if tx.model is TxModel.UTXO:
        record["inputs"] = [{"tx": i.source_tx, "index": i.output_index} for i in tx.inputs]
        record["outputs"] = [{"address": o.address, "value": o.value} for o in tx.outputs]
        record["signers"] = list(tx.signers)
    else:
        assert tx.transfer is not None
        record["from"] = tx.transfer.from_addr
        record["to"] = tx.transfer.to_addr
        record["value"] = tx.transfer.value
        record["nonce"] = tx.transfer.nonce
    return record


def _tx_record_fields(
    model: TxModel,
    contract: str | None,
    inputs: tuple[InputRef, ...],
    outputs: tuple[Output, ...],
    transfer: Transfer | None,
    signers: tuple[str, ...],
) -> dict:
    record: dict = {"model": model.value}
    if contract is not None:
        record["contract"] = contract
    if model is TxModel.UTXO:
        record["inputs"] = [{"tx": i.source_tx, "index": i.output_index} for i in inputs]
        record["outputs"] = [{"address": o.address, "value": o.value} for o in outputs]
        record["signers"] = list(signers)
    else:
        assert transfer is not None
        record["from"] = transfer.from_addr
        record["to"] = transfer.to_addr
        record["value"] = transfer.value
        record["nonce"] = transfer.nonce
    return record


def block_to_record(block: ParsedBlock) -> dict:
    return {
        "height": block.height,
        "hash": block.hash,
        "prev_hash": block.prev_hash,
        "timestamp": format_timestamp(block.timestamp),
        "channel": block.channel,
        "txs": [tx_to_record(tx) for tx in block.txs],
    }


def block_to_line(block: ParsedBlock) -> str:
    """One dump line (no trailing newline)."""
    return json.dumps(block_to_record(block), separators=(",", ":"), ensure_ascii=False)
