"""Canonical domain types shared by the whole pipeline.

Pure value objects, no I/O. All instances are frozen dataclasses and safe to
share across threads. Monetary values are integer base units throughout so
conservation checks stay exact; timestamps are integer UTC epoch seconds.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from .errors import ModelViolation

GENESIS_PREV_HASH = "0" * 64
MAX_ADDRESS_LEN = 256
U32_MAX = 2**32 - 1

_HEX64 = re.compile(r"^[0-9a-f]{64}$")


class TxModel(Enum):
    UTXO = "utxo"
    ACCOUNT = "account"


def is_tx_id(value: object) -> bool:
    """True iff value is a 64-char lowercase hex string."""
    return isinstance(value, str) and _HEX64.match(value) is not None


def validate_tx_id(value: str) -> str:
    if not is_tx_id(value):
        raise ModelViolation(f"not a 64-char lowercase hex tx id: {value!r}")
    return value


def validate_address(value: str) -> str:
    if not isinstance(value, str) or not value:
        raise ModelViolation("address must be a non-empty string")
    if len(value) > MAX_ADDRESS_LEN:
        raise ModelViolation(f"address longer than {MAX_ADDRESS_LEN} chars")
    if value != value.strip():
        raise ModelViolation(f"address has leading/trailing whitespace: {value!r}")
    return value


def validate_channel(value: str) -> str:
    if not isinstance(value, str) or not value:
        raise ModelViolation("channel must be a non-empty string")
    return value


def _require_count(value: object, what: str, maximum: int | None = None) -> int:
    # bool is an int subclass; never a valid count
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ModelViolation(f"{what} must be a non-negative integer, got {value!r}")
    if maximum is not None and value > maximum:
        raise ModelViolation(f"{what} exceeds maximum {maximum}: {value}")
    return value


def parse_timestamp(text: str) -> int:
    """RFC 3339 string to UTC epoch seconds (fractional part truncated)."""
    if not isinstance(text, str):
        raise ModelViolation(f"timestamp must be a string, got {type(text).__name__}")
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ModelViolation(f"bad RFC 3339 timestamp {text!r}: {exc}") from None
    if dt.tzinfo is None:
        raise ModelViolation(f"timestamp {text!r} has no UTC offset")
    return int(dt.timestamp() // 1)


def format_timestamp(epoch: int) -> str:
    """UTC epoch seconds to the RFC 3339 'Z' form used in dumps and responses."""
    dt = datetime.fromtimestamp(epoch, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True, slots=True)
class InputRef:
    """Reference to a previous transaction's output (UTXO model)."""

    source_tx: str
    output_index: int

    def __post_init__(self):
        validate_tx_id(self.source_tx)
        _require_count(self.output_index, "output_index", U32_MAX)


@dataclass(frozen=True, slots=True)
class Output:
    address: str
    value: int

    def __post_init__(self):
        validate_address(self.address)
        _require_count(self.value, "output value")


@dataclass(frozen=True, slots=True)
class Transfer:
    """Direct value move of the account model."""

    from_addr: str
    to_addr: str
    value: int
    nonce: int

    def __post_init__(self):
        validate_address(self.from_addr)
        validate_address(self.to_addr)
        _require_count(self.value, "transfer value")
        _require_count(self.nonce, "nonce")


@dataclass(frozen=True, slots=True)
class ParsedTransaction:
    """Canonical transaction with id, timestamp and positional indices filled in."""

    id: str
    model: TxModel
    block_height: int
    tx_index: int
    timestamp: int
    channel: str
    contract: str | None = None
    inputs: tuple[InputRef, ...] = ()
    outputs: tuple[Output, ...] = ()
    transfer: Transfer | None = None
    signers: tuple[str, ...] = ()

    def __post_init__(self):
        validate_tx_id(self.id)
        _require_count(self.block_height, "block_height")
        _require_count(self.tx_index, "tx_index")
        _require_count(self.timestamp, "timestamp")
        validate_channel(self.channel)
        if self.contract is not None and (not isinstance(self.contract, str) or not self.contract):
            raise ModelViolation("contract must be a non-empty string when present")
        for s in self.signers:
            validate_address(s)
        if self.model is TxModel.UTXO:
            if self.transfer is not None:
                raise ModelViolation("utxo tx must not carry a transfer")
            if not self.outputs:
                raise ModelViolation("utxo tx must have at least one output")
        elif self.model is TxModel.ACCOUNT:
            if self.inputs or self.outputs:
                raise ModelViolation("account tx must not carry inputs or outputs")
            if self.transfer is None:
                raise ModelViolation("account tx must carry a transfer")
        else:  # pragma: no cover - enum is closed
            raise ModelViolation(f"unknown tx model {self.model!r}")

    @property
    def is_mint(self) -> bool:
        """UTXO tx with no inputs; introduces new value."""
        return self.model is TxModel.UTXO and not self.inputs


@dataclass(frozen=True, slots=True)
class ParsedBlock:
    height: int
    hash: str
    prev_hash: str
    timestamp: int
    channel: str
    txs: tuple[ParsedTransaction, ...] = field(default=())

    def __post_init__(self):
        _require_count(self.height, "height")
        if not is_tx_id(self.hash):
            raise ModelViolation(f"block hash must be 64-hex, got {self.hash!r}")
        if not is_tx_id(self.prev_hash):
            raise ModelViolation(f"prev_hash must be 64-hex, got {self.prev_hash!r}")
        if self.height == 0 and self.prev_hash != GENESIS_PREV_HASH:
            raise ModelViolation("genesis block must have all-zero prev_hash")
        _require_count(self.timestamp, "timestamp")
        validate_channel(self.channel)
        for i, tx in enumerate(self.txs):
            if tx.channel != self.channel:
                raise ModelViolation(f"tx {tx.id} channel differs from block channel")
            if tx.block_height != self.height or tx.tx_index != i:
                raise ModelViolation(f"tx {tx.id} positional indices do not match block")


@dataclass(frozen=True, slots=True)
class TxEdge:
    """A resolved link from a source transaction's output to a target's input."""

    source_tx: str
    output_index: int
    target_tx: str
    input_index: int
    value: int
    owner: str
    timestamp: int

    def __post_init__(self):
        validate_tx_id(self.source_tx)
        validate_tx_id(self.target_tx)
        _require_count(self.output_index, "output_index", U32_MAX)
        _require_count(self.input_index, "input_index", U32_MAX)
        _require_count(self.value, "edge value")
        validate_address(self.owner)
        _require_count(self.timestamp, "timestamp")


def derive_tx_id(canonical_bytes: bytes) -> str:
    """Lowercase hex SHA-256 of the canonical serialization. Total and deterministic."""
    return hashlib.sha256(canonical_bytes).hexdigest()
