"""Shared error types.

Every error carries a short machine-readable ``code`` so the REST layer can
map it onto the JSON error envelope without string matching.
"""

from __future__ import annotations


class LedgerError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, detail: str = ""):
        super().__init__(detail)
        self.detail = detail or self.code


class MalformedRecord(LedgerError):
    code = "malformed_record"


class ChainMismatch(LedgerError):
    code = "chain_mismatch"


class DuplicateTxId(LedgerError):
    code = "duplicate_tx_id"


class ModelViolation(LedgerError):
    code = "model_violation"


class NotFound(LedgerError):
    code = "not_found"


class TipConflict(LedgerError):
    code = "tip_conflict"


class StoreVersionError(LedgerError):
    code = "store_version"


class HopLimitExceeded(LedgerError):
    code = "hop_limit_exceeded"


class InvalidRule(LedgerError):
    code = "invalid_rule"


class UnknownTarget(LedgerError):
    code = "unknown_target"


class EmptyWindow(LedgerError):
    code = "empty_window"


class UnknownClusteringVersion(LedgerError):
    code = "unknown_clustering_version"


class InvalidParams(LedgerError):
    code = "invalid_params"


class ReadOnlyStore(LedgerError):
    code = "read_only"
