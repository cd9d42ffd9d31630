"""Analyst annotations on addresses and clusters.

Cluster ids share the address namespace (a cluster is named after its
smallest member), so one label table covers both. Labels accumulate; the
effective label of a target is the newest record, with deterministic
tie-breaks so replaying the same records always yields the same answer:
newest applied_at wins, then user entries beat imported ones, then the
lexicographically smallest label text.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .errors import MalformedRecord, UnknownTarget

MAX_LABEL_LEN = 128


class LabelSource(Enum):
    USER = "user"
    IMPORT = "import"


_SOURCE_RANK = {LabelSource.IMPORT: 0, LabelSource.USER: 1}


@dataclass(frozen=True, slots=True)
class LabelRecord:
    target: str
    label: str
    source: LabelSource
    applied_at: int

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "label": self.label,
            "source": self.source.value,
            "applied_at": self.applied_at,
        }


@dataclass(frozen=True, slots=True)
class ImportOutcome:
    applied: int
    rejected: int
    errors: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "applied": self.applied,
            "rejected": self.rejected,
            "errors": list(self.errors),
        }


def _validate_label_text(label) -> str:
    if not isinstance(label, str) or not label.strip():
        raise MalformedRecord(f"label must be a non-empty string, got {label!r}")
    if len(label) > MAX_LABEL_LEN:
        raise MalformedRecord(f"label exceeds {MAX_LABEL_LEN} characters")
    return label


class LabelService:
    """In-memory label table. ``known`` decides which targets are accepted;
    journaling is wired by the caller via ``on_applied``."""

    def __init__(
        self,
        known: Callable[[str], bool],
        on_applied: Callable[[LabelRecord], None] | None = None,
    ):
        self._known = known
        self._on_applied = on_applied
        self._lock = threading.Lock()
        self._records: dict[str, list[LabelRecord]] = {}

    def _build_record(self, record: dict) -> LabelRecord:
        if not isinstance(record, dict):
            raise MalformedRecord(f"label record must be an object, got {type(record).__name__}")
        unknown = set(record) - {"target", "label", "source", "applied_at"}
        if unknown:
            raise MalformedRecord(f"unknown label fields: {sorted(unknown)}")
        target = record.get("target")
        if not isinstance(target, str) or not target:
            raise MalformedRecord(f"target must be a non-empty string, got {target!r}")
        label = _validate_label_text(record.get("label"))
        source_raw = record.get("source", LabelSource.IMPORT.value)
        try:
            source = LabelSource(source_raw)
        except ValueError:
            raise MalformedRecord(f"unknown label source {source_raw!r}") from None
        applied_at = record.get("applied_at")
        if applied_at is None:
            applied_at = int(time.time())
        elif not isinstance(applied_at, int) or isinstance(applied_at, bool) or applied_at < 0:
            raise MalformedRecord(
                f"applied_at must be a non-negative integer, got {applied_at!r}"
            )
        if not self._known(target):
            raise UnknownTarget(f"label target {target!r} is not a known address or cluster")
        return LabelRecord(target, label, source, applied_at)

    def _store(self, rec: LabelRecord, journal: bool) -> None:
        with self._lock:
            self._records.setdefault(rec.target, []).append(rec)
        if journal and self._on_applied is not None:
            self._on_applied(rec)

    def add(
        self, target: str, label: str, applied_at: int | None = None,
        source: LabelSource = LabelSource.USER,
    ) -> LabelRecord:
        rec = self._build_record(
            {
                "target": target,
                "label": label,
                "source": source.value,
                **({} if applied_at is None else {"applied_at": applied_at}),
            }
        )
        self._store(rec, journal=True)
        return rec

    def import_batch(self, records: list[dict]) -> ImportOutcome:
        """Apply what validates, collect per-record errors for the rest."""
        applied = 0
        errors: list[dict] = []
        for index, raw in enumerate(records):
            try:
                if isinstance(raw, dict) and "source" not in raw:
                    raw = {**raw, "source": LabelSource.IMPORT.value}
                rec = self._build_record(raw)
            except (MalformedRecord, UnknownTarget) as exc:
                errors.append({"index": index, "error": exc.code, "detail": exc.detail})
                continue
            self._store(rec, journal=True)
            applied += 1
        return ImportOutcome(applied, len(errors), tuple(errors))

    def replay(self, record: dict) -> None:
        """Re-apply a journaled record without journaling it again."""
        self._store(self._build_record(record), journal=False)

    def records_for(self, target: str) -> list[LabelRecord]:
        with self._lock:
            found = list(self._records.get(target, ()))
        found.sort(key=lambda r: (r.applied_at, _SOURCE_RANK[r.source], r.label))
        return found

    def effective(self, target: str) -> LabelRecord | None:
        with self._lock:
            records = self._records.get(target)
            if not records:
                return None
            return min(
                records,
                key=lambda r: (-r.applied_at, -_SOURCE_RANK[r.source], r.label),
            )

    def all_effective(self) -> dict[str, LabelRecord]:
        with self._lock:
            targets = list(self._records)
        result = {}
        for target in targets:
            rec = self.effective(target)
            if rec is not None:
                result[target] = rec
        return result
