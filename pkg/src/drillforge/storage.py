"""Canonical file formats and the append-only event log.

Drill sets serialize to canonical JSON (sorted keys, tight separators, UTF-8,
trailing newline) so identical content yields identical bytes. The event log
is JSON Lines with strictly increasing, gapless sequence numbers; a torn
final line (crash artifact) is detected, dropped, and truncated away.
"""

from __future__ import annotations

import hashlib
import json
import os
import secrets
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from .errors import ValidationError
from .itemgen import DrillSet

SCHEMA_VERSION = 1

EVENT_KINDS = (
    "account_created",
    "library_registered",
    "set_uploaded",
    "answer",
    "reward",
    "transfer",
    "purchase",
)


class DocumentError(ValidationError):
    code = "bad_document"


class LogCorruptionError(ValidationError):
    code = "log_corrupt"


# ---------------------------------------------------------------------------
# Canonical JSON
# ---------------------------------------------------------------------------

def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def encode_drill_set(drill_set: DrillSet) -> bytes:
    document = {"schema_version": SCHEMA_VERSION, "drillset": drill_set.to_dict()}
    return (canonical_json(document) + "\n").encode("utf-8")


def decode_drill_set(data: bytes) -> DrillSet:
    try:
        document = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as err:
        raise DocumentError(f"not valid UTF-8 at byte {err.start}") from err
    except json.JSONDecodeError as err:
        raise DocumentError(f"malformed JSON at byte offset {err.pos}: {err.msg}") from err
    if not isinstance(document, dict):
        raise DocumentError("document root must be an object")
    version = document.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema_version {version!r}")
    try:
        return DrillSet.from_dict(document["drillset"])
    except (KeyError, TypeError, ValueError) as err:
        raise DocumentError(f"invalid drill set document: {err}") from err


def load_drill_set(path: Union[str, Path]) -> DrillSet:
    return decode_drill_set(Path(path).read_bytes())


def save_drill_set(drill_set: DrillSet, path: Union[str, Path]) -> None:
    Path(path).write_bytes(encode_drill_set(drill_set))


# ---------------------------------------------------------------------------
# Event log
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EventRecord:
    seq: int
    kind: str
    timestamp: int
    payload: dict

    def to_dict(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, "timestamp": self.timestamp,
                "payload": self.payload}

    @classmethod
    def from_dict(cls, data: dict) -> "EventRecord":
        kind = data["kind"]
        if kind not in EVENT_KINDS:
            raise ValidationError(f"unknown event kind {kind!r}")
        return cls(seq=int(data["seq"]), kind=kind,
                   timestamp=int(data["timestamp"]), payload=dict(data["payload"]))


class EventLog:
    """Append-only record store, optionally file-backed (JSON Lines).

    Single appender; every append assigns the next sequence number and, when
    file-backed, flushes the line before returning.
    """

    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path is not None else None
        self.records: list[EventRecord] = []
        self._fh = None
        if self.path is not None:
            self._load_and_repair()
            self._fh = open(self.path, "a", encoding="utf-8")

    @classmethod
    def open(cls, path: Union[str, Path]) -> "EventLog":
        return cls(path)

    def _load_and_repair(self) -> None:
        if not self.path.exists():
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.touch()
            return
        raw = self.path.read_bytes()
        good_bytes = 0
        lines = raw.split(b"\n")
        # a complete log ends with a newline, so the final split element is
        # empty; anything else is a torn tail unless it parses cleanly
        for index, line in enumerate(lines):
            is_last = index == len(lines) - 1
            if line == b"":
                continue
            try:
                record = EventRecord.from_dict(json.loads(line.decode("utf-8")))
            except (ValueError, KeyError, ValidationError) as err:
                if is_last:
                    break  # torn final line: ignore and truncate
                raise LogCorruptionError(f"corrupt event at line {index + 1}: {err}") from err
            if record.seq != len(self.records) + 1:
                raise LogCorruptionError(
                    f"sequence gap at line {index + 1}: got {record.seq}, "
                    f"expected {len(self.records) + 1}"
                )
            self.records.append(record)
            good_bytes += len(line) + 1
        if good_bytes < len(raw):
            with open(self.path, "r+b") as fh:
                fh.truncate(good_bytes)

    def append(self, kind: str, payload: dict, timestamp: int) -> EventRecord:
        if kind not in EVENT_KINDS:
            raise ValidationError(f"unknown event kind {kind!r}")
        record = EventRecord(seq=len(self.records) + 1, kind=kind,
                             timestamp=int(timestamp), payload=payload)
        if self._fh is not None:
            self._fh.write(canonical_json(record.to_dict()) + "\n")
            self._fh.flush()
            os.fsync(self._fh.fileno())
        self.records.append(record)
        return record

    def __iter__(self) -> Iterator[EventRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def validate_sequence(records: Iterable[EventRecord]) -> None:
    expected = 1
    for record in records:
        if record.seq != expected:
            raise LogCorruptionError(f"sequence gap: got {record.seq}, expected {expected}")
        expected += 1


# ---------------------------------------------------------------------------
# Anonymized export
# ---------------------------------------------------------------------------

def anonymized_export(log: Iterable[EventRecord], salt: Optional[str] = None) -> bytes:
    """Answer records only, with student ids replaced by salted opaque tokens.

    A fresh salt per export keeps tokens stable within one export but
    unlinkable across exports.
    """
    if salt is None:
        salt = secrets.token_hex(16)
    lines = []
    for record in log:
        if record.kind != "answer":
            continue
        payload = record.payload
        token = hashlib.sha256(f"{salt}:{payload['account_id']}".encode("utf-8")).hexdigest()[:16]
        lines.append(canonical_json({
            "seq": record.seq,
            "timestamp": record.timestamp,
            "student": token,
            "drillset_id": payload["drillset_id"],
            "item_id": payload["item_id"],
            "correct": payload["correct"],
            "mode": payload.get("mode", "drill"),
        }))
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")
