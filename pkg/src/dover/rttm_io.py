"""RTTM and JSON reading/writing for diarization hypotheses.

RTTM line layout::

    SPEAKER <file> <chan> <tbeg> <tdur> <ortho> <stype> <name> <conf> <slat>

Times are converted to integer milliseconds on read (round-half-even on the
exact decimal value) and printed with three decimals on write.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, InvalidOperation
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO, Union

from .timeline import Diarization, Turn, validate

__all__ = [
    "RttmRecord",
    "RttmParseError",
    "parse_rttm",
    "emit_rttm",
    "records_to_diarization",
    "load_rttm",
    "write_rttm",
    "parse_json",
    "emit_json",
    "make_disjoint",
    "seconds_to_ticks",
    "ticks_to_seconds",
    "JSON_SCHEMA_VERSION",
]

JSON_SCHEMA_VERSION = 1
_NA = "<NA>"
_MS = Decimal(1000)


class RttmParseError(ValueError):
    """Malformed RTTM (or JSON) input.  ``lineno`` is 1-based when known."""

    def __init__(self, message: str, lineno: Optional[int] = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class RttmRecord:
    record_type: str
    file_id: str
    channel: str
    onset: Decimal
    duration: Decimal
    speaker_name: str
    ortho: str = _NA
    stype: str = _NA
    conf: str = _NA
    slat: str = _NA

    @property
    def begin_tick(self) -> int:
        return seconds_to_ticks(self.onset)

    @property
    def end_tick(self) -> int:
        return seconds_to_ticks(self.onset + self.duration)


def seconds_to_ticks(seconds: Union[Decimal, str, float]) -> int:
    if not isinstance(seconds, Decimal):
        # str() keeps the shortest repr of floats, so 0.1 stays 0.1
        seconds = Decimal(str(seconds))
    return int((seconds * _MS).to_integral_value(rounding=ROUND_HALF_EVEN))


def ticks_to_seconds(ticks: int) -> str:
    """Three-decimal seconds string for a tick count."""
    sign = "-" if ticks < 0 else ""
    ticks = abs(int(ticks))
    return f"{sign}{ticks // 1000}.{ticks % 1000:03d}"


def _decimal(field: str, what: str, lineno: int) -> Decimal:
    try:
        value = Decimal(field)
    except InvalidOperation:
        raise RttmParseError(f"non-numeric {what} {field!r}", lineno) from None
    if not value.is_finite():
        raise RttmParseError(f"non-finite {what} {field!r}", lineno)
    return value


def parse_rttm(text: Union[str, TextIO, Iterable[str]], file_id_filter: Optional[str] = None) -> list[RttmRecord]:
    """Read SPEAKER records from RTTM text.

    Other record types and blank or ``;;`` comment lines are skipped.  When
    ``file_id_filter`` is given only records for that file are returned.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    records = []
    for lineno, line in enumerate(lines, start=1):
        fields = line.split()
        if not fields or fields[0].startswith(";;"):
            continue
        if fields[0] != "SPEAKER":
            continue
        if len(fields) < 9:
            raise RttmParseError(f"SPEAKER line has {len(fields)} fields, expected at least 9", lineno)
        onset = _decimal(fields[3], "onset", lineno)
        duration = _decimal(fields[4], "duration", lineno)
        if duration <= 0:
            raise RttmParseError(f"duration must be positive, got {fields[4]}", lineno)
        if onset < 0:
            raise RttmParseError(f"onset must be non-negative, got {fields[3]}", lineno)
        if file_id_filter is not None and fields[1] != file_id_filter:
            continue
        extra = (fields[8:10] + [_NA, _NA])[:2]
        records.append(
            RttmRecord(
                record_type=fields[0],
                file_id=fields[1],
                channel=fields[2],
                onset=onset,
                duration=duration,
                ortho=fields[5],
                stype=fields[6],
                speaker_name=fields[7],
                conf=extra[0],
                slat=extra[1],
            )
        )
    return records


def records_to_diarization(records: Sequence[RttmRecord], source_id: str = "") -> Diarization:
    """Turn parsed records into a validated diarization.

    All records must belong to one file id; pass ``file_id_filter`` to
    :func:`parse_rttm` to select one out of a multi-file RTTM.
    """
    file_ids = sorted({r.file_id for r in records})
    if len(file_ids) > 1:
        raise RttmParseError(
            f"RTTM holds several file ids ({', '.join(file_ids)}); select one with a file id filter"
        )
    turns = []
    for r in records:
        begin, end = r.begin_tick, r.end_tick
        if end <= begin:
            raise RttmParseError(f"segment of {r.speaker_name} at {r.onset} rounds to zero length")
        turns.append(Turn(r.speaker_name, begin, end))
    return validate(turns, source_id)


def emit_rttm(diarization: Diarization, file_id: str = "rec", channel: str = "1") -> str:
    lines = []
    for t in sorted(diarization.turns, key=lambda t: t.begin):
        lines.append(
            f"SPEAKER {file_id} {channel} {ticks_to_seconds(t.begin)} {ticks_to_seconds(t.duration)} "
            f"{_NA} {_NA} {t.label} {_NA} {_NA}"
        )
    return "".join(line + "\n" for line in lines)


def load_rttm(path: Union[str, Path], file_id: Optional[str] = None, source_id: Optional[str] = None) -> Diarization:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        records = parse_rttm(f, file_id)
    return records_to_diarization(records, source_id if source_id is not None else str(path))


def write_rttm(diarization: Diarization, path: Union[str, Path], file_id: str = "rec", channel: str = "1") -> None:
    Path(path).write_text(emit_rttm(diarization, file_id, channel), encoding="utf-8")


def emit_json(diarization: Diarization, file_id: str = "rec") -> str:
    payload = {
        "schema_version": JSON_SCHEMA_VERSION,
        "file_id": file_id,
        "turns": [
            {"speaker": t.label, "onset": t.begin / 1000, "duration": t.duration / 1000}
            for t in diarization.turns
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


def parse_json(text: str, source_id: str = "") -> Diarization:
    """Inverse of :func:`emit_json`."""
    try:
        payload = json.loads(text)
        turns = []
        for item in payload["turns"]:
            onset = Decimal(str(item["onset"]))
            duration = Decimal(str(item["duration"]))
            if duration <= 0 or onset < 0:
                raise RttmParseError(f"bad segment {item!r}")
            turns.append(Turn(str(item["speaker"]), seconds_to_ticks(onset), seconds_to_ticks(onset + duration)))
    except (KeyError, TypeError, ValueError, InvalidOperation) as exc:
        if isinstance(exc, RttmParseError):
            raise
        raise RttmParseError(f"malformed diarization JSON: {exc}") from None
    return validate(turns, source_id)


def make_disjoint(inputs: Sequence[Diarization]) -> list[Diarization]:
    """Prefix every label with its input index (``S0:spkA``) so label sets never collide."""
    out = []
    for i, d in enumerate(inputs):
        out.append(d.relabel({lab: f"S{i}:{lab}" for lab in d.labels}))
    return out
