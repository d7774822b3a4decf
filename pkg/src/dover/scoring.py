"""Diarization error rate with an optimal one-to-one speaker mapping.

The mapping maximizes total co-occurring speech between hypothesis and
reference labels, which for fixed segmentations is the same as minimizing
DER.  Ties between equally good assignments are resolved toward the
lexicographically smallest list of ``(source, target)`` pairs so results are
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .timeline import Diarization, OverlapTable, Turn, overlap_matrix, validate

__all__ = [
    "MappingEntry",
    "LabelMapping",
    "ScoreReport",
    "UndefinedRateError",
    "assign_max_overlap",
    "optimal_mapping",
    "score",
    "pairwise_der_matrix",
    "collar_mask",
]


class UndefinedRateError(ZeroDivisionError):
    """The reference has no scored speech, so DER is undefined."""


@dataclass(frozen=True)
class MappingEntry:
    source: str
    target: str
    shared: int


@dataclass(frozen=True)
class LabelMapping:
    entries: tuple[MappingEntry, ...] = ()

    def __post_init__(self):
        sources = [e.source for e in self.entries]
        targets = [e.target for e in self.entries]
        if len(set(sources)) != len(sources) or len(set(targets)) != len(targets):
            raise ValueError("label mapping must be injective in both directions")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def as_dict(self) -> dict[str, str]:
        return {e.source: e.target for e in self.entries}

    @property
    def total_shared(self) -> int:
        return sum(e.shared for e in self.entries)


@dataclass
class ScoreReport:
    miss: int
    false_alarm: int
    speaker_error: int
    ref_speech_total: int
    mapping: LabelMapping = field(default_factory=LabelMapping)

    @property
    def der(self) -> float:
        return (self.miss + self.false_alarm + self.speaker_error) / self.ref_speech_total

    @property
    def spkerr_rate(self) -> float:
        return self.speaker_error / self.ref_speech_total

    def as_json_dict(self) -> dict:
        return {
            "miss_s": self.miss / 1000,
            "fa_s": self.false_alarm / 1000,
            "spkerr_s": self.speaker_error / 1000,
            "ref_speech_s": self.ref_speech_total / 1000,
            "der": self.der,
            "spkerr_rate": self.spkerr_rate,
        }


def _best_total(matrix: np.ndarray) -> int:
    if matrix.size == 0:
        return 0
    rows, cols = linear_sum_assignment(matrix, maximize=True)
    return int(matrix[rows, cols].sum())


def assign_max_overlap(matrix: np.ndarray, row_keys: Sequence[str], col_keys: Sequence[str]) -> list[tuple[int, int]]:
    """Maximum-weight one-to-one assignment of rows to columns.

    Only positive entries may be paired.  Among all optimal assignments the
    one whose sorted ``(row_key, col_key)`` pair list is lexicographically
    smallest is returned, built greedily by fixing one pair at a time and
    checking with a fresh assignment solve that the optimum is still reachable.
    """
    matrix = np.asarray(matrix, dtype=np.int64)
    best = _best_total(matrix)
    if best == 0:
        return []
    rows = sorted(range(matrix.shape[0]), key=lambda r: row_keys[r])
    free_rows = set(range(matrix.shape[0]))
    free_cols = set(range(matrix.shape[1]))
    chosen = []
    fixed = 0
    for r in rows:
        free_rows.discard(r)
        candidates = sorted((c for c in free_cols if matrix[r, c] > 0), key=lambda c: col_keys[c])
        for c in candidates:
            rest_rows = sorted(free_rows)
            rest_cols = sorted(free_cols - {c})
            rest = _best_total(matrix[np.ix_(rest_rows, rest_cols)])
            if fixed + matrix[r, c] + rest == best:
                chosen.append((r, c))
                fixed += int(matrix[r, c])
                free_cols.discard(c)
                break
        if fixed == best:
            break
    return chosen


def _mapping_from_table(table: OverlapTable) -> LabelMapping:
    pairs = assign_max_overlap(table.matrix, table.a_labels, table.b_labels)
    entries = [MappingEntry(table.a_labels[r], table.b_labels[c], int(table.matrix[r, c])) for r, c in pairs]
    return LabelMapping(tuple(sorted(entries, key=lambda e: (e.source, e.target))))


def optimal_mapping(hyp: Diarization, ref: Diarization) -> LabelMapping:
    """Injective hyp-to-ref label mapping with maximal shared speech time."""
    return _mapping_from_table(overlap_matrix(hyp, ref))


def collar_mask(ref: Diarization, collar: int) -> Optional[Diarization]:
    """Regions within ``collar`` ticks of any reference boundary, as a diarization."""
    if collar <= 0:
        return None
    spans = sorted((max(0, b - collar), b + collar) for b in ref.boundaries())
    merged: list[list[int]] = []
    for lo, hi in spans:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return validate([Turn("collar", lo, hi) for lo, hi in merged if hi > lo])


def score(hyp: Diarization, ref: Diarization, collar: int = 0) -> ScoreReport:
    """Score ``hyp`` against ``ref``.

    Parameters
    ----------
    hyp, ref : Diarization
        Single-speaker timelines in ticks.
    collar : int
        Ticks excluded on each side of every reference turn boundary.  Zero
        scores every tick.

    Returns
    -------
    ScoreReport
        Miss, false alarm and speaker error in ticks under the optimal mapping.

    Raises
    ------
    UndefinedRateError
        If the reference has no scored speech.
    """
    if collar < 0:
        raise ValueError("collar must be non-negative")
    table = overlap_matrix(hyp, ref, exclude=collar_mask(ref, collar))
    ref_total = int(table.b_speech.sum())
    if ref_total == 0:
        raise UndefinedRateError("reference contains no scored speech")
    mapping = _mapping_from_table(table)
    both = int(table.matrix.sum())
    return ScoreReport(
        miss=int(table.b_only.sum()),
        false_alarm=int(table.a_only.sum()),
        speaker_error=both - mapping.total_shared,
        ref_speech_total=ref_total,
        mapping=mapping,
    )


def pairwise_der_matrix(inputs: Sequence[Diarization], collar: int = 0) -> np.ndarray:
    """``out[i, j]`` is the DER of ``inputs[i]`` scored against ``inputs[j]``."""
    n = len(inputs)
    if n < 2:
        raise ValueError("pairwise_der_matrix needs at least two inputs")
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                out[i, j] = score(inputs[i], inputs[j], collar).der
    return out
