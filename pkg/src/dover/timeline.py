"""Exact interval algebra over speaker timelines.

All times are integer ticks (milliseconds) and every interval is half-open,
``[begin, end)``.  A :class:`Diarization` is a single-speaker stream: turns
are sorted and never overlap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "Turn",
    "Diarization",
    "RegionPartition",
    "OverlapTable",
    "ValidationError",
    "validate",
    "build_regions",
    "overlap_matrix",
    "label_track",
]

NONSPEECH = -1


class ValidationError(ValueError):
    """Raised when a set of turns does not form a valid single-speaker timeline."""


@dataclass(frozen=True)
class Turn:
    label: str
    begin: int
    end: int

    def __post_init__(self):
        if self.begin >= self.end:
            raise ValidationError(
                f"turn {self.label!r} has non-positive length [{self.begin}, {self.end})"
            )

    @property
    def duration(self) -> int:
        return self.end - self.begin


@dataclass(frozen=True)
class Diarization:
    """A validated, time-sorted, non-overlapping sequence of turns.

    Build instances with :func:`validate`; the constructor trusts its input.
    """

    turns: tuple[Turn, ...] = ()
    source_id: str = ""

    def __len__(self) -> int:
        return len(self.turns)

    def __iter__(self):
        return iter(self.turns)

    @property
    def labels(self) -> list[str]:
        """Distinct labels in order of first appearance."""
        return list(dict.fromkeys(t.label for t in self.turns))

    @property
    def speech_duration(self) -> int:
        return sum(t.duration for t in self.turns)

    @property
    def end(self) -> int:
        return self.turns[-1].end if self.turns else 0

    def boundaries(self) -> set[int]:
        out = set()
        for t in self.turns:
            out.add(t.begin)
            out.add(t.end)
        return out

    def relabel(self, mapping: dict[str, str], source_id: Optional[str] = None) -> "Diarization":
        """Rename labels through ``mapping``; labels absent from it are kept."""
        turns = [Turn(mapping.get(t.label, t.label), t.begin, t.end) for t in self.turns]
        return validate(turns, self.source_id if source_id is None else source_id)

    def label_at(self, tick: int) -> Optional[str]:
        # linear scan is fine for tests; hot paths use label_track
        for t in self.turns:
            if t.begin <= tick < t.end:
                return t.label
        return None


def validate(turns: Iterable[Turn], source_id: str = "") -> Diarization:
    """Canonicalize ``turns`` into a :class:`Diarization`.

    Turns are sorted by begin time and touching turns with the same label are
    merged.  Overlapping turns raise :class:`ValidationError` naming the first
    offending pair.
    """
    ordered = sorted(turns, key=lambda t: (t.begin, t.end, t.label))
    merged: list[Turn] = []
    for t in ordered:
        if t.begin >= t.end:
            raise ValidationError(f"zero-length turn {t!r}")
        if merged:
            prev = merged[-1]
            if t.begin < prev.end:
                raise ValidationError(
                    f"overlapping turns in {source_id or 'input'}: "
                    f"{prev.label}[{prev.begin},{prev.end}) and {t.label}[{t.begin},{t.end}) "
                    f"overlap at [{t.begin},{min(prev.end, t.end)})"
                )
            if t.begin == prev.end and t.label == prev.label:
                merged[-1] = Turn(prev.label, prev.begin, t.end)
                continue
        merged.append(t)
    return Diarization(tuple(merged), source_id)


def label_track(diarization: Diarization, boundaries: np.ndarray, codes: dict[str, int]) -> np.ndarray:
    """Per-region label codes of ``diarization`` on the elementary regions of ``boundaries``.

    ``boundaries`` must contain every begin/end tick of the diarization.
    Nonspeech regions get ``-1``.
    """
    track = np.full(max(len(boundaries) - 1, 0), NONSPEECH, dtype=np.int64)
    if not diarization.turns:
        return track
    begins = np.fromiter((t.begin for t in diarization.turns), dtype=np.int64)
    ends = np.fromiter((t.end for t in diarization.turns), dtype=np.int64)
    i0 = np.searchsorted(boundaries, begins)
    i1 = np.searchsorted(boundaries, ends)
    for a, b, t in zip(i0, i1, diarization.turns):
        track[a:b] = codes[t.label]
    return track


@dataclass
class RegionPartition:
    """Maximal segmentation induced by the union of all input boundaries.

    ``labels[i][r]`` is the label of input ``i`` on region ``r`` (``None`` for
    nonspeech).
    """

    boundaries: np.ndarray
    labels: list[list[Optional[str]]] = field(default_factory=list)

    @property
    def regions(self) -> list[tuple[int, int]]:
        b = self.boundaries.tolist()
        return list(zip(b[:-1], b[1:]))

    @property
    def durations(self) -> np.ndarray:
        return np.diff(self.boundaries)

    def __len__(self) -> int:
        return max(len(self.boundaries) - 1, 0)


def build_regions(inputs: Sequence[Diarization]) -> RegionPartition:
    if len(inputs) == 0:
        raise ValueError("build_regions needs at least one input")
    points: set[int] = set()
    for d in inputs:
        points |= d.boundaries()
    boundaries = np.array(sorted(points), dtype=np.int64)
    labels = []
    for d in inputs:
        names = d.labels
        codes = {name: k for k, name in enumerate(names)}
        track = label_track(d, boundaries, codes)
        labels.append([names[c] if c >= 0 else None for c in track.tolist()])
    return RegionPartition(boundaries, labels)


@dataclass
class OverlapTable:
    """Co-occurrence durations between the labels of two diarizations.

    ``matrix[x, y]`` is the number of ticks where ``a`` says ``a_labels[x]``
    and ``b`` says ``b_labels[y]``.  ``a_only[x]`` counts ticks where ``a``
    says ``a_labels[x]`` while ``b`` is silent; ``b_only`` likewise.
    """

    a_labels: list[str]
    b_labels: list[str]
    matrix: np.ndarray
    a_only: np.ndarray
    b_only: np.ndarray

    @property
    def a_speech(self) -> np.ndarray:
        return self.matrix.sum(axis=1) + self.a_only

    @property
    def b_speech(self) -> np.ndarray:
        return self.matrix.sum(axis=0) + self.b_only

    def as_dict(self) -> dict[tuple[str, str], int]:
        """Nonzero entries keyed by ``(a_label, b_label)``."""
        out = {}
        for x, y in zip(*np.nonzero(self.matrix)):
            out[(self.a_labels[x], self.b_labels[y])] = int(self.matrix[x, y])
        return out

    def transpose(self) -> "OverlapTable":
        return OverlapTable(self.b_labels, self.a_labels, self.matrix.T.copy(), self.b_only, self.a_only)


def overlap_matrix(a: Diarization, b: Diarization, exclude: Optional[Diarization] = None) -> OverlapTable:
    """Pairwise label-overlap durations between ``a`` and ``b``.

    Ticks covered by ``exclude`` (any label) are left out of every tally; the
    scorer uses this for collars.
    """
    inputs = [a, b] if exclude is None else [a, b, exclude]
    points: set[int] = set()
    for d in inputs:
        points |= d.boundaries()
    boundaries = np.array(sorted(points), dtype=np.int64)
    a_labels, b_labels = a.labels, b.labels
    ta = label_track(a, boundaries, {n: k for k, n in enumerate(a_labels)})
    tb = label_track(b, boundaries, {n: k for k, n in enumerate(b_labels)})
    dur = np.diff(boundaries)
    if exclude is not None:
        keep = label_track(exclude, boundaries, {n: 0 for n in exclude.labels}) < 0
        dur = dur * keep

    na, nb = len(a_labels), len(b_labels)
    both = (ta >= 0) & (tb >= 0)
    matrix = np.zeros((na, nb), dtype=np.int64)
    np.add.at(matrix, (ta[both], tb[both]), dur[both])
    a_only = np.bincount(ta[(ta >= 0) & (tb < 0)], weights=dur[(ta >= 0) & (tb < 0)], minlength=na)
    b_only = np.bincount(tb[(tb >= 0) & (ta < 0)], weights=dur[(tb >= 0) & (ta < 0)], minlength=nb)
    return OverlapTable(a_labels, b_labels, matrix, a_only.astype(np.int64), b_only.astype(np.int64))
