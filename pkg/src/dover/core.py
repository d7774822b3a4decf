"""Weighted voting over diarization hypotheses (DOVER).

The pipeline is: rank the inputs so the centroid hypothesis comes first,
derive slowly decaying rank weights, map every hypothesis incrementally into
the label space of the ones before it, then vote region by region.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .rttm_io import make_disjoint
from .scoring import optimal_mapping, pairwise_der_matrix
from .timeline import Diarization, Turn, build_regions, validate

__all__ = [
    "RANK_DECAY_EXPONENT",
    "TIE_POLICIES",
    "MapEntry",
    "DoverResult",
    "rank_inputs",
    "rank_weights",
    "incremental_map",
    "prune_mapping",
    "vote",
    "break_tie",
    "dover",
    "dover_combine",
    "multi_anchor_combine",
]

RANK_DECAY_EXPONENT = 0.1
TIE_POLICIES = ("first", "lex", "random")

Anchor = Union[str, int]


def rank_inputs(inputs: Sequence[Diarization], collar: int = 0) -> list[int]:
    """Input indices ordered by ascending mean DER against all other inputs.

    Each row of the pairwise matrix scores input ``i`` as hypothesis against
    every other input as reference.  Ties keep the original order.
    """
    n = len(inputs)
    if n == 0:
        raise ValueError("need at least one input")
    if n == 1:
        return [0]
    der = pairwise_der_matrix(inputs, collar)
    mean = der.sum(axis=1) / (n - 1)
    return sorted(range(n), key=lambda i: (mean[i], i))


def rank_weights(n: int, external: Optional[Sequence[float]] = None) -> list[float]:
    """Weight ``external[i] * (i + 1) ** -0.1`` for the input at 0-based rank ``i``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if external is None:
        external = [1.0] * n
    if len(external) != n:
        raise ValueError(f"expected {n} external weights, got {len(external)}")
    if any(w < 0 for w in external):
        raise ValueError("external weights must be non-negative")
    return [float(w) * (i + 1) ** -RANK_DECAY_EXPONENT for i, w in enumerate(external)]


@dataclass(frozen=True)
class MapEntry:
    """One candidate relabeling ``source -> target`` found against prior input ``via``."""

    source: str
    target: str
    shared: int
    via: int


def prune_mapping(entries: Sequence[MapEntry]) -> dict[str, str]:
    """Resolve conflicts in the union of pairwise mappings.

    Every target keeps only the source sharing the longest duration with it,
    then every source keeps only its longest target.  Exact duration ties go
    to the entry found against the earlier (better ranked) input, then to the
    lexicographically smaller label.
    """
    # the same pair may be found against several prior inputs; the longest one
    # decides whether it survives
    best_pair: dict[tuple[str, str], MapEntry] = {}
    for e in entries:
        key = (e.source, e.target)
        cur = best_pair.get(key)
        if cur is None or (e.shared, -e.via) > (cur.shared, -cur.via):
            best_pair[key] = e

    by_target: dict[str, MapEntry] = {}
    for e in sorted(best_pair.values(), key=lambda e: (-e.shared, e.via, e.source, e.target)):
        by_target.setdefault(e.target, e)
    by_source: dict[str, MapEntry] = {}
    for e in sorted(by_target.values(), key=lambda e: (-e.shared, e.via, e.target, e.source)):
        by_source.setdefault(e.source, e)
    return {e.source: e.target for e in by_source.values()}


def incremental_map(ranked: Sequence[Diarization]) -> list[Diarization]:
    """Relabel every hypothesis into the label space of the ones ranked before it.

    Input ``i`` is mapped against each already relabeled input ``k < i``; the
    union of these mappings is pruned by :func:`prune_mapping`.  Labels that
    find no partner keep their own (globally unique) name.
    """
    seen: set[str] = set()
    for d in ranked:
        labels = set(d.labels)
        if labels & seen:
            raise ValueError("input label sets must be disjoint; see rttm_io.make_disjoint")
        seen |= labels

    mapped: list[Diarization] = []
    for i, d in enumerate(ranked):
        if i == 0:
            mapped.append(d)
            continue
        entries = []
        for k, prior in enumerate(mapped):
            for e in optimal_mapping(d, prior):
                entries.append(MapEntry(e.source, e.target, e.shared, k))
        mapped.append(d.relabel(prune_mapping(entries)))
    return mapped


def break_tie(
    tallies: dict[str, Fraction],
    ranked_labels_present: Sequence[str],
    policy: str = "first",
    rng: Optional[random.Random] = None,
) -> str:
    """Pick the winner among the labels sharing the top tally.

    ``first`` prefers the label voted by the best ranked input in the region
    (``ranked_labels_present`` lists the region's labels in input rank order),
    ``lex`` the smallest label, ``random`` a uniform draw from ``rng``.
    """
    top = max(tallies.values())
    tied = sorted(lab for lab, v in tallies.items() if v == top)
    if len(tied) == 1:
        return tied[0]
    if policy == "first":
        for lab in ranked_labels_present:
            if lab in tied:
                return lab
        return tied[0]
    if policy == "lex":
        return tied[0]
    if policy == "random":
        if rng is None:
            raise ValueError("random tie policy needs an rng")
        return tied[rng.randrange(len(tied))]
    raise ValueError(f"unknown tie policy {policy!r}")


def vote(
    mapped: Sequence[Diarization],
    weights: Sequence[float],
    tie_policy: str = "first",
    seed: int = 0,
) -> Diarization:
    """Weighted per-region vote over hypotheses that share one label space.

    A region is labeled when the summed weight of inputs speaking there is at
    least half the total weight; the label is the one with the highest tally.
    Tallies are summed as exact rationals of the float weights, so the
    threshold and argmax comparisons carry no rounding error.
    """
    if len(mapped) != len(weights):
        raise ValueError("one weight per input required")
    if tie_policy not in TIE_POLICIES:
        raise ValueError(f"unknown tie policy {tie_policy!r}")
    exact = [Fraction(w) for w in weights]
    if any(w < 0 for w in exact):
        raise ValueError("weights must be non-negative")
    total = sum(exact)
    if total == 0:
        raise ValueError("total weight is zero")
    half = total / 2
    rng = random.Random(seed)

    part = build_regions(mapped)
    turns = []
    for r, (begin, end) in enumerate(part.regions):
        tallies: dict[str, Fraction] = {}
        present = []
        for i, labels in enumerate(part.labels):
            lab = labels[r]
            if lab is None:
                continue
            tallies[lab] = tallies.get(lab, 0) + exact[i]
            present.append(lab)
        if not tallies or sum(tallies.values()) < half:
            continue
        turns.append(Turn(break_tie(tallies, present, tie_policy, rng), begin, end))
    return validate(turns, "dover")


@dataclass
class DoverResult:
    """Consensus plus the anchor order and rank weights that produced it.

    For ``anchor="all"`` only ``consensus`` is meaningful.
    """

    consensus: Diarization
    order: list[int]
    weights: list[float]
    mapped: list[Diarization] = field(default_factory=list)


def _labels_disjoint(inputs: Sequence[Diarization]) -> bool:
    seen: set[str] = set()
    for d in inputs:
        labels = set(d.labels)
        if labels & seen:
            return False
        seen |= labels
    return True


def dover(
    inputs: Sequence[Diarization],
    external_weights: Optional[Sequence[float]] = None,
    anchor: Anchor = "rank",
    tie_policy: str = "first",
    seed: int = 0,
    collar_for_ranking: int = 0,
) -> DoverResult:
    """Run the full combination and keep the intermediate ordering and weights.

    ``anchor`` is ``"rank"`` (centroid first), ``"given_order"``, an input
    index ``k`` (rotate input ``k`` to the front, then as given order) or
    ``"all"`` (see :func:`multi_anchor_combine`).  ``external_weights`` are
    aligned with ``inputs`` and multiplied into the rank weights.  Colliding
    label names are made disjoint by prefixing the input index.
    """
    n = len(inputs)
    if n == 0:
        raise ValueError("need at least one input")
    if external_weights is not None and len(external_weights) != n:
        raise ValueError(f"expected {n} external weights, got {len(external_weights)}")
    if anchor == "all":
        consensus = multi_anchor_combine(inputs, external_weights, tie_policy, seed, collar_for_ranking)
        return DoverResult(consensus, list(range(n)), [])
    if not _labels_disjoint(inputs):
        inputs = make_disjoint(inputs)

    if anchor == "rank":
        order = rank_inputs(inputs, collar_for_ranking)
    elif anchor == "given_order":
        order = list(range(n))
    elif isinstance(anchor, (int, np.integer)) and not isinstance(anchor, bool):
        k = int(anchor)
        if not 0 <= k < n:
            raise ValueError(f"anchor index {k} out of range for {n} inputs")
        order = [(k + j) % n for j in range(n)]
    else:
        raise ValueError(f"unknown anchor {anchor!r}")

    ranked = [inputs[i] for i in order]
    external = None if external_weights is None else [external_weights[i] for i in order]
    weights = rank_weights(n, external)
    mapped = incremental_map(ranked)
    consensus = vote(mapped, weights, tie_policy, seed)
    return DoverResult(consensus, order, weights, mapped)


def dover_combine(
    inputs: Sequence[Diarization],
    external_weights: Optional[Sequence[float]] = None,
    anchor: Anchor = "rank",
    tie_policy: str = "first",
    seed: int = 0,
    collar_for_ranking: int = 0,
) -> Diarization:
    """Consensus diarization of ``inputs``; see :func:`dover` for the arguments."""
    return dover(inputs, external_weights, anchor, tie_policy, seed, collar_for_ranking).consensus


def multi_anchor_combine(
    inputs: Sequence[Diarization],
    external_weights: Optional[Sequence[float]] = None,
    tie_policy: str = "first",
    seed: int = 0,
    collar_for_ranking: int = 0,
) -> Diarization:
    """Combine once per choice of anchor, then combine those N outputs again.

    The second pass gives every first-pass output the same external weight
    and anchors on the centroid.  Costs N + 1 combination passes.
    """
    n = len(inputs)
    if n == 0:
        raise ValueError("need at least one input")
    if n == 1:
        return dover_combine(inputs, external_weights, "given_order", tie_policy, seed)
    outputs = [
        dover_combine(inputs, external_weights, k, tie_policy, seed, collar_for_ranking) for k in range(n)
    ]
    outputs = make_disjoint(outputs)
    # an empty first-pass output cannot serve as a DER reference, so ranking is skipped
    second = "rank" if all(d.speech_duration > 0 for d in outputs) else "given_order"
    return dover_combine(outputs, None, second, tie_policy, seed, collar_for_ranking)
