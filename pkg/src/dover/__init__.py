"""Weighted voting combination of speaker diarization hypotheses (DOVER).

Typical use::

    from dover import load_rttm, dover_combine, score

    inputs = make_disjoint([load_rttm(p) for p in paths])
    consensus = dover_combine(inputs)
"""

__version__ = "0.1.0"

from .core import (
    DoverResult,
    break_tie,
    dover,
    dover_combine,
    incremental_map,
    multi_anchor_combine,
    rank_inputs,
    rank_weights,
    vote,
)
from .rttm_io import (
    RttmParseError,
    RttmRecord,
    emit_json,
    emit_rttm,
    load_rttm,
    make_disjoint,
    parse_json,
    parse_rttm,
    records_to_diarization,
    write_rttm,
)
from .scoring import LabelMapping, ScoreReport, UndefinedRateError, optimal_mapping, pairwise_der_matrix, score
from .timeline import Diarization, RegionPartition, Turn, ValidationError, build_regions, overlap_matrix, validate
