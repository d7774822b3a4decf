import itertools

import numpy as np
import pytest

from dover.scoring import (
    LabelMapping,
    MappingEntry,
    UndefinedRateError,
    assign_max_overlap,
    optimal_mapping,
    pairwise_der_matrix,
    score,
)
from dover.timeline import Turn, validate

from helpers import brute_force_score, random_diarization


def D(*turns):
    return validate([Turn(lab, b, e) for lab, b, e in turns])


def test_mapping_example_beats_alternative():
    hyp = D(("X", 0, 4000), ("Y", 4000, 10000))
    ref = D(("P", 0, 5000), ("Q", 5000, 10000))
    m = optimal_mapping(hyp, ref)
    assert m.entries == (MappingEntry("X", "P", 4000), MappingEntry("Y", "Q", 5000))
    assert m.total_shared == 9000


def test_mapping_renaming_is_bijection():
    ref = D(("P", 0, 3), ("Q", 3, 7), ("R", 9, 12))
    hyp = ref.relabel({"P": "x", "Q": "y", "R": "z"})
    assert optimal_mapping(hyp, ref).as_dict() == {"x": "P", "y": "Q", "z": "R"}
    assert optimal_mapping(hyp, ref).total_shared == ref.speech_duration


def test_mapping_pigeonhole():
    hyp = D(("a", 0, 3), ("b", 3, 6), ("c", 6, 9))
    ref = D(("P", 0, 4), ("Q", 4, 9))
    assert len(optimal_mapping(hyp, ref)) == 2


def test_mapping_injective_check():
    with pytest.raises(ValueError):
        LabelMapping((MappingEntry("a", "P", 1), MappingEntry("b", "P", 1)))


def test_tie_break_lexicographic():
    # both diagonal and anti-diagonal assignments share 2 ticks each
    m = np.array([[1, 1], [1, 1]])
    # row "a" is index 1 and its smallest target "P" is column 1
    assert assign_max_overlap(m, ["b", "a"], ["Q", "P"]) == [(1, 1), (0, 0)]


def test_miss_only_case():
    r = score(D(("P", 0, 8000)), D(("P", 0, 10000)))
    assert (r.miss, r.false_alarm, r.speaker_error, r.ref_speech_total) == (2000, 0, 0, 10000)
    assert r.der == 0.2


def test_split_speaker_case():
    r = score(D(("X", 0, 5000), ("Y", 5000, 10000)), D(("P", 0, 10000)))
    assert r.mapping.total_shared == 5000
    assert (r.miss, r.false_alarm, r.speaker_error) == (0, 0, 5000)
    assert r.der == 0.5


def test_collar_reduces_miss_only_case():
    # collar 250 ms excludes [0,250) and [9750,10000) of the reference
    r = score(D(("P", 0, 8000)), D(("P", 0, 10000)), collar=250)
    assert (r.miss, r.ref_speech_total) == (1750, 9500)
    assert r.der < 0.2


def test_false_alarm():
    r = score(D(("P", 0, 12000)), D(("P", 0, 10000)))
    assert r.false_alarm == 2000 and r.der == 0.2


def test_empty_reference_raises():
    with pytest.raises(UndefinedRateError):
        score(D(("P", 0, 10)), validate([]))


def test_identity_zero():
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = random_diarization(rng, 4, 500)
        if d.speech_duration:
            assert score(d, d).der == 0.0


def test_against_tick_oracle():
    rng = np.random.default_rng(11)
    for _ in range(150):
        hyp = random_diarization(rng, int(rng.integers(1, 5)), 150, "h")
        ref = random_diarization(rng, int(rng.integers(1, 5)), 150, "r")
        if not ref.speech_duration:
            continue
        r = score(hyp, ref)
        assert (r.miss, r.false_alarm, r.speaker_error, r.ref_speech_total) == brute_force_score(hyp, ref)


def test_relabel_invariance():
    rng = np.random.default_rng(5)
    for _ in range(50):
        hyp = random_diarization(rng, 4, 300, "h")
        ref = random_diarization(rng, 4, 300, "r")
        if not ref.speech_duration:
            continue
        base = score(hyp, ref).der
        h2 = hyp.relabel({lab: f"z{k}" for k, lab in enumerate(reversed(hyp.labels))})
        r2 = ref.relabel({lab: f"q{k}" for k, lab in enumerate(reversed(ref.labels))})
        assert score(h2, ref).der == base
        assert score(hyp, r2).der == base


def test_sanity_bound():
    rng = np.random.default_rng(9)
    for _ in range(50):
        hyp = random_diarization(rng, 3, 300, "h")
        ref = random_diarization(rng, 3, 300, "r")
        if not ref.speech_duration:
            continue
        r = score(hyp, ref)
        assert min(r.miss, r.false_alarm, r.speaker_error) >= 0
        assert r.miss + r.false_alarm + r.speaker_error <= r.ref_speech_total + hyp.speech_duration


def test_pairwise_matrix_cells():
    rng = np.random.default_rng(2)
    inputs = [random_diarization(rng, 3, 400, f"s{i}", min_len=5) for i in range(3)]
    m = pairwise_der_matrix(inputs)
    assert np.all(np.diag(m) == 0)
    for i, j in itertools.permutations(range(3), 2):
        assert m[i, j] == score(inputs[i], inputs[j]).der
    same = pairwise_der_matrix([inputs[0], inputs[0]])
    assert not same.any()


def test_pairwise_needs_two():
    with pytest.raises(ValueError):
        pairwise_der_matrix([D(("a", 0, 1))])
