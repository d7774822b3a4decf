import json

import pytest

from dover.rttm_io import load_rttm
from dover.scoring import score
from dover.synth import SynthParams, gen_reference, perturb, run_experiment
from dover.timeline import validate

QUIET = dict(boundary_jitter_sigma=0, relabel_prob=0, split_merge_prob=0)


def test_params_validation():
    with pytest.raises(ValueError):
        SynthParams(pause_prob=1.5)
    with pytest.raises(ValueError):
        SynthParams(num_speakers=0)
    with pytest.raises(ValueError):
        SynthParams(total_duration=0)


def test_single_speaker_covers_everything():
    d = gen_reference(SynthParams(num_speakers=1, pause_prob=0, total_duration=30_000))
    assert [(t.label, t.begin, t.end) for t in d] == [("spk0", 0, 30_000)]


def test_reference_deterministic_and_complete():
    p = SynthParams(num_speakers=4, total_duration=600_000, seed=3)
    a, b = gen_reference(p), gen_reference(p)
    assert a == b
    assert sorted(a.labels) == ["spk0", "spk1", "spk2", "spk3"]
    assert a.speech_duration <= 600_000
    assert a.end <= 600_000
    assert gen_reference(p, trial=1) != a


def test_quiet_perturbation_is_renaming():
    p = SynthParams(total_duration=120_000, **QUIET)
    ref = gen_reference(p)
    hyp = perturb(ref, p, 4)
    assert score(hyp, ref).der == 0
    assert not set(hyp.labels) & set(ref.labels)
    assert all(lab.startswith("ch4_") for lab in hyp.labels)


def test_full_relabel_two_speakers_is_a_swap():
    # flipping every turn between two speakers is a bijection, which the
    # optimal mapping undoes completely
    p = SynthParams(num_speakers=2, total_duration=120_000, boundary_jitter_sigma=0, relabel_prob=1.0, split_merge_prob=0)
    ref = gen_reference(p)
    hyp = perturb(ref, p, 0)
    image = {}
    for r, h in zip(ref, hyp):
        assert (r.begin, r.end) == (h.begin, h.end)
        assert image.setdefault(r.label, h.label) == h.label
    assert len(set(image.values())) == 2
    assert score(hyp, ref).der == 0


def test_full_relabel_many_speakers_hurts():
    p = SynthParams(num_speakers=4, total_duration=120_000, boundary_jitter_sigma=0, relabel_prob=1.0, split_merge_prob=0)
    ref = gen_reference(p)
    assert score(perturb(ref, p, 0), ref).spkerr_rate > 0.3


def test_jitter_always_hurts():
    p = SynthParams(total_duration=60_000, boundary_jitter_sigma=250, relabel_prob=0, split_merge_prob=0)
    ref = gen_reference(p)
    hits = sum(score(perturb(ref, p, s), ref).der > 0 for s in range(100))
    assert hits >= 99


def test_perturb_valid_and_deterministic():
    p = SynthParams(total_duration=120_000, boundary_jitter_sigma=2000, relabel_prob=0.3, split_merge_prob=0.3)
    ref = gen_reference(p)
    for s in range(20):
        h = perturb(ref, p, s)
        assert validate(h.turns, h.source_id) == h
        assert perturb(ref, p, s) == h


def test_experiment_zero_perturbation():
    p = SynthParams(total_duration=60_000, **QUIET)
    rep = run_experiment(p, num_channels=3, trials=3)
    assert all(r["dover_der"] == 0 for r in rep.rows())


def test_experiment_order_statistics_and_formats(tmp_path):
    p = SynthParams(total_duration=60_000)
    rep = run_experiment(p, num_channels=4, trials=4)
    for r in rep.rows() + [rep.macro()]:
        assert r["in_spkerr_min"] <= r["in_spkerr_avg"] <= r["in_spkerr_max"]
        assert r["in_der_min"] <= r["in_der_avg"] <= r["in_der_max"]
    tsv = rep.to_tsv().splitlines()
    assert tsv[0].split("\t")[0] == "trial" and tsv[-1].startswith("macro\t")
    assert len(tsv) == 1 + 4 + 1
    payload = json.loads(rep.to_json())
    assert payload["schema_version"] == 1 and len(payload["trials"]) == 4


def test_experiment_rescoring_dumped_rttm(tmp_path):
    p = SynthParams(total_duration=60_000)
    rep = run_experiment(p, num_channels=3, trials=2)
    rep.dump_rttm(tmp_path)
    for row in rep.rows():
        stem = f"trial{row['trial']:04d}"
        ref = load_rttm(tmp_path / f"{stem}_ref.rttm")
        out = load_rttm(tmp_path / f"{stem}_dover.rttm")
        r = score(out, ref)
        assert r.spkerr_rate == row["dover_spkerr"]
        assert r.der == row["dover_der"]


def test_experiment_parallel_matches_serial():
    p = SynthParams(total_duration=30_000)
    a = run_experiment(p, 3, 3)
    b = run_experiment(p, 3, 3, workers=2)
    assert a.to_tsv() == b.to_tsv()


def test_experiment_argument_checks():
    with pytest.raises(ValueError):
        run_experiment(SynthParams(), num_channels=1)
    with pytest.raises(ValueError):
        run_experiment(SynthParams(), trials=0)
