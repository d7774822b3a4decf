"""Synthetic references, degraded per-channel hypotheses and a batch experiment.

Each simulated channel perturbs the same reference with boundary jitter,
random speaker substitutions and spurious splits/merges.  The experiment
reports input error spread (max / avg / min over channels) against the
combined output, per trial and macro-averaged.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .core import dover_combine
from .rttm_io import write_rttm
from .scoring import score
from .timeline import Diarization, Turn, validate

__all__ = ["SynthParams", "TrialResult", "ExperimentReport", "gen_reference", "perturb", "run_trial", "run_experiment"]

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SynthParams:
    """Generator settings.  Durations are in ticks (ms)."""

    num_speakers: int = 4
    total_duration: int = 600_000
    mean_turn: int = 4_000
    pause_prob: float = 0.2
    boundary_jitter_sigma: float = 250.0
    relabel_prob: float = 0.1
    split_merge_prob: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.num_speakers < 1:
            raise ValueError("num_speakers must be >= 1")
        if self.total_duration <= 0 or self.mean_turn <= 0:
            raise ValueError("durations must be positive")
        if self.boundary_jitter_sigma < 0:
            raise ValueError("jitter sigma must be non-negative")
        for name in ("pause_prob", "relabel_prob", "split_merge_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")


def _speaker_names(n: int) -> list[str]:
    return [f"spk{i}" for i in range(n)]


def gen_reference(params: SynthParams, trial: int = 0) -> Diarization:
    """Alternating speaker turns with gamma(2) durations around ``mean_turn``.

    The first turns cycle through a random permutation of the speakers so
    every speaker appears when the recording is long enough.
    """
    rng = np.random.default_rng([params.seed, trial, 0])
    names = _speaker_names(params.num_speakers)
    intro = list(rng.permutation(params.num_speakers))
    turns = []
    t = 0
    current = None
    while t < params.total_duration:
        if intro:
            spk = int(intro.pop(0))
        elif params.num_speakers == 1:
            spk = 0
        else:
            spk = int(rng.integers(params.num_speakers - 1))
            spk += spk >= current
        length = max(1, int(round(rng.gamma(2.0, params.mean_turn / 2))))
        end = min(t + length, params.total_duration)
        turns.append(Turn(names[spk], t, end))
        current = spk
        t = end
        if rng.random() < params.pause_prob:
            t += max(1, int(round(rng.exponential(params.mean_turn / 4))))
    return validate(turns, "reference")


def _jitter(turns: list[tuple[str, int, int]], sigma: float, rng: np.random.Generator) -> list[tuple[str, int, int]]:
    points = sorted({p for _, b, e in turns for p in (b, e)})
    if sigma > 0:
        noise = np.rint(rng.normal(0.0, sigma, size=len(points))).astype(np.int64)
    else:
        noise = np.zeros(len(points), dtype=np.int64)
    moved = {}
    prev = -1
    for p, dn in zip(points, noise.tolist()):
        q = max(p + dn, prev + 1, 0)
        moved[p] = q
        prev = q
    return [(lab, moved[b], moved[e]) for lab, b, e in turns]


def perturb(ref: Diarization, params: SynthParams, channel_seed: int) -> Diarization:
    """One simulated channel's hypothesis of ``ref``.

    Boundaries are jittered (order preserved), turns are relabeled with
    ``relabel_prob``, split or merged with ``split_merge_prob``, and finally
    every label gets a channel-unique random name.
    """
    rng = np.random.default_rng([params.seed, channel_seed, 1])
    speakers = sorted(ref.labels) or _speaker_names(params.num_speakers)
    turns = [(t.label, t.begin, t.end) for t in ref.turns]
    turns = _jitter(turns, params.boundary_jitter_sigma, rng)

    def other(label: str) -> str:
        choices = [s for s in speakers if s != label]
        return choices[int(rng.integers(len(choices)))] if choices else label

    if params.relabel_prob > 0:
        turns = [(other(lab) if rng.random() < params.relabel_prob else lab, b, e) for lab, b, e in turns]

    if params.split_merge_prob > 0:
        edited = []
        i = 0
        while i < len(turns):
            lab, b, e = turns[i]
            if rng.random() < params.split_merge_prob:
                if rng.random() < 0.5 and e - b >= 2:
                    cut = int(rng.integers(b + 1, e))
                    edited.append((lab, b, cut))
                    edited.append((other(lab), cut, e))
                    i += 1
                    continue
                if i + 1 < len(turns):
                    _, nb, ne = turns[i + 1]
                    edited.append((lab, b, e))
                    edited.append((lab, nb, ne))
                    i += 2
                    continue
            edited.append((lab, b, e))
            i += 1
        turns = edited

    order = rng.permutation(len(speakers))
    rename = {s: f"ch{channel_seed}_s{int(k)}" for s, k in zip(speakers, order)}
    return validate([Turn(rename[lab], b, e) for lab, b, e in turns], f"channel{channel_seed}")


@dataclass
class TrialResult:
    trial: int
    input_spkerr: list[float]
    input_der: list[float]
    dover_spkerr: float
    dover_der: float
    reference: Optional[Diarization] = field(default=None, repr=False)
    hypotheses: list[Diarization] = field(default_factory=list, repr=False)
    consensus: Optional[Diarization] = field(default=None, repr=False)

    def row(self) -> dict:
        s, d = np.asarray(self.input_spkerr), np.asarray(self.input_der)
        return {
            "trial": self.trial,
            "in_spkerr_max": float(s.max()),
            "in_spkerr_avg": float(s.mean()),
            "in_spkerr_min": float(s.min()),
            "in_der_max": float(d.max()),
            "in_der_avg": float(d.mean()),
            "in_der_min": float(d.min()),
            "dover_spkerr": self.dover_spkerr,
            "dover_der": self.dover_der,
        }


COLUMNS = [
    "trial",
    "in_spkerr_max",
    "in_spkerr_avg",
    "in_spkerr_min",
    "in_der_max",
    "in_der_avg",
    "in_der_min",
    "dover_spkerr",
    "dover_der",
]


@dataclass
class ExperimentReport:
    params: SynthParams
    num_channels: int
    trials: list[TrialResult]

    def rows(self) -> list[dict]:
        return [t.row() for t in self.trials]

    def macro(self) -> dict:
        rows = self.rows()
        out: dict = {"trial": "macro"}
        for col in COLUMNS[1:]:
            out[col] = float(np.mean([r[col] for r in rows]))
        return out

    def claims(self) -> dict:
        """Checks of the qualitative ensemble claims on this run."""
        rows = self.rows()
        beats_avg = sum(r["dover_spkerr"] <= r["in_spkerr_avg"] for r in rows)
        m = self.macro()
        bound = m["in_spkerr_min"] + 0.3 * (m["in_spkerr_avg"] - m["in_spkerr_min"])
        return {
            "trials_dover_spkerr_le_avg": beats_avg,
            "trials": len(rows),
            "macro_dover_spkerr": m["dover_spkerr"],
            "macro_near_oracle_bound": bound,
            "macro_near_oracle": m["dover_spkerr"] <= bound,
        }

    def to_tsv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=COLUMNS, delimiter="\t", lineterminator="\n")
        writer.writeheader()
        for r in self.rows() + [self.macro()]:
            writer.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in r.items()})
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "params": asdict(self.params),
            "num_channels": self.num_channels,
            "trials": self.rows(),
            "macro": self.macro(),
            "claims": self.claims(),
        }
        return json.dumps(payload, indent=2) + "\n"

    def dump_rttm(self, directory: Union[str, Path]) -> None:
        """Write reference, per-channel and consensus RTTMs for every trial."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for t in self.trials:
            file_id = f"trial{t.trial:04d}"
            write_rttm(t.reference, directory / f"{file_id}_ref.rttm", file_id)
            for c, hyp in enumerate(t.hypotheses):
                write_rttm(hyp, directory / f"{file_id}_ch{c}.rttm", file_id)
            write_rttm(t.consensus, directory / f"{file_id}_dover.rttm", file_id)


def run_trial(params: SynthParams, num_channels: int, trial: int, keep: bool = True) -> TrialResult:
    ref = gen_reference(params, trial)
    hyps = [perturb(ref, params, trial * num_channels + c) for c in range(num_channels)]
    consensus = dover_combine(hyps, anchor="rank")
    reports = [score(h, ref) for h in hyps]
    out = score(consensus, ref)
    return TrialResult(
        trial=trial,
        input_spkerr=[r.spkerr_rate for r in reports],
        input_der=[r.der for r in reports],
        dover_spkerr=out.spkerr_rate,
        dover_der=out.der,
        reference=ref if keep else None,
        hypotheses=hyps if keep else [],
        consensus=consensus if keep else None,
    )


def _run_trial_star(args):
    return run_trial(*args)


def run_experiment(params: SynthParams, num_channels: int = 7, trials: int = 10, workers: int = 1) -> ExperimentReport:
    """Run ``trials`` independent reference/channel draws and score them.

    With ``workers > 1`` trials run in a process pool; results are always
    ordered by trial index.
    """
    if num_channels < 2:
        raise ValueError("num_channels must be >= 2")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    jobs = [(params, num_channels, k) for k in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial_star, jobs))
    else:
        results = [run_trial(*job) for job in jobs]
    return ExperimentReport(params, num_channels, results)
