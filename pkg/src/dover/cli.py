"""Command line entry point: ``dover combine|score|rank|experiment``.

Exit codes: 0 ok, 2 input parse error, 3 overlapping turns within an input,
4 bad flags or parameters, 5 reference without speech.  Data goes to stdout
or ``-o``; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .core import dover, rank_inputs, rank_weights
from .rttm_io import (
    JSON_SCHEMA_VERSION,
    RttmParseError,
    emit_json,
    emit_rttm,
    make_disjoint,
    parse_rttm,
    records_to_diarization,
    seconds_to_ticks,
)
from .scoring import UndefinedRateError, pairwise_der_matrix, score
from .synth import SynthParams, run_experiment
from .timeline import Diarization, ValidationError

log = logging.getLogger("dover")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_USAGE = 4
EXIT_EMPTY_REF = 5


class UsageError(Exception):
    pass


class _StderrHandler(logging.Handler):
    # resolves sys.stderr at emit time so redirected streams are honored
    def emit(self, record):
        print(self.format(record), file=sys.stderr)


def _setup_logging(verbose: bool) -> None:
    if not any(isinstance(h, _StderrHandler) for h in log.handlers):
        handler = _StderrHandler()
        handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        log.addHandler(handler)
        log.propagate = False
    log.setLevel(logging.DEBUG if verbose else logging.INFO)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _anchor(value: str):
    if value in ("rank", "given-order", "all"):
        return value.replace("-", "_")
    if value.startswith("index:"):
        try:
            return int(value.split(":", 1)[1])
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(f"anchor must be rank, given-order, index:K or all, not {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dover", description="Combine and score speaker diarization hypotheses.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug diagnostics on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("combine", help="vote N hypotheses into one consensus RTTM")
    p.add_argument("inputs", nargs="+", type=Path)
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--weights", nargs="+", type=float, help="external weight per input")
    p.add_argument("--anchor", type=_anchor, default="rank", help="rank | given-order | index:K | all")
    p.add_argument("--tie", choices=["first", "lex", "random"], default="first")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--collar", type=float, default=0.0, help="scoring collar in seconds used for ranking")
    p.add_argument("--file-id")
    p.add_argument("--format", choices=["rttm", "json"], default="rttm")

    p = sub.add_parser("score", help="DER of a hypothesis against a reference")
    p.add_argument("ref", type=Path)
    p.add_argument("hyp", type=Path)
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--collar", type=float, default=0.0, help="seconds excluded around reference boundaries")
    p.add_argument("--md-eval-collar", action="store_true", help="shorthand for --collar 0.25")
    p.add_argument("--file-id")
    p.add_argument("--dump-mapping", type=Path, help="write the hyp->ref speaker mapping here")

    p = sub.add_parser("rank", help="rank hypotheses by mean DER to the others")
    p.add_argument("inputs", nargs="+", type=Path)
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--weights", nargs="+", type=float)
    p.add_argument("--collar", type=float, default=0.0)
    p.add_argument("--file-id")

    p = sub.add_parser("experiment", help="synthetic multi-channel experiment")
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p.add_argument("--channels", type=int, default=7)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--speakers", type=int, default=4)
    p.add_argument("--duration", type=float, default=600.0, help="seconds per recording")
    p.add_argument("--mean-turn", type=float, default=4.0, help="seconds")
    p.add_argument("--pause", type=float, default=0.2, help="pause probability after a turn")
    p.add_argument("--jitter", type=float, default=0.25, help="boundary jitter sigma in seconds")
    p.add_argument("--relabel", type=float, default=0.1)
    p.add_argument("--splitmerge", type=float, default=0.05)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dump-dir", type=Path, help="write per-trial RTTMs here")
    return parser


def _write(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")


def _collar_ticks(seconds: float) -> int:
    if seconds < 0:
        raise UsageError("collar must be non-negative")
    return seconds_to_ticks(seconds)


def _load(paths: Sequence[Path], file_id: Optional[str]) -> tuple[list[Diarization], str]:
    inputs = []
    file_ids = []
    for path in paths:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise RttmParseError(f"{path}: {exc.strerror}") from None
        try:
            records = parse_rttm(text, file_id)
        except RttmParseError as exc:
            raise RttmParseError(f"{path}: {exc}") from None
        ids = sorted({r.file_id for r in records})
        if len(ids) > 1:
            raise UsageError(f"{path} holds several file ids ({', '.join(ids)}); pick one with --file-id")
        file_ids.extend(ids)
        inputs.append(records_to_diarization(records, str(path)))
    return inputs, file_id or (file_ids[0] if file_ids else "rec")


def canonical_names(diarization: Diarization) -> Diarization:
    """Rename labels to spk1..spkK in order of first appearance."""
    return diarization.relabel({lab: f"spk{k}" for k, lab in enumerate(diarization.labels, start=1)})


def cmd_combine(args) -> int:
    if args.weights is not None and len(args.weights) != len(args.inputs):
        raise UsageError(f"--weights has {len(args.weights)} values for {len(args.inputs)} inputs")
    if args.weights is not None and any(w < 0 for w in args.weights):
        raise UsageError("--weights must be non-negative")
    if isinstance(args.anchor, int) and not 0 <= args.anchor < len(args.inputs):
        raise UsageError(f"anchor index {args.anchor} out of range")
    inputs, file_id = _load(args.inputs, args.file_id)
    inputs = make_disjoint(inputs)
    result = dover(
        inputs,
        external_weights=args.weights,
        anchor=args.anchor,
        tie_policy=args.tie,
        seed=args.seed,
        collar_for_ranking=_collar_ticks(args.collar),
    )
    log.info("combined %d inputs, anchor=%s", len(inputs), args.anchor)
    if result.weights:
        for pos, (i, w) in enumerate(zip(result.order, result.weights), start=1):
            log.info("  rank %d: %s weight=%.5f", pos, args.inputs[i], w)
    consensus = canonical_names(result.consensus)
    text = emit_json(consensus, file_id) if args.format == "json" else emit_rttm(consensus, file_id)
    _write(text, args.output)
    return EXIT_OK


def cmd_score(args) -> int:
    collar = 0.25 if args.md_eval_collar else args.collar
    (ref, hyp), _ = _load([args.ref, args.hyp], args.file_id)
    report = score(hyp, ref, _collar_ticks(collar))
    payload = {"schema_version": JSON_SCHEMA_VERSION, **report.as_json_dict()}
    _write(json.dumps(payload, indent=2) + "\n", args.output)
    if args.dump_mapping is not None:
        lines = [f"{e.source}\t{e.target}\t{e.shared / 1000:.3f}\n" for e in report.mapping]
        args.dump_mapping.write_text("".join(lines), encoding="utf-8")
    return EXIT_OK


def cmd_rank(args) -> int:
    if len(args.inputs) < 2:
        raise UsageError("rank needs at least two inputs")
    if args.weights is not None and len(args.weights) != len(args.inputs):
        raise UsageError(f"--weights has {len(args.weights)} values for {len(args.inputs)} inputs")
    inputs, _ = _load(args.inputs, args.file_id)
    collar = _collar_ticks(args.collar)
    der = pairwise_der_matrix(inputs, collar)
    mean = der.sum(axis=1) / (len(inputs) - 1)
    order = rank_inputs(inputs, collar)
    external = None if args.weights is None else [args.weights[i] for i in order]
    try:
        weights = rank_weights(len(inputs), external)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lines = ["rank\tinput\tavg_der\tweight\n"]
    for pos, (i, w) in enumerate(zip(order, weights), start=1):
        lines.append(f"{pos}\t{args.inputs[i]}\t{mean[i]:.6f}\t{w:.5f}\n")
    _write("".join(lines), args.output)
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        params = SynthParams(
            num_speakers=args.speakers,
            total_duration=seconds_to_ticks(args.duration),
            mean_turn=seconds_to_ticks(args.mean_turn),
            pause_prob=args.pause,
            boundary_jitter_sigma=args.jitter * 1000,
            relabel_prob=args.relabel,
            split_merge_prob=args.splitmerge,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.channels < 2 or args.trials < 1 or args.workers < 1:
        raise UsageError("need --channels >= 2, --trials >= 1, --workers >= 1")
    report = run_experiment(params, args.channels, args.trials, workers=args.workers)
    _write(report.to_json() if args.format == "json" else report.to_tsv(), args.output)
    if args.dump_dir is not None:
        report.dump_rttm(args.dump_dir)
    claims = report.claims()
    log.info(
        "DOVER spkerr <= input average in %d/%d trials",
        claims["trials_dover_spkerr_le_avg"],
        claims["trials"],
    )
    log.info(
        "macro DOVER spkerr %.4f vs min + 0.3*(avg - min) = %.4f: %s",
        claims["macro_dover_spkerr"],
        claims["macro_near_oracle_bound"],
        "pass" if claims["macro_near_oracle"] else "fail",
    )
    return EXIT_OK


COMMANDS = {"combine": cmd_combine, "score": cmd_score, "rank": cmd_rank, "experiment": cmd_experiment}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"dover: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _setup_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except RttmParseError as exc:
        log.error("parse error: %s", exc)
        return EXIT_PARSE
    except ValidationError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_VALIDATION
    except UndefinedRateError as exc:
        log.error("%s", exc)
        return EXIT_EMPTY_REF


if __name__ == "__main__":
    sys.exit(main())
