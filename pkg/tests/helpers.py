"""Independent brute-force oracles and random fixtures for the test suite.

Nothing here imports the scorer or the voting code; the oracles work on
per-tick label arrays and exhaustive enumeration.
"""

from fractions import Fraction

from dover.timeline import Turn, validate


def random_diarization(rng, n_labels=3, horizon=200, prefix="L", max_turns=12, min_len=1):
    """Random valid diarization on ``[0, horizon)`` using up to ``n_labels`` labels."""
    cuts = sorted(set(rng.integers(0, horizon + 1, size=2 * max_turns).tolist()) | {0, horizon})
    turns = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a < min_len or rng.random() < 0.3:
            continue
        turns.append(Turn(f"{prefix}{int(rng.integers(n_labels))}", a, b))
    return validate(turns)


def tick_labels(d, horizon):
    out = [None] * horizon
    for t in d.turns:
        for x in range(t.begin, min(t.end, horizon)):
            out[x] = t.label
    return out


def brute_force_best_overlap(hyp, ref):
    """Max total shared ticks over every injective hyp->ref label assignment."""
    horizon = max(hyp.end, ref.end)
    pair = {}
    for a, b in zip(tick_labels(hyp, horizon), tick_labels(ref, horizon)):
        if a is not None and b is not None:
            pair[(a, b)] = pair.get((a, b), 0) + 1
    hl, rl = hyp.labels, ref.labels

    def search(i, used):
        if i == len(hl):
            return 0
        best = search(i + 1, used)  # hl[i] left unmapped
        for b in rl:
            if b not in used:
                best = max(best, pair.get((hl[i], b), 0) + search(i + 1, used | {b}))
        return best

    return search(0, frozenset())


def brute_force_score(hyp, ref):
    """(miss, fa, spkerr, ref_total) by per-tick tally under the brute-force mapping."""
    horizon = max(hyp.end, ref.end)
    h, r = tick_labels(hyp, horizon), tick_labels(ref, horizon)
    miss = sum(1 for a, b in zip(h, r) if b is not None and a is None)
    fa = sum(1 for a, b in zip(h, r) if a is not None and b is None)
    both = sum(1 for a, b in zip(h, r) if a is not None and b is not None)
    ref_total = sum(1 for b in r if b is not None)
    return miss, fa, both - brute_force_best_overlap(hyp, ref), ref_total


def tally_oracle(mapped, weights, horizon=None, tie_order="first"):
    """Per-tick weighted vote, returned as a list of labels (None = nonspeech).

    Ties go to the label of the best ranked input speaking at that tick.
    """
    if horizon is None:
        horizon = max(d.end for d in mapped)
    tracks = [tick_labels(d, horizon) for d in mapped]
    w = [Fraction(x) for x in weights]
    total = sum(w)
    out = []
    for t in range(horizon):
        tally = {}
        order = []
        for i, tr in enumerate(tracks):
            if tr[t] is not None:
                tally[tr[t]] = tally.get(tr[t], 0) + w[i]
                order.append(tr[t])
        if not tally or 2 * sum(tally.values()) < total:
            out.append(None)
            continue
        top = max(tally.values())
        out.append(next(lab for lab in order if tally[lab] == top))
    return out
