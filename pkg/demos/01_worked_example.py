"""Three small hypotheses combined step by step.

System B and C disagree with A about where the speaker change happens
(4 s and 6 s instead of 5 s).  After mapping their labels onto A's, the
per-region vote puts the change back at 5 s.
"""
from dover import Turn, build_regions, incremental_map, rank_weights, validate, vote
from dover.core import rank_inputs


def show(name, d):
    print(f"{name:>10}: " + "  ".join(f"{t.label}[{t.begin / 1000:g},{t.end / 1000:g})" for t in d))


A = validate([Turn("A1", 0, 5000), Turn("A2", 5000, 10000)])
B = validate([Turn("B1", 0, 4000), Turn("B2", 4000, 10000)])
C = validate([Turn("C1", 0, 6000), Turn("C2", 6000, 10000)])

print("original labelings")
for name, d in zip("ABC", (A, B, C)):
    show(name, d)

order = rank_inputs([A, B, C])
print("\nanchor order:", ["ABC"[i] for i in order])

# B is mapped to A, then C to both A and the relabeled B
mapped = incremental_map([A, B, C])
print("\nafter label mapping")
for name, d in zip("ABC", mapped):
    show(name, d)

part = build_regions(mapped)
print("\nregions and votes")
for (b, e), *votes in zip(part.regions, *part.labels):
    print(f"  [{b / 1000:g},{e / 1000:g}) -> {votes}")

weights = rank_weights(3)
print("\nrank weights:", [round(w, 5) for w in weights])
show("consensus", vote(mapped, weights))
