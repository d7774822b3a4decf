"""DER, its components and the optimal speaker mapping."""
from dover import Turn, optimal_mapping, score, validate

ref = validate([Turn("P", 0, 10_000)])

# hypothesis stops two seconds early: all of the error is missed speech
hyp = validate([Turn("P", 0, 8_000)])
r = score(hyp, ref)
print("miss-only     ", r.as_json_dict())

# a 250 ms collar around reference boundaries removes part of the miss
r = score(hyp, ref, collar=250)
print("with collar   ", r.as_json_dict())

# one reference speaker split in two: only one hyp label can be mapped
split = validate([Turn("X", 0, 5_000), Turn("Y", 5_000, 10_000)])
r = score(split, ref)
print("split speaker ", r.as_json_dict())
print("mapping       ", r.mapping.as_dict())

# the mapping is the one-to-one assignment with the most shared time
hyp = validate([Turn("X", 0, 4_000), Turn("Y", 4_000, 10_000)])
ref2 = validate([Turn("P", 0, 5_000), Turn("Q", 5_000, 10_000)])
for e in optimal_mapping(hyp, ref2):
    print(f"  {e.source} -> {e.target}: {e.shared / 1000:.1f} s shared")
