"""Input spread versus combined output over many synthetic meetings.

Prints the max / avg / min speaker error over channels next to the combined
output, one row per trial plus the macro average.
"""
from dover.synth import SynthParams, run_experiment

params = SynthParams(num_speakers=4, boundary_jitter_sigma=250, relabel_prob=0.1, seed=0)
report = run_experiment(params, num_channels=7, trials=10)

print(f"{'trial':>6} {'max':>7} {'avg':>7} {'min':>7} | {'dover':>7} {'DER':>7}")
for row in report.rows() + [report.macro()]:
    print(
        f"{row['trial']!s:>6} {100 * row['in_spkerr_max']:7.2f} {100 * row['in_spkerr_avg']:7.2f} "
        f"{100 * row['in_spkerr_min']:7.2f} | {100 * row['dover_spkerr']:7.2f} {100 * row['dover_der']:7.2f}"
    )

claims = report.claims()
print(f"\ncombined speaker error <= channel average in {claims['trials_dover_spkerr_le_avg']}/{claims['trials']} trials")
