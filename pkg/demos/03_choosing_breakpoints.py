# Choosing how many breakpoints to keep.
#
# Start with too many, optimise, then repeatedly drop the breakpoint whose
# removal raises the MSE the least. Stop once every removal would raise it
# by more than the factor tau.

import numpy as np

import pwbreak

spec = pwbreak.GeneratorSpec(knot_values=(0, 12, -8, 10, -6, 9, -3), seed=1)
ds, truth = pwbreak.generate(spec)

start = pwbreak.quantile_init(ds, 8)
report = pwbreak.select_breakpoints(ds, start, degree=1, tau=1.05, min_seg_points=2)

for r in report.rounds:
    ratios = np.round([v for _, v in r.ratios], 3)
    print(f"{len(r.breakpoints_before)} breakpoints, MSE {r.mse_before:.4f}, ratios {ratios}")

print("stop reason:", report.stop_reason)
print("kept:", report.final_breakpoints.interior)
print("true:", truth.knots[1:-1])

m = pwbreak.evaluate(ds.ys, report.final_model.predict(ds.xs),
                     bps=report.final_breakpoints.interior.size)
print(m.to_dict())
