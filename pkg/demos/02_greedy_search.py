# Moving breakpoints greedily.
#
# Breakpoints live on the midpoints between neighbouring samples. Each sweep
# lets every breakpoint step one grid point left or right when that lowers
# the fit over its two neighbouring segments.

import pwbreak

ds, truth = pwbreak.generate(pwbreak.GeneratorSpec(seed=5))
print("true knots:", truth.knots[1:-1])

# a deliberately poor start
start = pwbreak.BreakpointVector.for_dataset(ds, [69.5, 99.5, 239.5, 319.5, 369.5])
result = pwbreak.greedy_fit(ds, start, degree=1, min_seg_points=2)

trace = result.trace
print("sweeps:", trace.iterations, "stopped by:", trace.termination_reason)
print("MSE at start: %.4f, best: %.4f" % (trace.records[0].mse, result.mse))
print("final breakpoints:", result.breakpoints.interior)

# the per-breakpoint updates are independent, so a sweep can use threads
parallel = pwbreak.greedy_fit(ds, start, degree=1, min_seg_points=2, workers=4)
print("same answer with threads:", parallel.breakpoints == result.breakpoints)
