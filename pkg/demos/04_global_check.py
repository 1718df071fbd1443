# How far is the greedy answer from the best possible placement?
#
# Small problems can be checked by enumerating every placement on the grid.
# Larger ones use a branch and bound search that proves the same optimum.

import time

import numpy as np

import pwbreak

rng = np.random.default_rng(3)
x = np.arange(1.0, 31.0)
y = np.interp(x, [1, 9.5, 21.5, 30], [0, 8, -2, 5]) + rng.normal(0, 0.7, x.size)
ds = pwbreak.validate_and_sort(x, y)

best = pwbreak.exhaustive_oracle(ds, k=3, degree=1)
greedy = pwbreak.greedy_fit(ds, pwbreak.uniform_init(ds, 3), degree=1)
print("enumerated optimum:", best.breakpoints.interior, round(best.mse, 4))
print("greedy from uniform:", greedy.breakpoints.interior, round(greedy.mse, 4))

ds, _ = pwbreak.generate(pwbreak.GeneratorSpec(seed=12))
t0 = time.perf_counter()
opt = pwbreak.branch_and_bound_oracle(ds, k=6, degree=1, min_seg_points=2)
print("n=400, k=6 optimum:", opt.breakpoints.interior, round(opt.mse, 4),
      "in %.1fs" % (time.perf_counter() - t0))
