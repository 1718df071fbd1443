# Fitting a continuous piecewise polynomial when the breakpoints are known.
#
# Each piece gets its own least-squares polynomial, and the pieces are
# forced to meet at every breakpoint. Nothing is searched here.

import numpy as np

import pwbreak

rng = np.random.default_rng(0)
x = np.linspace(0, 10, 60)
truth = np.where(x < 4, 2 * x, 8 - 1.5 * (x - 4)) + np.where(x > 7, 2 * (x - 7), 0)
ds = pwbreak.validate_and_sort(x, truth + rng.normal(0, 0.3, x.size))

# the breakpoints must sit strictly between samples
bp = pwbreak.BreakpointVector.for_dataset(ds, [4.05, 7.05])
model, err = pwbreak.fit_piecewise(ds, bp, degree=1)

print("MSE:", round(err, 4))
for j, c in enumerate(model.coefficients):
    print(f"piece {j}: {c[0]:+.3f} {c[1]:+.3f} x")

# neighbouring pieces agree at the breakpoints up to round-off
print("continuity residuals:", model.continuity_residuals())

# a quadratic fit through the same breakpoints
model2, err2 = pwbreak.fit_piecewise(ds, bp, degree=2)
print("quadratic MSE:", round(err2, 4))
print("prediction at 5.0:", pwbreak.predict(model2, 5.0))
