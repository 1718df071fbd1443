"""
Synthetic piecewise-linear test data.

Random draws use ``numpy.random.Generator(numpy.random.PCG64(seed))``:
knot values first (``integers``), then the Gaussian noise (``normal``).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import validate_and_sort
from .errors import InvalidSpec

DEFAULT_KNOTS = (1.0, 70.0, 150.0, 230.0, 300.0, 350.0, 400.0)


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a noisy piecewise-linear signal sampled at x = 1..n.

    ``knot_values`` fixes f at the knots; when ``None`` they are drawn from
    the integers ``value_low..value_high`` inclusive. With
    ``distinct_slopes`` the draw is repeated until no two neighbouring
    pieces share a slope, so every interior knot is a real kink.
    """

    knots: tuple = DEFAULT_KNOTS
    knot_values: Optional[tuple] = None
    noise_sigma: float = 2.0
    n: int = 400
    seed: int = 0
    value_low: int = -15
    value_high: int = 15
    distinct_slopes: bool = True
    x: Optional[tuple] = field(default=None, repr=False)

    def validate(self):
        knots = np.asarray(self.knots, dtype=float)
        if knots.size < 2 or not np.all(np.diff(knots) > 0):
            raise InvalidSpec("knots must be strictly increasing with at least two entries")
        if self.knot_values is not None and len(self.knot_values) != knots.size:
            raise InvalidSpec("need one knot value per knot")
        if not self.noise_sigma >= 0:
            raise InvalidSpec(f"noise_sigma must be non-negative, got {self.noise_sigma}")
        if self.n < 2:
            raise InvalidSpec(f"n must be at least 2, got {self.n}")
        if self.value_low > self.value_high:
            raise InvalidSpec("value_low exceeds value_high")


@dataclass(frozen=True)
class Truth:
    knots: np.ndarray
    knot_values: np.ndarray
    noise_mse: float

    def f(self, x):
        """The noiseless signal (linear interpolation through the knots)."""
        return np.interp(x, self.knots, self.knot_values)

    def to_dict(self):
        return {"knots": self.knots.tolist(), "knot_values": self.knot_values.tolist(),
                "noise_mse": self.noise_mse}


def _draw_values(rng, spec, knots):
    for _ in range(10_000):
        vals = rng.integers(spec.value_low, spec.value_high + 1, size=knots.size).astype(float)
        slopes = np.diff(vals) / np.diff(knots)
        if not spec.distinct_slopes or np.all(np.diff(slopes) != 0):
            return vals
    raise InvalidSpec("could not draw knot values with distinct neighbouring slopes")


def generate(spec=GeneratorSpec()):
    """Sample ``y_i = f(x_i) + noise`` for the spec.

    Returns
    -------
    ds : Dataset
    truth : Truth
        Knots, knot values and the realised noise MSE ``mean((y - f(x))**2)``.
    """
    spec.validate()
    knots = np.asarray(spec.knots, dtype=float)
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    if spec.knot_values is None:
        values = _draw_values(rng, spec, knots)
    else:
        values = np.asarray(spec.knot_values, dtype=float)
    x = np.arange(1, spec.n + 1, dtype=float) if spec.x is None else np.asarray(spec.x, float)
    f = np.interp(x, knots, values)
    y = f + rng.normal(0.0, spec.noise_sigma, size=x.size)
    truth = Truth(knots, values, float(np.mean((y - f) ** 2)))
    return validate_and_sort(x, y), truth
