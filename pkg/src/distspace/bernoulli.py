"""Finite discrete spaces realising a two-point distance law ``p*delta_0 + (1-p)*delta_a``.

The space is ``{0, ..., m-1}`` with the scaled discrete metric ``a * 1[x != y]``;
symbol 0 carries mass ``alpha`` and the others share ``1 - alpha`` uniformly, so
two independent symbols coincide with probability

    f_m(alpha) = alpha**2 + (1 - alpha)**2 / (m - 1).

The squared form ``alpha**2 + ((1 - alpha) / (m - 1))**2`` sometimes quoted for
this space only matches the sampler when ``m = 2``; :func:`f_m_squared` keeps it
for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

RESIDUAL_TOL = 1e-14


def f_m(m: int, x):
    """Probability that two independent symbols coincide."""
    return x * x + (1 - x) ** 2 / (m - 1)


def f_m_squared(m: int, x):
    """The squared variant; equals :func:`f_m` only for ``m = 2``."""
    return x * x + ((1 - x) / (m - 1)) ** 2


def _min_alphabet(p: Fraction) -> int:
    # f_m(p) <= p  <=>  (1-p)^2/(m-1) <= p(1-p)  <=>  m - 1 >= (1-p)/p
    r = (1 - p) / p
    return max(2, -(-r.numerator // r.denominator) + 1)


def solve_bernoulli_params(p) -> tuple[int, float]:
    """Return ``(m, alpha)`` with ``m`` minimal and ``alpha`` in ``[p, 1]`` solving ``f_m(alpha) = p``."""
    p = Fraction(p)
    if not 0 < p < 1:
        raise ValueError(f"p={p} must lie in (0, 1)")
    m = _min_alphabet(p)
    # m alpha^2 - 2 alpha + (1 - p (m-1)) = 0; disc/4 is exact
    c0 = 1 - p * (m - 1)
    disc = 1 - m * c0
    root = (1 + math.sqrt(float(disc))) / m
    # one Newton step on the exact-coefficient quadratic polishes the last ulp
    g = m * root * root - 2 * root + float(c0)
    dg = 2 * m * root - 2
    if dg != 0:
        polished = root - g / dg
        if abs(f_m(m, polished) - float(p)) <= abs(f_m(m, root) - float(p)):
            root = polished
    alpha = min(max(root, float(p)), 1.0)
    return m, alpha


@dataclass(frozen=True)
class BernoulliSpace:
    m: int
    alpha: float
    a: Fraction
    p: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "p", Fraction(self.p))
        if self.m < 2:
            raise ValueError("alphabet needs at least two symbols")
        if self.a <= 0:
            raise ValueError("distance scale must be positive")

    @classmethod
    def for_target(cls, p, a) -> "BernoulliSpace":
        """Space whose distance is 0 w.p. ``p`` and ``a`` otherwise."""
        m, alpha = solve_bernoulli_params(p)
        return cls(m, alpha, Fraction(a), Fraction(p))

    @property
    def residual(self) -> float:
        return abs(f_m(self.m, self.alpha) - float(self.p))

    def distance_law(self) -> dict[Fraction, Fraction]:
        """Exact target law of the distance, as built."""
        return {Fraction(0): self.p, self.a: 1 - self.p}

    def to_json_obj(self) -> dict:
        return {
            "type": "bernoulli",
            "m": self.m,
            "alpha": self.alpha,
            "a": str(self.a),
            "p": str(self.p),
        }


def sample_symbol(space: BernoulliSpace, rng: np.random.Generator, size=None):
    """0 with probability ``alpha``, otherwise uniform on ``{1, ..., m-1}``."""
    u = rng.random(size)
    other = rng.integers(1, space.m, size=size)
    if size is None:
        return 0 if u < space.alpha else int(other)
    return np.where(u < space.alpha, 0, other)


def bernoulli_distance(space: BernoulliSpace, x: int, y: int) -> Fraction:
    for s in (x, y):
        if not 0 <= s < space.m:
            raise ValueError(f"symbol {s} outside alphabet of size {space.m}")
    return space.a if x != y else Fraction(0)
