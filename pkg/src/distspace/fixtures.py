"""Small spaces with known distance laws, plus canned target specs.

Each space exposes ``sample(rng, size)`` returning an array of points,
``distance(x, y)`` (vectorised) and ``target_cdf(t)`` for the law of
``d(X, Y)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bernoulli import BernoulliSpace, sample_symbol
from .distributions import DensitySpec, DiscreteSpec, LazyDiscreteSpec


class CircleSpace:
    """Unit circle R/Z with arc length; the distance is U[0, 1/2]."""

    name = "circle"

    def sample(self, rng, size):
        return rng.random(size)

    def distance(self, x, y):
        d = np.abs(np.asarray(x) - np.asarray(y)) % 1.0
        return np.minimum(d, 1.0 - d)

    def target_cdf(self, t):
        return np.clip(2.0 * np.asarray(t, dtype=float), 0.0, 1.0)


class ExponentialLineSpace:
    """The real line with ``|x - y|`` and Exp(1) points; memorylessness makes the distance Exp(1)."""

    name = "exponential-line"

    def sample(self, rng, size):
        return rng.exponential(1.0, size)

    def distance(self, x, y):
        return np.abs(np.asarray(x) - np.asarray(y))

    def target_cdf(self, t):
        return 1.0 - np.exp(-np.maximum(np.asarray(t, dtype=float), 0.0))


@dataclass
class DiscreteMetricSpace:
    """``{0, ..., m-1}`` with the discrete metric scaled by ``a``."""

    space: BernoulliSpace
    name = "bernoulli"

    def sample(self, rng, size):
        return sample_symbol(self.space, rng, size)

    def distance(self, x, y):
        return np.where(np.asarray(x) != np.asarray(y), float(self.space.a), 0.0)

    def target_cdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t < float(self.space.a), float(self.space.p), 1.0)


class BinarySequenceSpace:
    """Fair coin sequences with ``sum 2**-k |x_k - y_k|``; the distance is U[0, 1].

    Sequences are truncated to 53 bits and stored as integers, so the
    distance is ``(x xor y) / 2**53``.
    """

    name = "binary-sequences"
    bits = 53

    def sample(self, rng, size):
        return rng.integers(0, 2**self.bits, size=size, dtype=np.uint64)

    def distance(self, x, y):
        return np.bitwise_xor(np.asarray(x, dtype=np.uint64), np.asarray(y, dtype=np.uint64)).astype(float) / 2.0**self.bits

    def target_cdf(self, t):
        return np.clip(np.asarray(t, dtype=float), 0.0, 1.0)


class LogScaleSpace:
    """(0, 1] with ``|log(y/x)|`` and uniform points; the distance is Exp(1)."""

    name = "log-scale"

    def sample(self, rng, size):
        # 1 - U lies in (0, 1]
        return 1.0 - rng.random(size)

    def distance(self, x, y):
        return np.abs(np.log(np.asarray(y) / np.asarray(x)))

    def target_cdf(self, t):
        return 1.0 - np.exp(-np.maximum(np.asarray(t, dtype=float), 0.0))


def example_spaces() -> dict:
    return {
        "circle": CircleSpace(),
        "exponential-line": ExponentialLineSpace(),
        "bernoulli": DiscreteMetricSpace(BernoulliSpace.for_target(Fraction(1, 2), 1)),
        "binary-sequences": BinarySequenceSpace(),
        "log-scale": LogScaleSpace(),
    }


# ---------------------------------------------------------------------------
# target specs used across tests and the acceptance run

THREE_ATOMS = DiscreteSpec(
    ((Fraction(0), Fraction(2, 5)), (Fraction(7, 10), Fraction(7, 20)), (Fraction(3, 2), Fraction(1, 4)))
)

UNIFORM_DENSITY = DensitySpec(((0, 1), (1, 1)), Fraction(9, 10), Fraction(11, 10))

LINEAR_DENSITY = DensitySpec(
    ((0, Fraction(3, 4)), (1, Fraction(5, 4))), Fraction(7, 10), Fraction(13, 10)
)


def dyadic_geometric_spec(zero_mass=Fraction(1, 2)) -> LazyDiscreteSpec:
    """Atom ``k = 0, 1, ...`` at ``(3/2) 2**-k`` with mass ``(1 - p0) 2**-(k+1)``.

    One atom per dyadic interval, accumulating at 0.
    """
    zero_mass = Fraction(zero_mass)
    rest = 1 - zero_mass

    def source():
        k = 0
        while True:
            yield Fraction(3, 2) / 2**k, rest / 2 ** (k + 1)
            k += 1

    return LazyDiscreteSpec(zero_mass, source, lambda k: rest / 2**k, name="dyadic-geometric")
