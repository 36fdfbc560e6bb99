"""Realising a bounded density by bending a power-law base metric.

The base space is [0, 1] with ``|x - y|`` and the law with CDF ``H(t) = t**alpha``.
``W = |X - Y|`` has CDF ``F_W``; for ``alpha <= eps/8`` it is strongly
subadditive, and ``phi = G^{-1} o F_W`` is then an honest subadditive, hence
metric-preserving, transform sending the law of ``W`` to the target with CDF ``G``.

``F_W`` has two independent evaluators: adaptive quadrature after the
substitution ``u = x**alpha`` and a hypergeometric series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .distributions import DensitySpec, format_rational, quantile, quantile_array, spec_from_obj

QUAD_TOL = 1e-10
SERIES_TOL = 1e-14
SERIES_CAP = 10**6


class QuadratureError(RuntimeError):
    pass


class SeriesCapError(RuntimeError):
    """The hypergeometric series did not converge within the term cap."""


def _check_alpha(alpha) -> float:
    a = float(alpha)
    if not 0 < a < 0.5:
        raise ValueError(f"alpha={alpha} must lie in (0, 1/2)")
    return a


@dataclass(frozen=True)
class PowerLawBase:
    """Law on [0, 1] with CDF ``t**alpha``."""

    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        if not 0 < self.alpha <= Fraction(1, 8):
            raise ValueError("power-law exponent must lie in (0, 1/8]")

    def cdf(self, t):
        return np.clip(t, 0.0, 1.0) ** float(self.alpha)

    def pdf(self, t):
        a = float(self.alpha)
        return a * np.asarray(t, dtype=float) ** (a - 1)

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-CDF draw ``U**(1/alpha)``."""
        return rng.random(size) ** (1.0 / float(self.alpha))


# ---------------------------------------------------------------------------
# F_W evaluators


def fw_quadrature(alpha, t: float) -> float:
    """``F_W(t) = 2 \\int_0^1 h(x) (H(x+t) - H(x)) dx`` by adaptive quadrature.

    With ``u = x**alpha`` the weight ``h(x) dx`` becomes ``du`` and the
    integrand ``min(1, (u**(1/alpha) + t)**alpha) - u`` is bounded.  The part
    past the kink at ``u = (1-t)**alpha`` integrates in closed form.
    """
    a = _check_alpha(alpha)
    t = float(t)
    if not 0 <= t <= 1:
        raise ValueError(f"t={t} outside [0, 1]")
    if t == 0:
        return 0.0
    if t == 1:
        return 1.0
    kink = (1 - t) ** a
    inv = 1.0 / a

    def integrand(u):
        return (u**inv + t) ** a - u

    # the integrand bends where u**(1/alpha) ~ t
    bend = t**a
    points = [bend] if 0 < bend < kink else None
    val, err = integrate.quad(
        integrand, 0.0, kink, epsabs=QUAD_TOL / 4, epsrel=0.0, limit=500, points=points
    )
    if err > QUAD_TOL / 2:
        raise QuadratureError(f"quadrature error estimate {err:.2e} at alpha={a}, t={t}")
    return 2.0 * val + (1.0 - kink) ** 2


def _family_series(alpha: float, c_shift: float, z: float) -> float:
    """``2F1(-alpha, 1; c; z)`` with ``c = 1 + c_shift``, by term recurrence.

    Consecutive terms have ratio ``z (k - alpha) / (k + 1 + c_shift)``; after the
    first term all share one sign and the ratio stays below ``z``, so the
    remaining sum is at most ``|term| z / (1 - z)``.
    """
    total = 1.0
    term = 1.0
    slack = z / (1.0 - z) if z < 1 else math.inf
    for k in range(SERIES_CAP):
        term *= z * (k - alpha) / (k + 1 + c_shift)
        total += term
        if abs(term) < SERIES_TOL and abs(term) * slack < SERIES_TOL * 10:
            return total
    raise SeriesCapError(f"2F1 series did not converge within {SERIES_CAP} terms (z={z})")


def hyp2f1_family(alpha, z: float) -> float:
    """``2F1(-alpha, 1; 1 + alpha; z)`` for ``z`` in ``[0, 1]``."""
    a = _check_alpha(alpha)
    z = float(z)
    if not 0 <= z <= 1:
        raise ValueError("z must lie in [0, 1]")
    if z == 1:
        # Gauss: Gamma(1+a) Gamma(2a) / (Gamma(1+2a) Gamma(a)) = 1/2
        return math.gamma(1 + a) * math.gamma(2 * a) / (math.gamma(1 + 2 * a) * math.gamma(a))
    return _family_series(a, a, z)


def _connection_coefficient(a: float) -> float:
    return math.gamma(1 + a) * math.gamma(-2 * a) / math.gamma(-a)


def fw_hypergeometric(alpha, t: float, method: str = "auto") -> float:
    """``F_W(t) = 1 + 2 (1-t)**alpha (2F1(-alpha, 1; 1+alpha; 1-t) - 1)``.

    ``method="direct"`` sums the series at ``z = 1 - t``, which slows down as
    ``t -> 0`` and raises :class:`SeriesCapError` past the term cap.
    ``method="auto"`` switches for ``t < 1/2`` to the ``z -> 1 - z`` connection
    formula, whose series is in ``t`` itself::

        F_W(t) = 1 + (1-t)**alpha (2F1(-alpha, 1; 1-2alpha; t) - 2) + 2 B t**(2 alpha),
        B = Gamma(1+alpha) Gamma(-2alpha) / Gamma(-alpha).
    """
    a = _check_alpha(alpha)
    t = float(t)
    if not 0 <= t <= 1:
        raise ValueError(f"t={t} outside [0, 1]")
    if t == 0:
        return 0.0
    if t == 1:
        return 1.0
    if method == "direct" or (method == "auto" and t >= 0.5):
        s = hyp2f1_family(a, 1.0 - t)
        return 1.0 + 2.0 * (1.0 - t) ** a * (s - 1.0)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    s = _family_series(a, -2 * a, t)  # c = 1 - 2 alpha
    w = (1.0 - t) ** a
    return 1.0 + w * (s - 2.0) + 2.0 * _connection_coefficient(a) * t ** (2 * a)


def _family_series_array(alpha: float, c_shift: float, z: np.ndarray) -> np.ndarray:
    total = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(2000):
        term = term * z * (k - alpha) / (k + 1 + c_shift)
        total += term
        if np.all(np.abs(term) < SERIES_TOL * 0.1):
            return total
    raise SeriesCapError("vectorised 2F1 series did not converge")


def fw_array(alpha, t) -> np.ndarray:
    """Vectorised hypergeometric ``F_W`` (both series have ``|z| <= 1/2``)."""
    a = _check_alpha(alpha)
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    out = np.empty_like(t)
    hi = t >= 0.5
    lo = ~hi
    if hi.any():
        th = t[hi]
        s = _family_series_array(a, a, 1.0 - th)
        out[hi] = 1.0 + 2.0 * (1.0 - th) ** a * (s - 1.0)
    if lo.any():
        tl = t[lo]
        s = _family_series_array(a, -2 * a, tl)
        out[lo] = 1.0 + (1.0 - tl) ** a * (s - 2.0) + 2.0 * _connection_coefficient(a) * tl ** (2 * a)
    out[t == 0] = 0.0
    out[t == 1] = 1.0
    return out


def fw(alpha, t: float) -> float:
    return fw_hypergeometric(alpha, t)


def fw_derivative(alpha, t: float, h: Optional[float] = None) -> float:
    """Central-difference ``F_W'(t)``."""
    if h is None:
        h = min(1e-6, t / 4, (1 - t) / 4)
    return (fw(alpha, t + h) - fw(alpha, t - h)) / (2 * h)


# ---------------------------------------------------------------------------
# grid certificates


@dataclass(frozen=True)
class PairCertificate:
    """Outcome of checking ``f(x+y) <= coef f(x) + f(y) + tol`` on grid pairs."""

    passed: bool
    worst_margin: float
    worst_pair: Optional[tuple[float, float]]
    pairs: int

    def to_json_obj(self) -> dict:
        return {
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "worst_pair": None if self.worst_pair is None else list(self.worst_pair),
            "pairs": self.pairs,
        }


def pair_margins(ts: np.ndarray, fs: np.ndarray, coef: float, tol: float, ordered: bool = True) -> PairCertificate:
    """All pairs ``x <= y`` of grid points whose sum is also (to 1e-12) a grid point."""
    ts = np.asarray(ts, dtype=float)
    fs = np.asarray(fs, dtype=float)
    i, j = np.triu_indices(len(ts)) if ordered else np.indices((len(ts),) * 2).reshape(2, -1)
    s = ts[i] + ts[j]
    k = np.clip(np.searchsorted(ts, s - 1e-12), 0, len(ts) - 1)
    hit = np.abs(ts[k] - s) <= 1e-12
    # x = 0 holds trivially once f(0) = 0
    hit &= ~((ts[i] == 0) & (fs[i] == 0))
    i, j, k = i[hit], j[hit], k[hit]
    if len(i) == 0:
        return PairCertificate(True, math.inf, None, 0)
    margin = coef * fs[i] + fs[j] - fs[k]
    w = int(np.argmin(margin))
    worst = float(margin[w])
    return PairCertificate(worst >= -tol, worst, (float(ts[i[w]]), float(ts[j[w]])), int(len(i)))


def check_pinched_composition(psi_lo: float, psi_hi: float, f_grid: Sequence[tuple[float, float]], tol: float = 1e-12) -> PairCertificate:
    """Check ``f(x+y) <= (m/M) f(x) + f(y)`` for grid pairs ``x <= y``, ``x + y <= 1``.

    ``m < psi' < M`` bound the derivative of the outer map; when the check
    passes, the composition ``psi o f`` is subadditive on the grid.
    """
    if not 0 < psi_lo <= psi_hi:
        raise ValueError("need 0 < m <= M")
    ts = np.array([t for t, _ in f_grid], dtype=float)
    fs = np.array([v for _, v in f_grid], dtype=float)
    order = np.argsort(ts)
    return pair_margins(ts[order], fs[order], psi_lo / psi_hi, tol)


# ---------------------------------------------------------------------------
# the transform


def default_alpha(epsilon: Fraction) -> Fraction:
    return min(Fraction(1, 8), Fraction(epsilon) / 8)


@dataclass(frozen=True)
class TransformRecord:
    """``phi = G^{-1} o F_W`` for a density spec, with its base space."""

    density: DensitySpec
    base: PowerLawBase
    certificate: Optional[PairCertificate] = field(default=None, compare=False)

    @property
    def alpha(self) -> Fraction:
        return self.base.alpha

    @property
    def epsilon(self) -> Fraction:
        return self.density.epsilon

    def phi(self, t: float) -> float:
        if t < 0:
            raise ValueError("distances are nonnegative")
        if t >= 1:
            return 1.0
        return quantile(self.density, fw(self.alpha, t))

    def phi_array(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = quantile_array(self.density, fw_array(self.alpha, np.minimum(t, 1.0)))
        out[t >= 1] = 1.0
        out[t == 0] = 0.0
        return out

    def to_json_obj(self) -> dict:
        return {
            "type": "transform",
            "alpha": format_rational(self.alpha),
            "epsilon": format_rational(self.epsilon),
            "density": self.density.to_json_obj(),
            "certificate": None if self.certificate is None else self.certificate.to_json_obj(),
        }


def transform_from_obj(obj: dict) -> TransformRecord:
    from .distributions import parse_rational

    density = spec_from_obj(obj["density"])
    return build_transform(density, alpha=parse_rational(obj["alpha"]))


def phi_grid_certificate(record: TransformRecord, points: int = 200, tol: float = 1e-10) -> PairCertificate:
    """Subadditivity of ``phi`` on all pairs of a uniform grid of [0, 1]."""
    ts = np.linspace(0.0, 1.0, points)
    return pair_margins(ts, record.phi_array(ts), 1.0, tol)


def build_transform(spec: DensitySpec, alpha=None, grid: int = 200) -> TransformRecord:
    """Pick ``alpha = min(1/8, eps/8)`` and assemble ``phi``; attaches a grid certificate."""
    eps = spec.epsilon
    if alpha is None:
        alpha = default_alpha(eps)
    alpha = Fraction(alpha)
    if alpha > eps / 8:
        raise ValueError(f"alpha={alpha} exceeds eps/8={eps / 8}")
    rec = TransformRecord(spec, PowerLawBase(alpha))
    return TransformRecord(spec, rec.base, phi_grid_certificate(rec, grid))


def sample_theta(record: TransformRecord, rng: np.random.Generator, size=None):
    """``phi(|X - Y|)`` for independent ``X, Y`` from the power-law base."""
    x = record.base.sample(rng, size)
    y = record.base.sample(rng, size)
    if size is None:
        return record.phi(abs(x - y))
    return record.phi_array(np.abs(x - y))


def fw_table(alphas: Sequence, points: int) -> list[tuple[float, float, float]]:
    """Rows ``(t, alpha, F_W(t))`` on a uniform grid of [0, 1], alpha-major."""
    ts = np.linspace(0.0, 1.0, points)
    rows = []
    for a in alphas:
        vals = fw_array(a, ts)
        rows.extend((float(t), float(a), float(v)) for t, v in zip(ts, vals))
    return rows
