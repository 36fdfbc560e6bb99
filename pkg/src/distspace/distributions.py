"""Target distributions: exact discrete laws and piecewise-linear densities on [0, 1].

Discrete targets are carried as exact :class:`fractions.Fraction` atoms so that
constructions built from them can be checked by exact equality.  Densities are
piecewise linear with rational knots, which keeps the CDF piecewise quadratic
and its normalisation exactly checkable.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence, Union

import numpy as np

Atom = tuple[Fraction, Fraction]


class SpecError(ValueError):
    """A target specification failed validation."""


def parse_rational(value) -> Fraction:
    """Parse a ``"p/q"`` or decimal string (or a JSON integer) exactly."""
    if isinstance(value, bool) or isinstance(value, float):
        raise SpecError(f"rationals must be strings or integers, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise SpecError(f"cannot parse rational from {value!r}")
    try:
        return Fraction(value.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecError(f"malformed rational {value!r}") from exc


def format_rational(value: Fraction) -> str:
    return str(Fraction(value))


def dyadic_group(value: Fraction) -> int:
    """Return the integer ``n`` with ``2**n < value <= 2**(n+1)``."""
    value = Fraction(value)
    if value <= 0:
        raise ValueError("dyadic groups are defined for positive values only")
    n = value.numerator.bit_length() - value.denominator.bit_length()
    while Fraction(2) ** n >= value:
        n -= 1
    while Fraction(2) ** (n + 1) < value:
        n += 1
    return n


# ---------------------------------------------------------------------------
# discrete targets


@dataclass(frozen=True)
class DiscreteSpec:
    """Finitely supported law on [0, inf) with exact rational atoms.

    ``atoms`` is sorted by value, starts with the atom at 0 and sums to 1.
    """

    atoms: tuple[Atom, ...]

    support_kind = "finite"

    def __post_init__(self):
        atoms = tuple((Fraction(v), Fraction(p)) for v, p in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        _validate_finite(atoms)

    @property
    def zero_mass(self) -> Fraction:
        return self.atoms[0][1]

    @property
    def positive_atoms(self) -> tuple[Atom, ...]:
        return self.atoms[1:]

    def as_dict(self) -> dict[Fraction, Fraction]:
        return dict(self.atoms)

    def to_json_obj(self) -> dict:
        return {
            "type": "discrete",
            "atoms": [[format_rational(v), format_rational(p)] for v, p in self.atoms],
        }


def _validate_finite(atoms: Sequence[Atom]) -> None:
    if not atoms:
        raise SpecError("a discrete spec needs at least one atom")
    for (v1, _), (v2, _) in zip(atoms, atoms[1:]):
        if not v1 < v2:
            raise SpecError(f"atom values must be strictly increasing ({v1} then {v2})")
    for v, p in atoms:
        if v < 0:
            raise SpecError(f"atom value {v} is negative")
        if not 0 < p <= 1:
            raise SpecError(f"atom probability {p} is outside (0, 1]")
    if atoms[0][0] != 0:
        # finitely many atoms cannot accumulate at 0
        raise SpecError("0 is not in the support closure: a finite spec needs an atom at 0")
    total = sum(p for _, p in atoms)
    if total != 1:
        raise SpecError(f"probabilities sum to {total}, not 1")


@dataclass(frozen=True)
class LazyDiscreteSpec:
    """Discrete law with countably many positive atoms, enumerated on demand.

    ``atom_source()`` must yield positive atoms ``(value, prob)`` grouped by
    dyadic interval from the largest interval downward.  ``tail_bound(k)`` is a
    certified upper bound on the mass carried by every atom after the first
    ``k``.  Since ``zero_mass`` is declared, the exact remaining mass is also
    known and is checked against the bound.
    """

    zero_mass: Fraction
    atom_source: Callable[[], Iterator[Atom]]
    tail_bound: Callable[[int], Fraction]
    name: str = "lazy"

    support_kind = "lazy"

    def __post_init__(self):
        object.__setattr__(self, "zero_mass", Fraction(self.zero_mass))
        if not 0 <= self.zero_mass < 1:
            raise SpecError("zero mass of a lazy spec must lie in [0, 1)")

    def prefix(self, k: int) -> list[Atom]:
        """First ``k`` positive atoms, validated against the ordering contract."""
        out: list[Atom] = []
        it = self.atom_source()
        last_group = None
        for _ in range(k):
            try:
                v, p = next(it)
            except StopIteration:
                break
            v, p = Fraction(v), Fraction(p)
            if v <= 0 or not 0 < p <= 1:
                raise SpecError(f"bad lazy atom ({v}, {p})")
            g = dyadic_group(v)
            if last_group is not None and g > last_group:
                raise SpecError("lazy atoms must come in non-increasing dyadic group order")
            last_group = g
            out.append((v, p))
        return out

    def remaining_mass(self, prefix: Sequence[Atom]) -> Fraction:
        rest = 1 - self.zero_mass - sum((p for _, p in prefix), Fraction(0))
        bound = Fraction(self.tail_bound(len(prefix)))
        if rest < 0 or rest > bound:
            raise SpecError(
                f"partial sums do not bracket 1: remaining mass {rest} vs certified bound {bound}"
            )
        return rest


# ---------------------------------------------------------------------------
# densities on [0, 1]


@dataclass(frozen=True)
class DensitySpec:
    """Piecewise-linear density ``g`` on [0, 1] with ``c < g < C``."""

    knots: tuple[tuple[Fraction, Fraction], ...]
    c: Fraction
    C: Fraction
    _cum: tuple[Fraction, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        knots = tuple((Fraction(t), Fraction(g)) for t, g in self.knots)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "c", Fraction(self.c))
        object.__setattr__(self, "C", Fraction(self.C))
        if len(knots) < 2:
            raise SpecError("a density needs at least two knots")
        if knots[0][0] != 0 or knots[-1][0] != 1:
            raise SpecError("knots must start at t=0 and end at t=1")
        for (t1, _), (t2, _) in zip(knots, knots[1:]):
            if not t1 < t2:
                raise SpecError("knot abscissae must be strictly increasing")
        if not 0 < self.c < self.C:
            raise SpecError("density bounds need 0 < c < C")
        for t, g in knots:
            if not self.c < g < self.C:
                raise SpecError(f"g({t}) = {g} violates c < g < C")
        cum = [Fraction(0)]
        for (t1, g1), (t2, g2) in zip(knots, knots[1:]):
            cum.append(cum[-1] + (t2 - t1) * (g1 + g2) / 2)
        if cum[-1] != 1:
            raise SpecError(f"density integrates to {cum[-1]}, not 1")
        object.__setattr__(self, "_cum", tuple(cum))

    @property
    def epsilon(self) -> Fraction:
        """Ratio ``c / C`` of the declared density bounds."""
        return self.c / self.C

    def to_json_obj(self) -> dict:
        return {
            "type": "density",
            "knots": [[format_rational(t), format_rational(g)] for t, g in self.knots],
            "c": format_rational(self.c),
            "C": format_rational(self.C),
        }

    # float views used by the vectorised paths
    def _arrays(self):
        ts = np.array([float(t) for t, _ in self.knots])
        gs = np.array([float(g) for _, g in self.knots])
        cum = np.array([float(x) for x in self._cum])
        return ts, gs, cum

    def density(self, t):
        """Evaluate ``g`` (scalar or array)."""
        ts, gs, _ = self._arrays()
        return np.interp(t, ts, gs)


Spec = Union[DiscreteSpec, DensitySpec]


def cdf(spec: DensitySpec, t):
    """``G(t) = \\int_0^t g``; exact for Fraction input, float otherwise."""
    if not 0 <= t <= 1:
        raise ValueError(f"t={t} outside [0, 1]")
    exact = isinstance(t, (Fraction, int))
    knots = spec.knots
    i = min(bisect_right([k[0] for k in knots], t) - 1, len(knots) - 2)
    (t1, g1), (t2, g2) = knots[i], knots[i + 1]
    slope = (g2 - g1) / (t2 - t1)
    tau = t - t1
    if exact:
        return spec._cum[i] + g1 * tau + slope * tau * tau / 2
    tau = float(tau)
    return float(spec._cum[i]) + float(g1) * tau + float(slope) * tau * tau / 2


def _solve_piece(g1: float, slope: float, r: float) -> float:
    # positive root of slope/2 tau^2 + g1 tau - r = 0, cancellation-free form
    return 2.0 * r / (g1 + math.sqrt(max(g1 * g1 + 2.0 * slope * r, 0.0)))


def quantile(spec: DensitySpec, u: float) -> float:
    """Inverse of :func:`cdf`, accurate to ``|G(t) - u| <= 1e-12``."""
    if not 0 <= u <= 1:
        raise ValueError(f"u={u} outside [0, 1]")
    u = float(u)
    if u == 0.0:
        return 0.0
    if u == 1.0:
        return 1.0
    cum = [float(x) for x in spec._cum]
    i = min(bisect_right(cum, u) - 1, len(cum) - 2)
    (t1, g1), (t2, g2) = spec.knots[i], spec.knots[i + 1]
    slope = float((g2 - g1) / (t2 - t1))
    lo, hi = float(t1), float(t2)
    t = lo + _solve_piece(float(g1), slope, u - cum[i])
    t = min(max(t, lo), hi)
    if abs(cdf(spec, t) - u) > 1e-12:
        # bisection safeguard on the monotone piece
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if cdf(spec, mid) < u:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-16:
                break
        t = 0.5 * (lo + hi)
    return t


def cdf_array(spec: DensitySpec, t: np.ndarray) -> np.ndarray:
    ts, gs, cum = spec._arrays()
    t = np.asarray(t, dtype=float)
    i = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(ts) - 2)
    slope = (gs[i + 1] - gs[i]) / (ts[i + 1] - ts[i])
    tau = t - ts[i]
    return cum[i] + gs[i] * tau + 0.5 * slope * tau * tau


def quantile_array(spec: DensitySpec, u: np.ndarray) -> np.ndarray:
    """Vectorised closed-form inverse of the piecewise-quadratic CDF."""
    ts, gs, cum = spec._arrays()
    u = np.asarray(u, dtype=float)
    i = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(ts) - 2)
    slope = (gs[i + 1] - gs[i]) / (ts[i + 1] - ts[i])
    r = u - cum[i]
    disc = np.maximum(gs[i] ** 2 + 2.0 * slope * r, 0.0)
    tau = 2.0 * r / (gs[i] + np.sqrt(disc))
    return np.clip(ts[i] + tau, ts[i], ts[i + 1])


# ---------------------------------------------------------------------------
# parsing


def _check_keys(obj: dict, allowed: set[str]) -> None:
    extra = set(obj) - allowed
    if extra:
        raise SpecError(f"unknown keys: {sorted(extra)}")
    missing = allowed - set(obj)
    if missing:
        raise SpecError(f"missing keys: {sorted(missing)}")


def _pairs(raw, what: str) -> list[tuple[Fraction, Fraction]]:
    if not isinstance(raw, list):
        raise SpecError(f"{what} must be a list")
    out = []
    for item in raw:
        if not isinstance(item, list) or len(item) != 2:
            raise SpecError(f"each entry of {what} must be a two-element list")
        out.append((parse_rational(item[0]), parse_rational(item[1])))
    return out


def spec_from_obj(obj) -> Spec:
    if not isinstance(obj, dict):
        raise SpecError("spec must be a JSON object")
    kind = obj.get("type")
    if kind == "discrete":
        _check_keys(obj, {"type", "atoms"})
        return DiscreteSpec(tuple(_pairs(obj["atoms"], "atoms")))
    if kind == "density":
        _check_keys(obj, {"type", "knots", "c", "C"})
        return DensitySpec(
            tuple(_pairs(obj["knots"], "knots")),
            parse_rational(obj["c"]),
            parse_rational(obj["C"]),
        )
    raise SpecError(f"unknown spec type {kind!r}")


def parse_spec(text: str) -> Spec:
    """Parse and validate a JSON target spec."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON: {exc}") from exc
    return spec_from_obj(obj)


def dump_spec(spec: Spec) -> str:
    return json.dumps(spec.to_json_obj(), sort_keys=True, indent=2) + "\n"
