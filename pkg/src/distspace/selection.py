"""Selection spaces: eventually-constant vectors whose distance is read off the
largest differing coordinate.

Two builders are provided.  :func:`build_interval_space` combines scaled
two-point spaces for atoms lying in a common interval ``[a, 2a]`` using
telescoping weights ``q_n = p_n / (p_0 + ... + p_n)``.  :func:`build_theorem1_space`
splits an arbitrary discrete law into dyadic groups ``(2**n, 2**(n+1)]``, builds
an interval space per group and combines the groups with weights
``beta_n = p_n / (1 - sum_{i>n} p_i)``.

All probabilities on the construction side are exact fractions; only the
symbol-0 masses ``alpha`` of the two-point spaces are floats.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .bernoulli import BernoulliSpace, sample_symbol
from .distributions import (
    Atom,
    DiscreteSpec,
    LazyDiscreteSpec,
    SpecError,
    dyadic_group,
    format_rational,
    parse_rational,
)
from .rng import chunks, stream

DEFAULT_DELTA = Fraction(1, 10**9)
MAX_LAZY_ATOMS = 100_000


class ConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class Truncation:
    """How an infinite index set was cut to a finite one.

    ``excluded_mass`` is the exact target mass of the atoms left out.
    ``point_tv_bound`` bounds the total variation between the sampled point
    law and the untruncated measure (``None`` when no such bound is available,
    i.e. no mass at 0).  ``distance_value_bound`` bounds every excluded atom value.
    """

    delta: Fraction
    atoms_kept: int
    excluded_mass: Fraction
    point_tv_bound: Optional[Fraction]
    distance_value_bound: Fraction

    def to_json_obj(self) -> dict:
        return {
            "delta": format_rational(self.delta),
            "atoms_kept": self.atoms_kept,
            "excluded_mass": format_rational(self.excluded_mass),
            "point_tv_bound": None if self.point_tv_bound is None else format_rational(self.point_tv_bound),
            "distance_value_bound": format_rational(self.distance_value_bound),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Truncation":
        ptv = obj["point_tv_bound"]
        return cls(
            parse_rational(obj["delta"]),
            int(obj["atoms_kept"]),
            parse_rational(obj["excluded_mass"]),
            None if ptv is None else parse_rational(ptv),
            parse_rational(obj["distance_value_bound"]),
        )


@dataclass(frozen=True)
class Component:
    index: int
    weight: Fraction
    space: Union[BernoulliSpace, "SelectionConstruction"]


@dataclass(frozen=True)
class SelectionConstruction:
    """A selection space over finitely many components, sorted by index.

    ``kind`` is ``"interval"`` (two-point components, weights ``q_n``) or
    ``"dyadic"`` (nested interval spaces, weights ``beta_n``).  The special
    point of every component is its all-zeros point.
    """

    kind: str
    zero_mass: Fraction
    components: tuple[Component, ...]
    truncation: Optional[Truncation] = None
    _by_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        idx = [c.index for c in self.components]
        if idx != sorted(set(idx)):
            raise ConstructionError("component indices must be distinct and ascending")
        object.__setattr__(self, "_by_index", {c.index: c for c in self.components})

    @property
    def index_set(self) -> list[int]:
        return [c.index for c in self.components]

    def component(self, n: int) -> Component:
        return self._by_index[n]

    def to_json_obj(self) -> dict:
        return {
            "type": "selection",
            "kind": self.kind,
            "zero_mass": format_rational(self.zero_mass),
            "components": [
                {"index": c.index, "weight": format_rational(c.weight), "space": c.space.to_json_obj()}
                for c in self.components
            ],
            "truncation": None if self.truncation is None else self.truncation.to_json_obj(),
        }


def construction_from_obj(obj: dict) -> SelectionConstruction:
    """Inverse of :meth:`SelectionConstruction.to_json_obj`."""
    if obj.get("type") != "selection":
        raise SpecError("not a selection construction document")
    comps = []
    for c in obj["components"]:
        sp = c["space"]
        if sp["type"] == "bernoulli":
            space = BernoulliSpace(int(sp["m"]), float(sp["alpha"]), parse_rational(sp["a"]), parse_rational(sp["p"]))
        else:
            space = construction_from_obj(sp)
        comps.append(Component(int(c["index"]), parse_rational(c["weight"]), space))
    trunc = obj.get("truncation")
    return SelectionConstruction(
        obj["kind"],
        parse_rational(obj["zero_mass"]),
        tuple(comps),
        None if trunc is None else Truncation.from_json_obj(trunc),
    )


# ---------------------------------------------------------------------------
# builders


def telescoping_weights(p0: Fraction, probs: Sequence[Fraction]) -> list[Fraction]:
    """``q_n = p_n / (p_0 + p_1 + ... + p_n)``."""
    out = []
    running = Fraction(p0)
    for p in probs:
        running += p
        out.append(Fraction(p) / running)
    return out


def _lazy_prefix(spec: LazyDiscreteSpec, done) -> tuple[list[Atom], Fraction, Optional[Atom]]:
    """Enumerate atoms until ``done(remaining)`` holds; also peek one atom further."""
    it = spec.atom_source()
    atoms: list[Atom] = []
    last_group = None
    for v, p in it:
        v, p = Fraction(v), Fraction(p)
        g = dyadic_group(v)
        if last_group is not None and g > last_group:
            raise SpecError("lazy atoms must come in non-increasing dyadic group order")
        last_group = g
        atoms.append((v, p))
        rest = spec.remaining_mass(atoms)
        if done(rest):
            nxt = next(it, None)
            if nxt is not None:
                nxt = (Fraction(nxt[0]), Fraction(nxt[1]))
            return atoms, rest, nxt
        if len(atoms) >= MAX_LAZY_ATOMS:
            break
    rest = spec.remaining_mass(atoms)
    if done(rest):
        return atoms, rest, None
    raise ConstructionError(f"cannot certify the excluded tail within {MAX_LAZY_ATOMS} atoms")


def build_interval_space(
    p0,
    atoms: Union[Sequence[Atom], LazyDiscreteSpec],
    *,
    scale=None,
    delta=DEFAULT_DELTA,
) -> SelectionConstruction:
    """Selection space achieving ``p0*delta_0 + sum p_n delta_{a_n}`` with all ``a_n`` in ``[a, 2a]``.

    ``atoms`` is either a finite list of ``(a_n, p_n)`` (in the order the
    components are stacked) or a :class:`LazyDiscreteSpec`, which is cut once
    the excluded weight ``sum_{n>N} q_n <= tail / p0`` drops below ``delta``.
    ``scale`` is the lower end ``a`` of the interval; inferred for finite input.
    """
    p0 = Fraction(p0)
    if not 0 < p0 < 1:
        raise ConstructionError(f"zero mass {p0} must lie in (0, 1)")
    delta = Fraction(delta)
    truncation = None
    if isinstance(atoms, LazyDiscreteSpec):
        if atoms.zero_mass != p0:
            raise ConstructionError("lazy spec zero mass disagrees with p0")
        if scale is None:
            raise ConstructionError("an infinite atom list needs an explicit interval scale")
        kept, rest, _ = _lazy_prefix(atoms, lambda r: r / p0 <= delta)
        truncation = Truncation(delta, len(kept), rest, rest / p0, 2 * Fraction(scale))
        atoms = kept
    else:
        atoms = [(Fraction(v), Fraction(p)) for v, p in atoms]
        if truncation is None and p0 + sum(p for _, p in atoms) != 1:
            raise ConstructionError("p0 and atom probabilities must sum to 1")
    if not atoms:
        raise ConstructionError("need at least one positive atom")
    values = [v for v, _ in atoms]
    a = Fraction(scale) if scale is not None else max(values) / 2
    for v in values:
        if not a <= v <= 2 * a or a <= 0:
            raise ConstructionError(f"atom {v} outside [{a}, {2 * a}]")
    qs = telescoping_weights(p0, [p for _, p in atoms])
    comps = []
    for n, ((v, _), q) in enumerate(zip(atoms, qs), start=1):
        if not 0 < q < 1:
            raise ConstructionError(f"q_{n} = {q} outside (0, 1)")
        comps.append(Component(n, q, BernoulliSpace.for_target(1 - q, v)))
    return SelectionConstruction("interval", p0, tuple(comps), truncation)


def _group_atoms(atoms: Iterable[Atom]) -> dict[int, list[Atom]]:
    groups: dict[int, list[Atom]] = {}
    for v, p in atoms:
        groups.setdefault(dyadic_group(v), []).append((v, p))
    return groups


def build_theorem1_space(spec: Union[DiscreteSpec, LazyDiscreteSpec], delta=DEFAULT_DELTA) -> SelectionConstruction:
    """Dyadic selection space whose distance law is ``spec``.

    Group ``n`` collects the atoms in ``(2**n, 2**(n+1)]`` and is realised by an
    interval space for ``(1 - beta_n) delta_0 + beta_n lambda_n``.  Lazy specs
    are cut once the excluded tail is at most ``delta`` (relative to the mass
    at 0 when that is positive), in which case the truncated construction
    reproduces every kept atom exactly and moves the tail mass to 0.
    """
    delta = Fraction(delta)
    truncation = None
    if isinstance(spec, LazyDiscreteSpec):
        pinf = spec.zero_mass
        if pinf > 0:
            done = lambda r: r / pinf <= delta  # noqa: E731
        else:
            done = lambda r: r <= delta  # noqa: E731
        positive, rest, nxt = _lazy_prefix(spec, done)
        if nxt is not None:
            vbound = Fraction(2) ** (dyadic_group(nxt[0]) + 1)
        else:
            vbound = Fraction(2) ** (dyadic_group(positive[-1][0]) + 1)
        truncation = Truncation(
            delta, len(positive), rest, rest / pinf if pinf > 0 else None, vbound
        )
        pinf = pinf + rest
    else:
        pinf = spec.zero_mass
        positive = list(spec.positive_atoms)
    groups = _group_atoms(positive)
    comps = []
    above = Fraction(0)  # mass of groups with larger index
    for n in sorted(groups, reverse=True):
        members = groups[n]
        mass = sum(p for _, p in members)
        denom = 1 - above
        beta = mass / denom
        inner_atoms = [(v, p / denom) for v, p in members]
        inner = build_interval_space(1 - beta, inner_atoms, scale=Fraction(2) ** n)
        comps.append(Component(n, beta, inner))
        above += mass
    comps.reverse()
    return SelectionConstruction("dyadic", pinf, tuple(comps), truncation)


# ---------------------------------------------------------------------------
# exact law


def component_law(space) -> dict[Fraction, Fraction]:
    if isinstance(space, BernoulliSpace):
        return space.distance_law()
    return exact_distance_law(space)


def exact_distance_law(c: SelectionConstruction) -> dict[Fraction, Fraction]:
    """``P[d = 0] = prod_n P[d_n = 0]``; ``P[d = r] = sum_n prod_{k>n} P[d_k = 0] * P[d_n = r]``."""
    law: dict[Fraction, Fraction] = {}
    agree_above = Fraction(1)
    for comp in reversed(c.components):
        sub = component_law(comp.space)
        for r, pr in sub.items():
            if r != 0:
                law[r] = law.get(r, Fraction(0)) + agree_above * pr
        agree_above *= sub.get(Fraction(0), Fraction(0))
    law[Fraction(0)] = law.get(Fraction(0), Fraction(0)) + agree_above
    return dict(sorted(law.items()))


def exact_distance_distribution(c: SelectionConstruction) -> list[tuple[Fraction, Fraction]]:
    """Exact ``(value, prob)`` list of ``d(X, Y)``, ascending by value."""
    return [(v, p) for v, p in exact_distance_law(c).items() if p != 0 or v == 0]


def distribution_bracket(c: SelectionConstruction) -> list[tuple[Fraction, Fraction, Fraction]]:
    """Per-atom ``(value, lower, upper)`` bracket on the untruncated law.

    Without truncation the bracket is degenerate.  A truncated construction
    carries the excluded mass at 0, so only that atom is widened.
    """
    dist = exact_distance_distribution(c)
    t = c.truncation
    if t is None:
        return [(v, p, p) for v, p in dist]
    out = []
    for v, p in dist:
        if c.kind == "dyadic":
            lo, hi = (p - t.excluded_mass, p) if v == 0 else (p, p)
        else:
            # interval truncation conditions on the kept atoms: every atom scales by (1 - tail)
            lo, hi = p * (1 - t.excluded_mass), p
        out.append((v, lo, hi))
    return out


# ---------------------------------------------------------------------------
# invariants


def _interval_identities(c: SelectionConstruction, p0: Fraction, probs: Sequence[Fraction], label: str):
    out = []
    prod = Fraction(1)
    for comp in c.components:
        prod *= 1 - comp.weight
    out.append((f"{label}prod(1-q)=p0", prod, p0))
    tail = Fraction(1)
    for comp, p in reversed(list(zip(c.components, probs))):
        out.append((f"{label}q_{comp.index}*prod(1-q_i>n)=p_{comp.index}", comp.weight * tail, p))
        tail *= 1 - comp.weight
    return out


def telescoping_report(c: SelectionConstruction, target: Union[DiscreteSpec, LazyDiscreteSpec, None] = None):
    """Exact ``(name, lhs, rhs)`` triples for the telescoping identities of ``c``.

    Right-hand sides come from ``target`` when given (dyadic constructions),
    so the check is independent of how the weights were computed; a lazy
    target contributes the atoms the truncation kept.  For an
    interval construction the targets are the atom masses it was built for,
    recovered from its two-point components.
    """
    t = c.truncation
    if c.kind == "interval":
        kept = Fraction(1) - (t.excluded_mass if t else 0)
        if target is not None:
            lookup = dict(target.atoms)
            masses = [lookup.get(comp.space.a, Fraction(0)) / kept for comp in c.components]
        else:
            # two-point targets give q_n; convert to the atom masses they encode
            masses = _masses_from_q(c.zero_mass / kept, [1 - comp.space.p for comp in c.components])
        return _interval_identities(c, c.zero_mass / kept, masses, "")
    if target is None:
        raise ValueError("dyadic identities need the target spec")
    if isinstance(target, LazyDiscreteSpec):
        spec_atoms = target.prefix(t.atoms_kept if t else 0)
    else:
        spec_atoms = list(target.positive_atoms)
    groups = _group_atoms(spec_atoms)
    out = []
    prod = Fraction(1)
    for comp in c.components:
        prod *= 1 - comp.weight
    p_inf = target.zero_mass + (t.excluded_mass if t else 0)
    out.append(("prod(1-beta)=p_inf", prod, p_inf))
    above = Fraction(0)
    masses = {n: sum(p for _, p in groups.get(n, [])) for n in groups}
    tail = Fraction(1)
    for comp in reversed(c.components):
        n = comp.index
        out.append((f"beta_{n}*prod(1-beta_i>n)=p_{n}", comp.weight * tail, masses.get(n, Fraction(0))))
        tail *= 1 - comp.weight
        denom = 1 - above
        inner_probs = [p / denom for _, p in groups.get(n, [])]
        out.extend(_interval_identities(comp.space, 1 - comp.weight, inner_probs, f"group {n}: "))
        above += masses.get(n, Fraction(0))
    return out


def _masses_from_q(p0: Fraction, qs: Sequence[Fraction]) -> list[Fraction]:
    # invert q_n = p_n / (p0 + ... + p_n): p_n = q_n * S_{n-1} / (1 - q_n)
    out = []
    running = p0
    for q in qs:
        p = q * running / (1 - q)
        out.append(p)
        running += p
    return out


def group_masses(c: SelectionConstruction) -> dict[int, Fraction]:
    """``beta_n * prod_{i>n}(1 - beta_i)``: the probability of sampling from group ``n``."""
    out = {}
    tail = Fraction(1)
    for comp in reversed(c.components):
        out[comp.index] = comp.weight * tail
        tail *= 1 - comp.weight
    return dict(sorted(out.items()))


def q_sum_bound(c: SelectionConstruction) -> tuple[Fraction, Fraction]:
    """``(sum q_n, (1 - p0) / p0)`` for an interval construction."""
    if c.kind != "interval":
        raise ValueError("summability bound applies to interval constructions")
    return sum((comp.weight for comp in c.components), Fraction(0)), (1 - c.zero_mass) / c.zero_mass


def distance_range(space) -> tuple[Fraction, Fraction]:
    """Smallest and largest positive distance a component can produce."""
    if isinstance(space, BernoulliSpace):
        return space.a, space.a
    vals = [v for leaf in leaves(space) for v in [leaf.space.a]]
    return min(vals), max(vals)


def gap_condition(c: SelectionConstruction) -> tuple[bool, Optional[Fraction]]:
    """Check ``sup d_m <= 2 inf d_n`` for all component pairs ``m < n``, recursively.

    Returns ``(ok, worst)`` where ``worst`` is the smallest ``2 inf d_n - sup d_m``
    (``None`` when there is no pair to compare).
    """
    ok = True
    worst: Optional[Fraction] = None
    ranges = [distance_range(comp.space) for comp in c.components]
    for i in range(len(ranges)):
        for j in range(i + 1, len(ranges)):
            margin = 2 * ranges[j][0] - ranges[i][1]
            worst = margin if worst is None else min(worst, margin)
            ok = ok and margin >= 0
    for comp in c.components:
        if isinstance(comp.space, SelectionConstruction):
            sub_ok, sub_worst = gap_condition(comp.space)
            ok = ok and sub_ok
            if sub_worst is not None:
                worst = sub_worst if worst is None else min(worst, sub_worst)
    return ok, worst


def structural_ranges_ok(c: SelectionConstruction) -> bool:
    """Dyadic group ``n`` lies in ``(2**n, 2**(n+1)]``; interval atoms share one ``[a, 2a]``."""
    if c.kind == "dyadic":
        for comp in c.components:
            lo, hi = distance_range(comp.space)
            if not (Fraction(2) ** comp.index < lo and hi <= Fraction(2) ** (comp.index + 1)):
                return False
            if not structural_ranges_ok(comp.space):
                return False
        return True
    lo, hi = distance_range(c)
    return hi <= 2 * lo


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class SpacePoint:
    """Sparse eventually-constant vector.

    ``entries`` holds ``(index, value)`` pairs sorted by index, where ``value``
    is a nonzero symbol (two-point component) or a non-empty nested point.
    Absent indices carry the special all-zeros value.
    """

    entries: tuple = ()

    def get(self, n: int):
        for k, v in self.entries:
            if k == n:
                return v
        return None

    def is_special(self) -> bool:
        return not self.entries

    @classmethod
    def from_paths(cls, paths: dict) -> "SpacePoint":
        """Build from ``{(n, k, ...): symbol}`` leaf paths, dropping zero symbols."""
        nested: dict = {}
        for path, sym in paths.items():
            if sym == 0:
                continue
            if len(path) == 1:
                nested[path[0]] = int(sym)
            else:
                nested.setdefault(path[0], {})[path[1:]] = sym
        entries = []
        for k in sorted(nested):
            v = nested[k]
            if isinstance(v, dict):
                v = cls.from_paths(v)
                if v.is_special():
                    continue
            entries.append((k, v))
        return cls(tuple(entries))

    def paths(self, prefix=()) -> dict:
        out = {}
        for k, v in self.entries:
            if isinstance(v, SpacePoint):
                out.update(v.paths(prefix + (k,)))
            else:
                out[prefix + (k,)] = v
        return out


EMPTY = SpacePoint()


def validate_point(c: SelectionConstruction, x: SpacePoint) -> None:
    for k, v in x.entries:
        if k not in c._by_index:
            raise ValueError(f"index {k} not in construction")
        space = c.component(k).space
        if isinstance(space, BernoulliSpace):
            if not isinstance(v, int) or not 0 < v < space.m:
                raise ValueError(f"symbol {v!r} invalid at index {k}")
        else:
            if not isinstance(v, SpacePoint) or v.is_special():
                raise ValueError(f"nested value at index {k} must be a non-empty point")
            validate_point(space, v)


def split_index(x: SpacePoint, y: SpacePoint) -> Optional[int]:
    """Largest index where ``x`` and ``y`` differ, or ``None`` when equal."""
    xs, ys = dict(x.entries), dict(y.entries)
    diff = [k for k in set(xs) | set(ys) if xs.get(k) != ys.get(k)]
    return max(diff) if diff else None


def selection_distance(c: SelectionConstruction, x: SpacePoint, y: SpacePoint) -> Fraction:
    n = split_index(x, y)
    if n is None:
        return Fraction(0)
    space = c.component(n).space
    xv, yv = x.get(n), y.get(n)
    if isinstance(space, BernoulliSpace):
        return space.a
    return selection_distance(space, xv or EMPTY, yv or EMPTY)


# ---------------------------------------------------------------------------
# leaves and vectorised sampling


@dataclass(frozen=True)
class Leaf:
    path: tuple[int, ...]
    space: BernoulliSpace


def leaves(c: SelectionConstruction, prefix=()) -> list[Leaf]:
    """Two-point components in ascending lexicographic path order.

    The distance between two points is the scale of the *last* leaf, in this
    order, at which their symbols differ.
    """
    out = []
    for comp in c.components:
        path = prefix + (comp.index,)
        if isinstance(comp.space, BernoulliSpace):
            out.append(Leaf(path, comp.space))
        else:
            out.extend(leaves(comp.space, path))
    return out


def reachable_count(c: SelectionConstruction) -> int:
    n = 1
    for leaf in leaves(c):
        n *= leaf.space.m
    return n


def reachable_points(c: SelectionConstruction, limit: int = 200) -> list[SpacePoint]:
    """Every point of a finite construction (there are ``prod m`` of them)."""
    lv = leaves(c)
    if reachable_count(c) > limit:
        raise ValueError(f"construction has more than {limit} points")
    pts = []
    for syms in itertools.product(*[range(leaf.space.m) for leaf in lv]):
        pts.append(SpacePoint.from_paths({leaf.path: s for leaf, s in zip(lv, syms)}))
    return pts


def sample_symbols(c: SelectionConstruction, rng: np.random.Generator, n: int) -> np.ndarray:
    """``(n, L)`` array of independent leaf symbols, one column per leaf."""
    lv = leaves(c)
    out = np.zeros((n, len(lv)), dtype=np.int64)
    for j, leaf in enumerate(lv):
        out[:, j] = sample_symbol(leaf.space, rng, n)
    return out


def points_from_symbols(c: SelectionConstruction, symbols: np.ndarray) -> list[SpacePoint]:
    lv = leaves(c)
    return [SpacePoint.from_paths({leaf.path: int(s) for leaf, s in zip(lv, row)}) for row in symbols]


def sample_point(c: SelectionConstruction, rng: np.random.Generator) -> SpacePoint:
    """One draw from the (possibly truncated) product measure."""
    return points_from_symbols(c, sample_symbols(c, rng, 1))[0]


def last_difference(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Column of the last differing leaf per row, or -1 when the rows agree."""
    diff = xs != ys
    if diff.shape[1] == 0:
        return np.full(diff.shape[0], -1, dtype=np.int64)
    rev = np.argmax(diff[:, ::-1], axis=1)
    idx = diff.shape[1] - 1 - rev
    return np.where(diff.any(axis=1), idx, -1)


def leaf_values(c: SelectionConstruction) -> list[Fraction]:
    return [leaf.space.a for leaf in leaves(c)]


def sample_distance_indices(c: SelectionConstruction, seed: int, n: int, workers: int = 1) -> np.ndarray:
    """Leaf index (``-1`` for distance 0) of ``n`` independent distances.

    Draws are split into fixed-size chunks, chunk ``i`` using substream ``i``,
    so the output does not depend on ``workers``.
    """
    pieces = chunks(n)
    if workers > 1 and len(pieces) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_distance_chunk, [(c, seed, i, k) for i, k in pieces]))
    else:
        parts = [_distance_chunk((c, seed, i, k)) for i, k in pieces]
    if not parts:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(parts)


def _distance_chunk(args) -> np.ndarray:
    c, seed, i, k = args
    rng = stream(seed, i)
    xs = sample_symbols(c, rng, k)
    ys = sample_symbols(c, rng, k)
    return last_difference(xs, ys)


def sample_distances(c: SelectionConstruction, seed: int, n: int, workers: int = 1) -> list[Fraction]:
    vals = [Fraction(0)] + leaf_values(c)
    return [vals[i + 1] for i in sample_distance_indices(c, seed, n, workers)]


def sample_distance(c: SelectionConstruction, rng: np.random.Generator) -> Fraction:
    """Distance between two independent points drawn from ``rng``."""
    return selection_distance(c, sample_point(c, rng), sample_point(c, rng))


def perturb_weight(c: SelectionConstruction, path: tuple[int, ...], eps) -> SelectionConstruction:
    """Copy of ``c`` with the weight at ``path`` shifted by ``eps`` (negative-control fixtures).

    Two-point components below the perturbed weight are rebuilt so the space
    really realises the shifted weight.
    """
    eps = Fraction(eps)
    head, rest = path[0], path[1:]
    comps = []
    for comp in c.components:
        if comp.index != head:
            comps.append(comp)
        elif rest:
            comps.append(replace(comp, space=perturb_weight(comp.space, rest, eps)))
        else:
            w = comp.weight + eps
            space = comp.space
            if isinstance(space, BernoulliSpace):
                space = BernoulliSpace.for_target(1 - w, space.a)
            comps.append(replace(comp, weight=w, space=space))
    return replace(c, components=tuple(comps))
