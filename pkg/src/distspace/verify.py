"""Verification harness: metric axioms, exact and statistical distribution checks,
and the analytic bounds behind the continuous construction.

Every check returns a :class:`CheckResult` carrying its seed and tolerance so a
report can be reproduced exactly.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .distributions import DensitySpec, DiscreteSpec, cdf_array
from .rng import stream
from .selection import (
    SelectionConstruction,
    build_theorem1_space,
    exact_distance_law,
    gap_condition,
    last_difference,
    leaf_values,
    perturb_weight,
    q_sum_bound,
    reachable_count,
    reachable_points,
    sample_distance_indices,
    sample_symbols,
    selection_distance,
    structural_ranges_ok,
    telescoping_report,
)
from .subadditive import (
    TransformRecord,
    build_transform,
    check_pinched_composition,
    fw,
    fw_array,
    fw_derivative,
    fw_hypergeometric,
    fw_quadrature,
    phi_grid_certificate,
)

EXHAUSTIVE_LIMIT = 200
TRIPLES = 10**5
FLOAT_METRIC_TOL = 1e-12
KS_COEF = 1.95


@dataclass
class CheckResult:
    name: str
    passed: bool
    margin: Union[float, str, None] = None
    samples: Optional[int] = None
    seed: Optional[int] = None
    tolerance: Optional[str] = None
    detail: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "status": "pass" if self.passed else "fail",
            "margin": self.margin,
            "samples": self.samples,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    construction_id: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_obj(self) -> dict:
        return {
            "construction_id": self.construction_id,
            "checks": [c.to_json_obj() for c in sorted(self.checks, key=lambda c: c.name)],
            "overall": "pass" if self.overall else "fail",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"construction {self.construction_id}"]
        for c in sorted(self.checks, key=lambda c: c.name):
            extra = f" margin={c.margin}" if c.margin is not None else ""
            lines.append(f"  [{'PASS' if c.passed else 'FAIL'}] {c.name}{extra}")
        lines.append(f"overall: {'PASS' if self.overall else 'FAIL'}")
        return "\n".join(lines) + "\n"


def construction_id(obj) -> str:
    text = json.dumps(obj.to_json_obj(), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# metric axioms


class TransformedSpace:
    """Power-law base points with ``f(|x - y|)`` as distance."""

    def __init__(self, alpha, f: Callable[[np.ndarray], np.ndarray], name: str = "transformed"):
        self.alpha = float(alpha)
        self.f = f
        self.name = name

    @classmethod
    def from_record(cls, record: TransformRecord) -> "TransformedSpace":
        return cls(record.alpha, record.phi_array, "phi")

    def sample(self, rng, size):
        return rng.random(size) ** (1.0 / self.alpha)

    def distance(self, x, y):
        return self.f(np.abs(np.asarray(x) - np.asarray(y)))


def _exhaustive_axioms(c: SelectionConstruction) -> CheckResult:
    pts = reachable_points(c, EXHAUSTIVE_LIMIT)
    d = {}
    worst = None
    bad = []
    for x, y in itertools.product(pts, pts):
        dxy = selection_distance(c, x, y)
        d[x, y] = dxy
        if (dxy == 0) != (x == y):
            bad.append(("identity", x, y))
    for x, y in itertools.product(pts, pts):
        if d[x, y] != d[y, x]:
            bad.append(("symmetry", x, y))
    for x, y, z in itertools.product(pts, pts, pts):
        slack = d[x, y] + d[y, z] - d[x, z]
        worst = slack if worst is None else min(worst, slack)
        if slack < 0:
            bad.append(("triangle", x, y, z))
    return CheckResult(
        "metric_axioms",
        not bad,
        margin=str(worst),
        samples=len(pts) ** 3,
        tolerance="exact",
        detail={"mode": "exhaustive", "points": len(pts), "violations": len(bad),
                "first_violation": repr(bad[0]) if bad else None},
    )


def _sampled_selection_axioms(c: SelectionConstruction, k: int, seed: int) -> CheckResult:
    rng = stream(seed, 0)
    xs, ys, zs = (sample_symbols(c, rng, k) for _ in range(3))
    vals = [Fraction(0)] + leaf_values(c)
    dxy, dyx = last_difference(xs, ys), last_difference(ys, xs)
    dyz, dxz = last_difference(ys, zs), last_difference(xs, zs)
    bad = []
    if not np.array_equal(dxy, dyx):
        bad.append("symmetry")
    same = np.all(xs == ys, axis=1)
    if not np.array_equal(same, dxy == -1):
        bad.append("identity")
    # exact comparison over the distinct index triples that occurred
    triples = np.unique(np.stack([dxy, dyz, dxz], axis=1), axis=0)
    worst = None
    first = None
    for i, j, l in triples:
        a, b, e = vals[i + 1], vals[j + 1], vals[l + 1]
        for slack in (a + b - e, a + e - b, b + e - a):
            worst = slack if worst is None else min(worst, slack)
            if slack < 0 and first is None:
                first = (str(a), str(b), str(e))
    if first is not None:
        bad.append("triangle")
    return CheckResult(
        "metric_axioms",
        not bad,
        margin=str(worst),
        samples=k,
        seed=seed,
        tolerance="exact",
        detail={"mode": "sampled", "distinct_triples": int(len(triples)), "violations": bad,
                "first_violation": first},
    )


def _sampled_float_axioms(space, k: int, seed: int, tol: float) -> CheckResult:
    rng = stream(seed, 0)
    x, y, z = (space.sample(rng, k) for _ in range(3))
    dxy, dyx = space.distance(x, y), space.distance(y, x)
    dyz, dxz = space.distance(y, z), space.distance(x, z)
    sym = float(np.max(np.abs(dxy - dyx)))
    slacks = np.stack([dxy + dyz - dxz, dxy + dxz - dyz, dyz + dxz - dxy])
    worst = float(slacks.min())
    pos = np.unravel_index(int(np.argmin(slacks)), slacks.shape)[1]
    zero_ok = bool(np.all((space.distance(x, x) == 0)))
    passed = worst >= -tol and sym <= tol and zero_ok
    detail = {"mode": "sampled", "symmetry_gap": sym, "d(x,x)=0": zero_ok}
    if worst < -tol:
        detail["violating_triple"] = [float(x[pos]), float(y[pos]), float(z[pos])]
    return CheckResult("metric_axioms", passed, margin=worst, samples=k, seed=seed,
                       tolerance=repr(tol), detail=detail)


def check_metric_axioms(space, mode: str = "auto", samples: int = TRIPLES, seed: int = 42,
                        tol: float = FLOAT_METRIC_TOL) -> CheckResult:
    """Symmetry, identity of indiscernibles and the triangle inequality.

    Selection constructions are checked exactly, over every triple of points
    when there are at most 200 of them (``mode="auto"``) and otherwise over
    ``samples`` triples drawn from the measure.  Other spaces are sampled and
    compared with tolerance ``tol``.
    """
    if isinstance(space, SelectionConstruction):
        if mode == "exhaustive" or (mode == "auto" and reachable_count(space) <= EXHAUSTIVE_LIMIT):
            return _exhaustive_axioms(space)
        return _sampled_selection_axioms(space, samples, seed)
    return _sampled_float_axioms(space, samples, seed, tol)


# ---------------------------------------------------------------------------
# distributions


def check_distribution_exact(c: SelectionConstruction, target: DiscreteSpec) -> CheckResult:
    got = exact_distance_law(c)
    want = target.as_dict()
    mismatches = []
    for v in sorted(set(got) | set(want)):
        g, w = got.get(v, Fraction(0)), want.get(v, Fraction(0))
        if g != w:
            mismatches.append([str(v), str(g), str(w)])
    return CheckResult(
        "distribution_exact",
        not mismatches,
        margin=str(max((abs(Fraction(g) - Fraction(w)) for _, g, w in mismatches), default=Fraction(0))),
        tolerance="exact",
        detail={"atoms": len(want), "mismatches": mismatches[:10]},
    )


def ks_statistic(samples, cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic ``sup |F_n - F|``."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def total_variation(p: dict, q: dict) -> Fraction:
    keys = set(p) | set(q)
    return sum((abs(Fraction(p.get(k, 0)) - Fraction(q.get(k, 0))) for k in keys), Fraction(0)) / 2


def _discrete_frequencies(sampler, n: int, seed: int) -> dict:
    if isinstance(sampler, SelectionConstruction):
        idx = sample_distance_indices(sampler, seed, n)
        vals = [Fraction(0)] + leaf_values(sampler)
        counts = np.bincount(idx + 1, minlength=len(vals))
        out: dict = {}
        for v, cnt in zip(vals, counts):
            if cnt:
                out[v] = out.get(v, 0) + int(cnt)
        return out
    values = sampler(seed, n)
    out = {}
    for v in values:
        out[v] = out.get(v, 0) + 1
    return out


def check_distribution_statistical(sampler, target, n: int, seed: int, name: str = "distribution_statistical") -> CheckResult:
    """Seeded Monte Carlo comparison with a target law.

    Discrete targets (a :class:`DiscreteSpec` or ``{value: prob}``): every atom
    frequency must lie within ``4 sqrt(p(1-p)/n)`` of ``p``.  Continuous
    targets (a CDF callable): KS statistic below ``1.95 / sqrt(n)``.
    ``sampler`` is a construction or a callable ``(seed, n) -> samples``.
    """
    if n < 10**4:
        raise ValueError("statistical checks need n >= 10**4")
    if isinstance(target, (DiscreteSpec, dict)):
        law = target.as_dict() if isinstance(target, DiscreteSpec) else dict(target)
        counts = _discrete_frequencies(sampler, n, seed)
        worst = math.inf
        failures = []
        for v in sorted(set(law) | set(counts)):
            p = float(law.get(v, 0))
            freq = counts.get(v, 0) / n
            band = 4 * math.sqrt(p * (1 - p) / n)
            slack = band - abs(freq - p)
            worst = min(worst, slack)
            if slack < 0:
                failures.append([str(v), freq, p])
        emp = {v: Fraction(cnt, n) for v, cnt in counts.items()}
        tv = float(total_variation(emp, law))
        return CheckResult(name, not failures, margin=worst, samples=n, seed=seed,
                           tolerance="4*sqrt(p(1-p)/n) per atom",
                           detail={"tv": tv, "failures": failures[:10]})
    samples = sampler(seed, n)
    d = ks_statistic(samples, target)
    thr = KS_COEF / math.sqrt(n)
    return CheckResult(name, d < thr, margin=thr - d, samples=n, seed=seed,
                       tolerance=f"KS < {KS_COEF}/sqrt(n)", detail={"ks": d, "threshold": thr})


# ---------------------------------------------------------------------------
# analytic bounds for F_W


def check_fw_bounds(alpha, points: int = 500) -> CheckResult:
    """Lower bound, derivative bound, ratio bound and concavity of ``F_W`` on grids."""
    a = float(alpha)
    if not 0 < a <= 0.25:
        raise ValueError(f"alpha={alpha} must lie in (0, 1/4]")
    half = np.arange(1, points + 1) / (2 * points)  # (0, 1/2]
    fh = fw_array(a, half)
    deriv = np.array([fw_derivative(a, t) for t in half])
    lower = float(np.min(fh - half ** (2 * a)))
    dbound = float(np.min(4 * a * half ** (2 * a - 1) + 1e-6 - deriv))
    ratio = half * deriv / fh
    rbound = float(np.min(4 * a + 1e-6 - ratio))
    full = np.arange(1, points + 1) / points  # (0, 1]
    ff = fw_array(a, full)
    second = ff[2:] - 2 * ff[1:-1] + ff[:-2]
    concave = float(np.max(second))
    monotone = float(np.min(np.diff(ff)))
    endpoint = abs(fw(a, 1.0) - 1.0)
    detail = {
        "lower_bound_margin": lower,
        "derivative_margin": dbound,
        "ratio_margin": rbound,
        "max_ratio": float(np.max(ratio)),
        "max_second_difference": concave,
        "min_increment": monotone,
        "endpoint_error": endpoint,
    }
    passed = lower >= 0 and dbound >= 0 and rbound >= 0 and concave <= 1e-9 and monotone >= 0 and endpoint <= 1e-10
    return CheckResult(f"fw_bounds[alpha={alpha}]", passed, margin=min(lower, dbound, rbound, 1e-9 - concave),
                       samples=points, tolerance="derivative/ratio +1e-6, concavity 1e-9", detail=detail)


def check_fw_agreement(alphas: Sequence = (0.02, 0.05, 0.1, 0.125), points: int = 500, tol: float = 1e-8) -> CheckResult:
    ts = np.linspace(0.0, 1.0, points)
    worst = 0.0
    per = {}
    for a in alphas:
        diff = max(abs(fw_quadrature(a, t) - fw_hypergeometric(a, t)) for t in ts)
        per[repr(float(a))] = diff
        worst = max(worst, diff)
    return CheckResult("fw_evaluator_agreement", worst <= tol, margin=tol - worst, samples=points * len(alphas),
                       tolerance=repr(tol), detail={"max_abs_diff": per})


def check_ratio_bound(alpha, epsilon, points: int = 500) -> CheckResult:
    """``t F_W'(t) / F_W(t) <= eps`` over an interior grid of (0, 1)."""
    ts = np.arange(1, points) / points
    ratio = np.array([t * fw_derivative(alpha, t) / fw(alpha, t) for t in ts])
    worst = float(epsilon) - float(np.max(ratio))
    return CheckResult("fw_ratio_below_epsilon", worst >= 0, margin=worst, samples=len(ts),
                       tolerance="0", detail={"max_ratio": float(np.max(ratio)), "epsilon": float(epsilon)})


# ---------------------------------------------------------------------------
# whole-construction reports


def verify_discrete(spec: DiscreteSpec, n: int = 10**6, seed: int = 0, construction: Optional[SelectionConstruction] = None) -> VerificationReport:
    c = construction if construction is not None else build_theorem1_space(spec)
    report = VerificationReport(construction_id(c))
    report.checks.append(check_distribution_exact(c, spec))
    identities = telescoping_report(c, spec)
    broken = [name for name, lhs, rhs in identities if lhs != rhs]
    report.checks.append(CheckResult("telescoping", not broken, tolerance="exact",
                                     samples=len(identities), detail={"broken": broken}))
    gap_ok, gap_worst = gap_condition(c)
    report.checks.append(CheckResult("gap_condition", gap_ok and structural_ranges_ok(c),
                                     margin=None if gap_worst is None else str(gap_worst), tolerance="exact"))
    sums = []
    for comp in c.components:
        total, bound = q_sum_bound(comp.space)
        sums.append(total <= bound)
    report.checks.append(CheckResult("q_summability", all(sums), tolerance="exact", samples=len(sums)))
    report.checks.append(check_metric_axioms(c, seed=seed))
    report.checks.append(check_distribution_statistical(c, spec, n, seed))
    # must-fail control: one weight shifted by 1e-6
    if c.components:
        first = c.components[-1]
        bad = perturb_weight(c, (first.index, first.space.components[-1].index), Fraction(1, 10**6))
        ctl = check_distribution_exact(bad, spec)
        report.checks.append(CheckResult("negative_control_perturbed_q", not ctl.passed, tolerance="exact",
                                         detail={"control_status": "fail" if not ctl.passed else "pass"}))
    return report


def verify_density(spec: DensitySpec, n: int = 10**5, seed: int = 0, record: Optional[TransformRecord] = None) -> VerificationReport:
    rec = record if record is not None else build_transform(spec)
    report = VerificationReport(construction_id(rec))
    report.checks.append(check_fw_agreement((rec.alpha,)))
    report.checks.append(check_fw_bounds(rec.alpha))
    report.checks.append(check_ratio_bound(rec.alpha, rec.epsilon))
    ts = np.linspace(0.0, 1.0, 200)
    pinch = check_pinched_composition(1 / float(spec.C), 1 / float(spec.c), list(zip(ts, fw_array(rec.alpha, ts))))
    report.checks.append(CheckResult("pinched_composition", pinch.passed, margin=pinch.worst_margin,
                                     samples=pinch.pairs, tolerance="1e-12", detail=pinch.to_json_obj()))
    cert = phi_grid_certificate(rec, 200)
    report.checks.append(CheckResult("phi_subadditivity", cert.passed, margin=cert.worst_margin,
                                     samples=cert.pairs, tolerance="1e-10", detail=cert.to_json_obj()))
    phis = rec.phi_array(ts)
    report.checks.append(CheckResult("phi_zero_only_at_zero", bool(phis[0] == 0 and np.all(phis[1:] > 0)),
                                     tolerance="exact"))
    report.checks.append(check_metric_axioms(TransformedSpace.from_record(rec), seed=seed))
    sampler = theta_sampler(rec)
    report.checks.append(check_distribution_statistical(sampler, lambda t: cdf_array(spec, t), n, seed))
    ctl = check_metric_axioms(TransformedSpace(rec.alpha, lambda d: d * d, "square"), seed=seed)
    report.checks.append(CheckResult("negative_control_square_transform", not ctl.passed,
                                     detail={"control_margin": ctl.margin}))
    return report


def theta_sampler(rec: TransformRecord) -> Callable[[int, int], np.ndarray]:
    from .subadditive import sample_theta

    def draw(seed, n):
        return sample_theta(rec, stream(seed, 0), n)

    return draw
