import itertools
import json
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from conftest import random_discrete_spec
from distspace.bernoulli import BernoulliSpace
from distspace.distributions import DiscreteSpec, LazyDiscreteSpec, SpecError
from distspace.fixtures import THREE_ATOMS, dyadic_geometric_spec
from distspace.rng import CHUNK, stream
from distspace.selection import (
    EMPTY,
    ConstructionError,
    SelectionConstruction,
    SpacePoint,
    build_interval_space,
    build_theorem1_space,
    construction_from_obj,
    distribution_bracket,
    exact_distance_distribution,
    exact_distance_law,
    gap_condition,
    group_masses,
    leaves,
    perturb_weight,
    q_sum_bound,
    reachable_count,
    reachable_points,
    sample_distance,
    sample_distance_indices,
    sample_distances,
    sample_point,
    selection_distance,
    split_index,
    structural_ranges_ok,
    telescoping_report,
    telescoping_weights,
    validate_point,
)
from distspace.verify import check_metric_axioms, total_variation

F = Fraction


def enumerated_law(c: SelectionConstruction) -> dict:
    """Distance law from the product measure, by listing every pair of points."""
    lv = leaves(c)
    probs = []
    for syms in itertools.product(*[range(leaf.space.m) for leaf in lv]):
        w = 1.0
        for leaf, s in zip(lv, syms):
            sp = leaf.space
            w *= sp.alpha if s == 0 else (1 - sp.alpha) / (sp.m - 1)
        probs.append((SpacePoint.from_paths({leaf.path: s for leaf, s in zip(lv, syms)}), w))
    law: dict = {}
    for (x, px), (y, py) in itertools.product(probs, repeat=2):
        d = selection_distance(c, x, y)
        law[d] = law.get(d, 0.0) + px * py
    return law


# --- interval spaces -------------------------------------------------------

def test_telescoping_weights_example():
    qs = telescoping_weights(F(1, 2), [F(3, 10), F(1, 5)])
    assert qs == [F(3, 8), F(1, 5)]
    assert (1 - qs[0]) * (1 - qs[1]) == F(1, 2)


def test_interval_example_construction():
    c = build_interval_space(F(1, 2), [(F(1), F(3, 10)), (F(3, 2), F(1, 5))])
    assert [comp.weight for comp in c.components] == [F(3, 8), F(1, 5)]
    assert exact_distance_law(c) == {F(0): F(1, 2), F(1): F(3, 10), F(3, 2): F(1, 5)}
    assert all(lhs == rhs for _, lhs, rhs in telescoping_report(c))


def test_single_atom_interval():
    c = build_interval_space(F(3, 7), [(F(5, 4), F(4, 7))])
    assert c.components[0].weight == F(4, 7)
    assert exact_distance_distribution(c) == [(F(0), F(3, 7)), (F(5, 4), F(4, 7))]


def test_single_bernoulli_component_law():
    c = build_interval_space(F(2, 5), [(F(1), F(3, 5))])
    assert exact_distance_law(c) == {F(0): F(2, 5), F(1): F(3, 5)}


def lazy_interval_spec():
    # p_n = (1/2)^(n+1) at a_n = 1 + 2^-n, n >= 1; zero mass 1/2
    def source():
        n = 1
        while True:
            yield 1 + F(1, 2**n), F(1, 2 ** (n + 1))
            n += 1

    return LazyDiscreteSpec(F(1, 2), source, lambda k: F(1, 2 ** (k + 1)))


def test_lazy_interval_summability():
    for delta in (F(1, 10**3), F(1, 10**6)):
        c = build_interval_space(F(1, 2), lazy_interval_spec(), scale=1, delta=delta)
        total, bound = q_sum_bound(c)
        assert bound == 1
        assert total <= bound
        assert c.truncation.excluded_mass / F(1, 2) <= delta
        # partial sums of q increase with N and stay below the bound
    sums = []
    for k in range(1, 30):
        atoms = lazy_interval_spec().prefix(k)
        sums.append(sum(telescoping_weights(F(1, 2), [p for _, p in atoms])))
    assert all(a < b for a, b in zip(sums, sums[1:]))
    assert sums[-1] <= 1


def test_lazy_interval_bracket_contains_truth():
    c = build_interval_space(F(1, 2), lazy_interval_spec(), scale=1, delta=F(1, 10**4))
    for v, lo, hi in distribution_bracket(c):
        true = F(1, 2) if v == 0 else F(1, 2 ** (round(math.log2(1 / float(v - 1))) + 1))
        assert lo <= true <= hi


def test_interval_rejects_bad_input():
    with pytest.raises(ConstructionError):
        build_interval_space(F(1, 2), [(F(1), F(1, 4))])  # mass 3/4
    with pytest.raises(ConstructionError):
        build_interval_space(F(1, 2), [(F(1), F(1, 4)), (F(3), F(1, 4))])  # 3 > 2 * 1
    with pytest.raises(ConstructionError):
        build_interval_space(F(1, 2), lazy_interval_spec())  # no scale


def test_all_zero_point_probability():
    # P[all coordinates special] = prod alpha_n >= prod (1 - q_n) = p0
    c = build_interval_space(F(1, 5), [(F(1), F(1, 5)), (F(3, 2), F(2, 5)), (F(2), F(1, 5))])
    prod_alpha = math.prod(comp.space.alpha for comp in c.components)
    assert prod_alpha >= 1 / 5
    n = 10**5
    from distspace.selection import sample_symbols

    hits = int(np.sum(~sample_symbols(c, stream(3), n).any(axis=1)))
    assert abs(hits / n - prod_alpha) <= 4 * math.sqrt(prod_alpha * (1 - prod_alpha) / n)


def test_non_special_frequency_half():
    c = build_interval_space(F(1, 2), [(F(1), F(1, 2))])
    alpha = c.components[0].space.alpha
    idx = sample_distance_indices(c, 5, 1)  # warm path
    assert idx.shape == (1,)
    from distspace.selection import sample_symbols

    s = sample_symbols(c, stream(5), 10**6)[:, 0]
    freq = np.mean(s != 0)
    assert abs(freq - (1 - alpha)) <= 4 * math.sqrt(0.25 / 10**6)


# --- dyadic construction -----------------------------------------------------

def test_three_atom_construction():
    c = build_theorem1_space(THREE_ATOMS)
    betas = {comp.index: comp.weight for comp in c.components}
    assert betas == {-1: F(7, 15), 0: F(1, 4)}
    assert (1 - betas[-1]) * (1 - betas[0]) == F(2, 5)
    assert group_masses(c) == {-1: F(7, 20), 0: F(1, 4)}
    assert exact_distance_distribution(c) == list(THREE_ATOMS.atoms)
    assert all(lhs == rhs for _, lhs, rhs in telescoping_report(c, THREE_ATOMS))


def test_three_atom_matches_enumeration():
    c = build_theorem1_space(THREE_ATOMS)
    law = enumerated_law(c)
    for v, p in THREE_ATOMS.atoms:
        assert abs(law[v] - float(p)) <= 1e-12


def test_delta_zero():
    spec = DiscreteSpec(((F(0), F(1)),))
    c = build_theorem1_space(spec)
    assert c.components == () and c.zero_mass == 1
    assert exact_distance_distribution(c) == [(F(0), F(1))]
    assert sample_point(c, stream(0)) == EMPTY
    assert set(sample_distances(c, 0, 100)) == {F(0)}


def test_single_group_degenerates():
    spec = DiscreteSpec(((F(0), F(1, 3)), (F(5, 4), F(1, 3)), (F(7, 4), F(1, 3))))
    c = build_theorem1_space(spec)
    assert len(c.components) == 1
    assert c.components[0].weight == 1 - F(1, 3)
    assert exact_distance_distribution(c) == list(spec.atoms)


def test_split_index_examples():
    c = build_theorem1_space(THREE_ATOMS)
    x = SpacePoint.from_paths({(-1, 1): 1})
    assert split_index(x, x) is None
    assert split_index(x, EMPTY) == -1
    y = SpacePoint.from_paths({(0, 1): 1, (-1, 1): 1})
    z = SpacePoint.from_paths({(0, 1): 1})
    assert split_index(y, z) == -1
    for p in (x, y, z):
        validate_point(c, p)


def test_distance_examples():
    spec = DiscreteSpec(((F(0), F(1, 10)), (F(3, 2), F(9, 10))))
    c = build_theorem1_space(spec)
    assert c.component(0).space.component(1).space.m >= 3
    y = SpacePoint.from_paths({(0, 1): 2})
    assert selection_distance(c, EMPTY, y) == F(3, 2)
    assert selection_distance(c, y, y) == 0
    x = SpacePoint.from_paths({(0, 1): 1})
    assert selection_distance(c, x, y) == F(3, 2)


def test_three_point_triangle():
    spec = DiscreteSpec(((F(0), F(2, 5)), (F(1), F(3, 5))))
    c = build_theorem1_space(spec)
    pts = reachable_points(c)
    assert len(pts) == 3
    for x, y, z in itertools.product(pts, repeat=3):
        assert selection_distance(c, x, z) <= selection_distance(c, x, y) + selection_distance(c, y, z)
    assert check_metric_axioms(c).passed


def test_validate_point_rejects_garbage():
    c = build_theorem1_space(THREE_ATOMS)
    with pytest.raises(ValueError):
        validate_point(c, SpacePoint(((5, 1),)))
    with pytest.raises(ValueError):
        validate_point(c, SpacePoint(((0, 1),)))  # group 0 needs a nested point
    with pytest.raises(ValueError):
        validate_point(c, SpacePoint.from_paths({(0, 1): 7}))


def test_point_paths_round_trip():
    paths = {(0, 1): 2, (-1, 1): 1, (-3, 2): 4}
    p = SpacePoint.from_paths(paths)
    assert p.paths() == paths
    assert SpacePoint.from_paths({(0, 1): 0}) == EMPTY


def test_three_atom_sampled_frequencies():
    c = build_theorem1_space(THREE_ATOMS)
    n = 10**6
    idx = sample_distance_indices(c, 2026, n)
    vals = [F(0)] + [leaf.space.a for leaf in leaves(c)]
    counts = {}
    for v, k in zip(vals, np.bincount(idx + 1, minlength=len(vals))):
        counts[v] = counts.get(v, 0) + int(k)
    for v, p in THREE_ATOMS.atoms:
        p = float(p)
        assert abs(counts[v] / n - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_two_atom_bernoulli_sampling():
    spec = DiscreteSpec(((F(0), F(1, 5)), (F(1), F(4, 5))))
    c = build_theorem1_space(spec)
    n = 10**6
    zeros = np.mean(sample_distance_indices(c, 9, n) == -1)
    assert abs(zeros - 0.2) <= 4 * math.sqrt(0.16 / n)


def test_scalar_sampler_agrees_in_law():
    c = build_theorem1_space(THREE_ATOMS)
    rng = stream(4)
    n = 20000
    draws = [sample_distance(c, rng) for _ in range(n)]
    for v, p in THREE_ATOMS.atoms:
        p = float(p)
        assert abs(draws.count(v) / n - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_workers_do_not_change_output():
    c = build_theorem1_space(THREE_ATOMS)
    n = 2 * CHUNK + 17
    serial = sample_distance_indices(c, 77, n)
    parallel = sample_distance_indices(c, 77, n, workers=2)
    assert np.array_equal(serial, parallel)


def test_json_round_trip():
    c = build_theorem1_space(THREE_ATOMS)
    again = construction_from_obj(json.loads(json.dumps(c.to_json_obj())))
    assert again == c
    assert exact_distance_distribution(again) == list(THREE_ATOMS.atoms)


def test_perturbed_weight_changes_law():
    c = build_theorem1_space(THREE_ATOMS)
    bad = perturb_weight(c, (0, 1), F(1, 10**6))
    assert exact_distance_law(bad) != THREE_ATOMS.as_dict()
    assert bad.component(0).space.component(1).space.p == c.component(0).space.component(1).space.p - F(1, 10**6)


# --- infinite support --------------------------------------------------------

def test_geometric_truncation_budgets():
    spec = dyadic_geometric_spec()
    prev = None
    for delta in (F(1, 10**3), F(1, 10**6), F(1, 10**9)):
        c = build_theorem1_space(spec, delta)
        t = c.truncation
        assert t.excluded_mass / spec.zero_mass <= delta
        assert t.point_tv_bound <= delta
        law = exact_distance_law(c)
        # exact truncated law: kept atoms untouched, excluded mass moved to 0
        kept = dict(spec.prefix(t.atoms_kept))
        assert {v: p for v, p in law.items() if v != 0} == kept
        assert law[F(0)] == spec.zero_mass + t.excluded_mass
        # TV to theta is the excluded mass; atoms beyond the extended prefix carry r
        longer = spec.prefix(t.atoms_kept + 200)
        r = spec.remaining_mass(longer)
        tv = total_variation(law, {F(0): spec.zero_mass, **dict(longer)})
        assert t.excluded_mass - r <= tv <= t.excluded_mass
        if prev is not None:
            assert t.excluded_mass < prev
        prev = t.excluded_mass
        # every excluded atom lies below the reported value bound
        nxt = spec.prefix(t.atoms_kept + 1)[-1][0]
        assert nxt <= t.distance_value_bound


def test_truncated_bias_decreases_with_n():
    spec = dyadic_geometric_spec()
    bias = []
    for delta in [F(1, 2**k) for k in range(2, 20, 3)]:
        c = build_theorem1_space(spec, delta)
        bias.append(c.truncation.excluded_mass)
        assert c.truncation.excluded_mass <= delta
    assert all(a > b for a, b in zip(bias, bias[1:]))


def test_zero_free_lazy_spec_uses_distance_budget():
    spec = dyadic_geometric_spec(zero_mass=0)
    c = build_theorem1_space(spec, F(1, 10**6))
    assert c.truncation.point_tv_bound is None
    assert c.truncation.excluded_mass <= F(1, 10**6)


def test_lazy_order_contract():
    def source():
        yield F(1), F(1, 4)
        yield F(3), F(1, 4)

    bad = LazyDiscreteSpec(F(1, 2), source, lambda k: 1)
    with pytest.raises(SpecError):
        build_theorem1_space(bad, F(1, 10))


# --- properties over random specs ------------------------------------------

@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 2**32), st.integers(3, 40))
def test_round_trip_random_specs(seed, n_atoms):
    spec = random_discrete_spec(random.Random(seed), n_atoms)
    c = build_theorem1_space(spec)
    assert exact_distance_distribution(c) == list(spec.atoms)
    assert all(lhs == rhs for _, lhs, rhs in telescoping_report(c, spec))
    ok, worst = gap_condition(c)
    assert ok and structural_ranges_ok(c)
    for comp in c.components:
        total, bound = q_sum_bound(comp.space)
        assert total <= bound


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 2**32))
def test_small_random_specs_match_enumeration(seed):
    rnd = random.Random(seed)
    # keep the product small enough to enumerate every pair of points
    for _ in range(20):
        spec = random_discrete_spec(rnd, rnd.randint(2, 4), groups=range(-2, 2))
        c = build_theorem1_space(spec)
        if reachable_count(c) <= 60:
            break
    else:
        return
    law = enumerated_law(c)
    for v, p in spec.atoms:
        assert abs(law.get(v, 0.0) - float(p)) <= 1e-12
    assert check_metric_axioms(c).passed


def test_interior_accumulation_accepted():
    # atoms crowding towards 1 from above, inside one dyadic group
    atoms = [(F(0), F(1, 2))] + [(1 + F(1, 2**k), F(1, 2 ** (k + 1))) for k in range(1, 15)]
    atoms.append((F(2), 1 - sum(p for _, p in atoms)))
    spec = DiscreteSpec(tuple(sorted(atoms)))
    c = build_theorem1_space(spec)
    assert exact_distance_distribution(c) == list(spec.atoms)
