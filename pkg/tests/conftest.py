import random
from fractions import Fraction

import pytest

from distspace.distributions import DiscreteSpec

# lines collected by the acceptance suite, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def random_discrete_spec(rng: random.Random, n_atoms: int, groups=range(-6, 5)) -> DiscreteSpec:
    """Finite spec with ``n_atoms`` atoms (0 included) at random dyadic placements."""
    values = set()
    while len(values) < n_atoms - 1:
        g = rng.choice(list(groups))
        den = rng.choice([2, 3, 5, 7, 16, 100])
        values.add(Fraction(2) ** g * (1 + Fraction(rng.randint(1, den), den)))
    weights = [rng.randint(1, 1000) for _ in range(n_atoms)]
    total = sum(weights)
    probs = [Fraction(w, total) for w in weights]
    atoms = [(Fraction(0), probs[0])] + list(zip(sorted(values), probs[1:]))
    return DiscreteSpec(tuple(atoms))


@pytest.fixture
def spec_rng():
    return random.Random(20261018)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
