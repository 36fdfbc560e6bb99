"""Explicit measured metric spaces whose independent-pair distance follows a given law."""

from .bernoulli import BernoulliSpace, bernoulli_distance, sample_symbol, solve_bernoulli_params
from .distributions import (
    DensitySpec,
    DiscreteSpec,
    LazyDiscreteSpec,
    SpecError,
    cdf,
    parse_spec,
    quantile,
)
from .selection import (
    SelectionConstruction,
    SpacePoint,
    build_interval_space,
    build_theorem1_space,
    exact_distance_distribution,
    sample_distance,
    sample_point,
    selection_distance,
    split_index,
)
from .subadditive import (
    PowerLawBase,
    TransformRecord,
    build_transform,
    check_pinched_composition,
    fw_hypergeometric,
    fw_quadrature,
    sample_theta,
)

__version__ = "0.1.0"
