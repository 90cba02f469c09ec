"""Certified topological-entropy bounds for one-dimensional dynamics.

Exact rational interval arithmetic underneath; every reported bound is a
rigorous enclosure.
"""

from .numkit import (
    IterMapExpr,
    RatInterval,
    Rational,
    RootIsolation,
    critical_orbit_expr,
    exp2_enclosure,
    log2_enclosure,
    orbit_value_expr,
    parse_rational,
    periodic_point_expr,
    root_isolate,
)
from .symbolic import (
    SFT,
    EntropyBound,
    MixingVerdict,
    Provenance,
    check_mixing,
    count_words,
    glue_prefix_maps,
    prefix_decode,
    prefix_encode,
    sft_entropy,
)
from .interval_maps import (
    PWLMap,
    QuadMap,
    compose_iterate,
    constant_slope_map,
    entropy_via_variation,
    identity_map,
    slope_detect,
    staircase_map,
    tent_map,
    variation,
)
from .horseshoe import (
    HorseshoeCert,
    LowerBoundRecord,
    SearchBudget,
    check_certificate,
    search_lower_bounds,
)
from .logistic import (
    BracketSample,
    BudgetExceeded,
    Center,
    CenterCache,
    SandwichBudget,
    attracting_cycle_at,
    collect_brackets,
    enumerate_centers,
    logistic_entropy,
    markov_partition,
)

__version__ = "0.1.0"
