"""recdist: exact distributions of divide-and-conquer recurrences and their
normal-approximation diagnostics."""

from .catalog import CatalogEntry, broadcast_index_pmf, leader_election_rounds, make
from .clt import (
    AccompanyingLaw,
    CltParams,
    RateFit,
    RateGate,
    accompanying_law,
    check_conditions,
    fit_rate,
    kolmogorov_to_normal,
    log_power_ratio_check,
    padded_log,
    rate_exponent,
    rate_transfer_check,
    standardized_law,
    surrogate_gap_terms,
    zeta3_accompanying,
    zeta3_standardized,
    zeta3_to_normal,
)
from .engine import (
    MomentRow,
    RecurrenceSpec,
    SolveOptions,
    Solver,
    VectorGroup,
    exact_distribution,
    moment_table,
    sample,
    sample_many,
    spec_from_json,
)
from .errors import (
    CapacityError,
    DivergenceError,
    MomentMismatchError,
    PreconditionError,
    RecdistError,
    UnsupportedExactError,
)
from .fixed_point import (
    LimitEquation,
    PopulationResult,
    dickman_equation,
    dickman_reference_moments,
    iterate_population,
    normal_characterization_iterate,
    quickselect_equation,
)
from .metrics import (
    MetricReport,
    NormalMixture,
    PiecewiseCubic,
    kolmogorov,
    normal_partial_square_moment,
    random_smooth_member,
    wasserstein1,
    zeta3,
    zeta3_lower_probe,
)
from .pmf import Pmf

__version__ = "0.1.0"

__all__ = [
    "AccompanyingLaw",
    "CapacityError",
    "CatalogEntry",
    "CltParams",
    "DivergenceError",
    "LimitEquation",
    "MetricReport",
    "MomentMismatchError",
    "MomentRow",
    "NormalMixture",
    "PiecewiseCubic",
    "Pmf",
    "PopulationResult",
    "PreconditionError",
    "RateFit",
    "RateGate",
    "RecdistError",
    "RecurrenceSpec",
    "SolveOptions",
    "Solver",
    "UnsupportedExactError",
    "VectorGroup",
    "accompanying_law",
    "broadcast_index_pmf",
    "check_conditions",
    "dickman_equation",
    "dickman_reference_moments",
    "exact_distribution",
    "fit_rate",
    "iterate_population",
    "kolmogorov",
    "kolmogorov_to_normal",
    "leader_election_rounds",
    "log_power_ratio_check",
    "make",
    "moment_table",
    "normal_characterization_iterate",
    "normal_partial_square_moment",
    "padded_log",
    "quickselect_equation",
    "random_smooth_member",
    "rate_exponent",
    "rate_transfer_check",
    "sample",
    "sample_many",
    "spec_from_json",
    "standardized_law",
    "surrogate_gap_terms",
    "wasserstein1",
    "zeta3",
    "zeta3_accompanying",
    "zeta3_lower_probe",
    "zeta3_standardized",
    "zeta3_to_normal",
]
