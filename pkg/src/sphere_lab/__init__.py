"""Exact-arithmetic laboratory for integer points on spheres.

Core surfaces: shell enumeration with a signed-permutation cache
(`lattice`), exact additive energy via orbit-reduced sum histograms
(`energy`), sum-hyperplane incidence checks (`incidence`), correlated-triple
Gram counts (`gram`), finite-field and p-adic local densities (`density`),
and the fitting/report layer (`experiments`).  `suites` bundles the named
end-to-end checks, and `service`/`cli` expose everything over HTTP and a
thin command-line client.
"""

__version__ = "0.1.0"

from .errors import (
    ArithmeticOverflow,
    BadDimension,
    BadSpec,
    BadSubspace,
    BudgetExceeded,
    CacheMiss,
    DegenerateSum,
    FormatCorrupt,
    IoFailure,
    NonPositive,
    OutOfRange,
    SphereLabError,
    TooFewPoints,
    UsageError,
)
from .lattice import (
    PointSet,
    Shell,
    enumerate_paraboloid,
    enumerate_shell,
    load_or_enumerate,
    scale_parameter,
    shell_point_set,
    shell_size,
)
from .energy import (
    EnergyResult,
    RepHistogram,
    additive_energy,
    l_fold_energy,
    rep_histogram,
    shell_energy,
    subset_energy_experiment,
)
from .incidence import (
    AffineSubspace,
    Hyperplane,
    IncidenceReport,
    SumFamily,
    check_lemma_4d,
    check_lemma_5d,
    hyperplane_for_sum,
    incidences,
    pairwise_multiplicity,
    prop23_report,
    subspace_concentration_5d,
    sum_hyperplane_family,
)
from .gram import (
    GramTarget,
    count_gram_solutions,
    count_quadruples_5d,
    degenerate_breakdown_5d,
    lambda_ab_target,
    singular_case_sum_4d,
    sum_N_ab,
)
from .density import (
    DensityEstimate,
    count_mod_pr,
    gcd_sum,
    good_prime_bound_check,
    local_density,
    mass_consistency,
    orthogonal_chain_count,
    quadric_count_closed_form,
)
from .experiments import (
    CoefficientMap,
    ExperimentConfig,
    FitResult,
    even_moment,
    fit_exponent,
    grid_level_sets,
    run_experiment,
)
from .suites import CRITERIA, SuiteResult, run_all, run_criterion

__all__ = [
    "__version__",
    # errors
    "SphereLabError", "UsageError", "BadDimension", "BadSpec", "DegenerateSum",
    "OutOfRange", "BadSubspace", "TooFewPoints", "NonPositive", "BudgetExceeded",
    "ArithmeticOverflow", "IoFailure", "FormatCorrupt", "CacheMiss",
    # lattice
    "Shell", "PointSet", "enumerate_shell", "shell_point_set", "shell_size",
    "enumerate_paraboloid", "scale_parameter", "load_or_enumerate",
    # energy
    "EnergyResult", "RepHistogram", "additive_energy", "shell_energy",
    "l_fold_energy", "rep_histogram", "subset_energy_experiment",
    # incidence
    "Hyperplane", "SumFamily", "IncidenceReport", "AffineSubspace",
    "hyperplane_for_sum", "sum_hyperplane_family", "incidences",
    "pairwise_multiplicity", "check_lemma_4d", "check_lemma_5d",
    "prop23_report", "subspace_concentration_5d",
    # gram
    "GramTarget", "lambda_ab_target", "count_gram_solutions", "sum_N_ab",
    "singular_case_sum_4d", "count_quadruples_5d", "degenerate_breakdown_5d",
    # density
    "DensityEstimate", "quadric_count_closed_form", "orthogonal_chain_count",
    "count_mod_pr", "local_density", "good_prime_bound_check",
    "mass_consistency", "gcd_sum",
    # experiments
    "FitResult", "CoefficientMap", "ExperimentConfig", "fit_exponent",
    "even_moment", "grid_level_sets", "run_experiment",
    # suites
    "CRITERIA", "SuiteResult", "run_criterion", "run_all",
]
