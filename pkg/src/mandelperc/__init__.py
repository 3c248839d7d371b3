"""Percolation phase diagrams of integer self-similar IFS.

Given a system of maps x -> x/L + t_i with integer base and translations,
this package builds the coding-matrix family of the system and computes the
phase structure of its coin-tossing randomization: extinction threshold,
certified brackets for the positive-Lebesgue-measure threshold (Lyapunov
exponent) and the empty-interior threshold (lower spectral radius),
interior-existence certificates, pressure-function diagnostics, and exact
plus Monte-Carlo branching-process simulation.
"""

__version__ = "0.1.0"

from .bounds import (
    Bracket,
    CriticalProbabilities,
    McEstimate,
    column_mass,
    critical_probabilities,
    exact_spectral_radius,
    lsr_bracket,
    lyapunov_bracket,
    lyapunov_mc,
)
from .branching import (
    CoverageStats,
    EnvWord,
    PgfState,
    PopulationTrajectory,
    Realization,
    coverage_stats,
    covered_positions,
    dimension_estimate,
    extinction_iterate,
    extinction_probability,
    mean_population,
    simulate_population,
    simulate_tree,
)
from .config import Budgets, RunConfig, config_from_table, default_budgets, load_config
from .errors import (
    BudgetError,
    CertificateError,
    ConsistencyError,
    MandelpercError,
    ValidationError,
)
from .examples import FAMILY_NAMES, example_family, example_spec
from .ifs import (
    BasicCells,
    CodingFamily,
    GoodnessCertificate,
    IfsSpec,
    basic_cells,
    coding_matrices,
    family_from_matrices,
    goodness_check,
    validate_ifs,
    word_product,
)
from .interior import (
    ColsumThreshold,
    InteriorCertificate,
    VectorFamily,
    binary_candidates,
    colsum_interior_threshold,
    dominance_constant,
    dominance_matrices,
    interior_threshold,
    verify_interior,
)
from .pressure import (
    InterestingInterval,
    PressureCurve,
    TypicalityCertificate,
    interesting_interval,
    pressure_asymptote,
    pressure_curve,
    pressure_right_derivative,
    typicality_check,
    word_log_norms,
)
from .render import multiplicity_counts, render_coverage, render_multiplicity
from .report import (
    PhaseReport,
    build_report,
    classify,
    report_document,
    verify_certificate_document,
)
from .serialize import Document

__all__ = [
    "BasicCells",
    "Bracket",
    "Budgets",
    "BudgetError",
    "CertificateError",
    "CodingFamily",
    "ColsumThreshold",
    "ConsistencyError",
    "CoverageStats",
    "CriticalProbabilities",
    "Document",
    "EnvWord",
    "FAMILY_NAMES",
    "GoodnessCertificate",
    "IfsSpec",
    "InteriorCertificate",
    "InterestingInterval",
    "MandelpercError",
    "McEstimate",
    "PgfState",
    "PhaseReport",
    "PopulationTrajectory",
    "PressureCurve",
    "Realization",
    "RunConfig",
    "TypicalityCertificate",
    "ValidationError",
    "VectorFamily",
    "basic_cells",
    "binary_candidates",
    "build_report",
    "classify",
    "coding_matrices",
    "colsum_interior_threshold",
    "column_mass",
    "config_from_table",
    "coverage_stats",
    "covered_positions",
    "critical_probabilities",
    "default_budgets",
    "dimension_estimate",
    "dominance_constant",
    "dominance_matrices",
    "exact_spectral_radius",
    "example_family",
    "example_spec",
    "extinction_iterate",
    "extinction_probability",
    "family_from_matrices",
    "goodness_check",
    "interesting_interval",
    "interior_threshold",
    "load_config",
    "lsr_bracket",
    "lyapunov_bracket",
    "lyapunov_mc",
    "mean_population",
    "multiplicity_counts",
    "pressure_asymptote",
    "pressure_curve",
    "pressure_right_derivative",
    "render_coverage",
    "render_multiplicity",
    "report_document",
    "simulate_population",
    "simulate_tree",
    "typicality_check",
    "validate_ifs",
    "verify_certificate_document",
    "verify_interior",
    "word_log_norms",
    "word_product",
]
