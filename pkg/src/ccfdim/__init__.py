"""Certified Hausdorff dimension brackets for limit sets of complex
continued fraction systems with letters b = m + n*tau, m, n >= 1.

The library computes two-sided pressure bounds for truncated subsystems,
bisects them into dimension brackets [h_lo, h_hi], and runs the structural
checks (continuity, boundary maximum, asymptotics, non-constancy) that the
dimension function is expected to satisfy over the parameter half-strip.
"""

from .cache import CODE_TAG, Cache, default_cache_dir, variant_tag
from .geometry import (
    DOMAIN,
    DegenerateMapError,
    DerivBounds,
    Disk,
    Mobius,
    PoleInDomainError,
    letter_map,
    mobius_apply,
    mobius_compose,
    mobius_deriv_bounds,
    word_deriv_logs,
    word_map,
)
from .limitset import (
    BoxCountResult,
    DegenerateFitError,
    PointCloud,
    XInfinityReport,
    box_counting_dim,
    closure_count,
    closure_points,
    default_scales,
    generate_points,
    tail_image_radius,
    verify_x_infinity,
)
from .pressure import (
    WORD_BUDGET_DEFAULT,
    BudgetError,
    NormHistogram,
    PressureBracket,
    RungEvaluator,
    ThetaReport,
    norm_histogram,
    pressure_bracket,
    psi1_partial,
    psi1_tail_bound,
    psi_n_bounds,
    theta_diagnostic,
)
from .solver import (
    BisectResult,
    DimensionBracket,
    Rung,
    SignChangeError,
    SolverConfig,
    bisect_zero,
    dimension_bracket,
    refine_ladder,
    solve_rung,
)
from .sweep import (
    AnalysisReport,
    CheckEntry,
    SweepGrid,
    asymptotic_check,
    boundary_max_check,
    continuity_check,
    non_constancy_check,
    subharmonic_check,
    sweep_grid,
)
from .system import (
    DomainError,
    GeometryReport,
    Letter,
    Parameter,
    apply_letter,
    certify_invariant,
    invariant_disk,
    letter_grid,
    ratio_constants,
    validate_parameter,
    verify_geometry,
)

__version__ = "0.1.0"
