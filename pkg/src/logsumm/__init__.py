"""Logarithmic summability: transforms, Tauberian checks, strong-law and number-theory labs."""

__version__ = "0.1.0"

from .errors import CapacityError, DomainError, HorizonError, LogsummError, TruncationError
from .special_functions import lambert_w, log_integral, normal_cdf, phi, phi_inv
from .sequences import Sequence, parse_sequence
from .laws import LawSpec, parse_law
from .transforms import (
    TransformResult,
    L_transform,
    abel_transform,
    borel_transform,
    cesaro1_transform,
    dn_identity_check,
    ell_from_movavg_chain,
    ell_transform,
    equivalence_drift,
    evaluate,
    movavg_transform,
    p_method_transform,
    regularity_row_sum,
    riesz_log_transform,
    uniformity_profile,
)
from .tauberian import (
    ConditionProfile,
    moricz_conditions,
    one_sided_condition,
    thm4_condition_ii,
    thm6_gap_condition,
)
from .lln_lab import SimReport, exceedance_series, moment_check, simulate_statement, truncated_mean
from .asclt_lab import AscltCurve, asclt_curve
from .number_theory import (
    DensityReport,
    IntegerSetSpec,
    SieveTable,
    build_sieve,
    density_report,
    mangoldt_weighted_sum,
    mertens_sum,
    parse_set,
    pnt_hierarchy_report,
)
