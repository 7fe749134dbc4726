"""Numerical laboratory for interval exchange transformations and
skew-products over cocycles with logarithmic singularities."""

__version__ = "0.1.0"

from .errors import (
    BudgetExceeded,
    ConfigError,
    DegenerateStep,
    DomainError,
    IetLabError,
    InvalidArgument,
    InvalidSuspension,
    SingularEvaluation,
    StageDependencyError,
    StructuralError,
)
from .iet import (
    Iet,
    Permutation,
    check_keane,
    discontinuities,
    golden_rotation,
    involution,
    make_symmetric_permutation,
    orbit_with_gaps,
    translation_vector,
)
from .rauzy import induce, induction_states, scan_good_times
from .cocycle import LogCocycle, birkhoff_sum, make_log_cocycle, make_odd_cocycle
from .towers import audit_tower, build_Xi
from .involution import build_polygon, locate_center_shifts
from .ergodicity import run_criterion, tightness_integral, oscillation_integral
