"""Computations on the Siegel upper half-space H_g and the action of Sp(2g, Z).

Submodules:

- ``symplectic``: exact integer arithmetic in Sp(2g)
- ``geometry``: points of H_g, the action, heights, fundamental-domain membership
- ``reduction``: Minkowski and Siegel reduction
- ``volume``: invariant metric and areas of holomorphic curves
- ``counting``: height-bounded enumeration of Sp(2g, Z)
- ``cm``: reduced binary quadratic forms and CM points
- ``harness``: the seeded scoreboard suite
"""

from .cm import QuadraticForm, class_number, cm_point, cm_survey, reduced_forms
from .counting import CountQuery, count_filtered, enumerate_symplectic, growth_fit
from .errors import (
    BudgetExceededError,
    DegenerateFitError,
    DomainPreconditionError,
    GenusMismatchError,
    MalformedInputError,
    NotPositiveDefiniteError,
    NotSymplecticError,
    PrecisionError,
    SiegelError,
    UnknownPredicateError,
    UnsupportedGenusError,
)
from .fits import BoundFit, fit_loglog
from .geometry import (
    SiegelPoint,
    act,
    in_fundamental_domain,
    make_point,
    norm_h,
    symplectic_identity_residual,
    transformed_imag_inverse,
)
from .harness import Scoreboard, SuiteConfig, export_report, run_suite
from .reduction import minkowski_reduce, siegel_reduce
from .symplectic import (
    SymplecticMatrix,
    generators,
    height,
    is_symplectic,
    sympl_inv,
    sympl_mul,
)
from .volume import (
    CurveChart,
    SamplingConfig,
    VolumeEstimate,
    boundary_volume_profile,
    comparison_bound_check,
    curve_area_element,
    curve_volume_in_domain,
    metric_at,
)

__version__ = "0.1.0"

__all__ = [
    "BoundFit", "BudgetExceededError", "CountQuery", "CurveChart", "DegenerateFitError",
    "DomainPreconditionError", "GenusMismatchError", "MalformedInputError",
    "NotPositiveDefiniteError", "NotSymplecticError", "PrecisionError", "QuadraticForm",
    "SamplingConfig", "Scoreboard", "SiegelError", "SiegelPoint", "SuiteConfig",
    "SymplecticMatrix", "UnknownPredicateError", "UnsupportedGenusError", "VolumeEstimate",
    "act", "boundary_volume_profile", "class_number", "cm_point", "cm_survey",
    "comparison_bound_check", "count_filtered", "curve_area_element", "curve_volume_in_domain",
    "enumerate_symplectic", "export_report", "fit_loglog", "generators", "growth_fit", "height",
    "in_fundamental_domain", "is_symplectic", "make_point", "metric_at", "minkowski_reduce",
    "norm_h", "reduced_forms", "run_suite", "siegel_reduce", "symplectic_identity_residual",
    "sympl_inv", "sympl_mul", "transformed_imag_inverse",
]
