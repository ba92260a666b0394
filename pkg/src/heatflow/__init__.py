"""Zeros of heat-evolved polynomial powers and their limiting distribution."""

from .polyheat import (
    HeatTime,
    PolySpec,
    ScaledCoeffPoly,
    contour_eval,
    eval_log,
    expand_power,
    heat_evolve,
    heat_evolve_series,
    rotated_spec,
)
from .precision import default_bits, unit_roundoff, working_prec
from .roots import EmpiricalMeasure, find_all_roots, solve_poly, support_bound_check

__version__ = "0.1.0"
