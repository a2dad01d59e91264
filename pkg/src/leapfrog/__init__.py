"""Exact planning of jump moves ("leapfrog") for point configurations in R^d.

A particle may jump over another, landing at its mirror image.  The package
decides whether the differences of a configuration generate a dense subgroup
of R^d, builds explicit move plans that bring every particle within a chosen
distance of a target, and replays plans in exact arithmetic.
"""
from .goodmat import (
    Elementary,
    NotGoodError,
    Step,
    factor_good,
    is_good,
    normalize_to_en,
    reduce_vector,
    step_to_elementary,
    triangularize,
)
from .kinematics import (
    Configuration,
    Move,
    Plan,
    apply_move,
    bfs_reachable,
    compile_plan,
    compile_stationary,
    simulate,
    translation_gadget,
    verify,
)
from .lattice import (
    DensityVerdict,
    Effort,
    EffortExhausted,
    approx_cvp,
    density_certificate,
    lll_reduce,
    short_parity_vector,
    validate_instance,
)
from .planner import ApproxResult, PlanCertificate, approx_good, approx_zero_lastcol, plan_certificate
from .scalar import Scalar, eval_interval, parse_scalar, sqrt

__all__ = [
    "ApproxResult", "Configuration", "DensityVerdict", "Effort", "EffortExhausted", "Elementary",
    "Move", "NotGoodError", "Plan", "PlanCertificate", "Scalar", "Step", "apply_move",
    "approx_cvp", "approx_good", "approx_zero_lastcol", "bfs_reachable", "compile_plan",
    "compile_stationary", "density_certificate", "eval_interval", "factor_good", "is_good",
    "lll_reduce", "normalize_to_en", "parse_scalar", "plan_certificate", "reduce_vector",
    "short_parity_vector", "simulate", "sqrt", "step_to_elementary", "translation_gadget",
    "triangularize", "validate_instance", "verify",
]
