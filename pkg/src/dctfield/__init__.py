"""Scalar-field estimation from quantized point measurements.

Fields on a rectangular grid are modeled by a truncated orthonormal cosine
expansion; an online Newton recursion with per-step ridge damping and a
forgetting factor estimates the rescaled mode coefficients from multi-level
quantized samples, while an active-sensing planner steers the measuring
vehicle toward the least-informed parameter directions.
"""

from ._kernels import NUMBA_ENABLED
from ._version import __version__
from .dct import (
    DctCoefficients,
    ModeSet,
    basis_table,
    basis_vector,
    coeffs_on_modes,
    forward_dct,
    inverse_dct,
    modeled_field,
    scale_coeffs,
    select_modes_largest,
    select_modes_rect,
    truncated_field,
    truncation_mse,
    unscale_coeffs,
)
from .estimator import (
    EstimatorConfig,
    EstimatorError,
    EstimatorState,
    initial_state,
    newton_update,
    per_stage_cost,
    per_stage_gradient,
    per_stage_hessian,
    refine_modes,
    regularized_hessian,
)
from .grid import FieldGrid, GridSpec
from .harness import (
    FieldRecipe,
    RunRecord,
    ScenarioConfig,
    SwitchEvent,
    compare_models,
    generate_field,
    run_scenario,
    run_single,
)
from .metrics import SsimParams, mse, ssim
from .planner import (
    PlannerConfig,
    VehicleState,
    advance,
    candidate_lattice,
    initial_vehicle,
    predicted_hessian,
    select_target,
)
from .rbf import RbfFitError, RbfModel, fit_rbf, rbf_eval, rbf_eval_grid, rbf_grid_layout
from .sensing import NoiseModel, Quantizer, measure, quantize

__all__ = [
    "NUMBA_ENABLED",
    "DctCoefficients",
    "ModeSet",
    "basis_table",
    "basis_vector",
    "coeffs_on_modes",
    "forward_dct",
    "inverse_dct",
    "modeled_field",
    "scale_coeffs",
    "select_modes_largest",
    "select_modes_rect",
    "truncated_field",
    "truncation_mse",
    "unscale_coeffs",
    "EstimatorConfig",
    "EstimatorError",
    "EstimatorState",
    "initial_state",
    "newton_update",
    "per_stage_cost",
    "per_stage_gradient",
    "per_stage_hessian",
    "refine_modes",
    "regularized_hessian",
    "FieldGrid",
    "GridSpec",
    "FieldRecipe",
    "RunRecord",
    "ScenarioConfig",
    "SwitchEvent",
    "compare_models",
    "generate_field",
    "run_scenario",
    "run_single",
    "SsimParams",
    "mse",
    "ssim",
    "PlannerConfig",
    "VehicleState",
    "advance",
    "candidate_lattice",
    "initial_vehicle",
    "predicted_hessian",
    "select_target",
    "RbfFitError",
    "RbfModel",
    "fit_rbf",
    "rbf_eval",
    "rbf_eval_grid",
    "rbf_grid_layout",
    "NoiseModel",
    "Quantizer",
    "measure",
    "quantize",
]
