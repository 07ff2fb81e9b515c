"""Interactive reflection suppression for single photographs."""

from ._kernels import BACKEND_NAME
from .image import (
    DimensionError,
    Gradients,
    gradient,
    gradient_adjoint,
    laplacian,
    laplacian_adjoint,
    load_image,
    save_image,
)
from .metrics import MetricsReport, evaluate_pair, lmse, psnr, slmse, ssim
from .selection import default_mask, load_mask, local_threshold, save_mask
from .solver import (
    NumericalError,
    SolveTrace,
    SolverParams,
    aux_objective_value,
    beta_schedule,
    fidelity_value,
    objective_value,
    prior_value,
    solve_d_subproblem,
    solve_t_subproblem,
    suppress,
    t_subproblem_gradient,
)
from .synth import SyntheticSceneParams, compose_scene, gaussian_blur, make_scene

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "DimensionError",
    "Gradients",
    "MetricsReport",
    "NumericalError",
    "SolveTrace",
    "SolverParams",
    "SyntheticSceneParams",
    "aux_objective_value",
    "beta_schedule",
    "compose_scene",
    "default_mask",
    "evaluate_pair",
    "fidelity_value",
    "gaussian_blur",
    "gradient",
    "gradient_adjoint",
    "laplacian",
    "laplacian_adjoint",
    "lmse",
    "load_image",
    "load_mask",
    "local_threshold",
    "make_scene",
    "objective_value",
    "prior_value",
    "psnr",
    "save_image",
    "save_mask",
    "slmse",
    "solve_d_subproblem",
    "solve_t_subproblem",
    "ssim",
    "suppress",
    "t_subproblem_gradient",
]
