"""Supervised-learning layer: data, losses, flows, bounds, experiments."""

from .bounds import (
    LipschitzEstimate,
    disturbance_bound,
    estimate_lipschitz,
    stability_bound,
)
from .data import (
    Example,
    TrainingSet,
    leave_one_out,
    load_training_set,
    replace_one,
    save_training_set,
)
from .experiments import (
    FAMILIES,
    LossFamily,
    OptimalMetricReport,
    ScalingReport,
    StabilityReport,
    bounding_ball,
    interpolating_family,
    make_family,
    measure_stability,
    optimal_metric_experiment,
    pl_constant,
    quadratic_family,
    ridge_family,
    scaling_experiment,
    smoothed_hinge_family,
    softplus_family,
    wells_family,
)
from .flows import (
    adaptive_gradient_flow,
    frozen_rho_virtual_builder,
    gradient_flow_field,
    kernel_ridge_system,
)
from .losses import (
    LossModel,
    apply_feature_map,
    gradient_check,
    quadratic_loss,
    quadratic_well_loss,
    ridge_loss,
    rosenbrock,
    rosenbrock_grad,
    rosenbrock_gradient_flow,
    rosenbrock_hessian,
    rosenbrock_newton_flow,
    smoothed_hinge_loss,
    softplus_loss,
)

__all__ = [
    "Example", "TrainingSet", "replace_one", "leave_one_out",
    "load_training_set", "save_training_set",
    "LossModel", "quadratic_loss", "ridge_loss", "smoothed_hinge_loss",
    "softplus_loss", "quadratic_well_loss", "apply_feature_map", "gradient_check",
    "rosenbrock", "rosenbrock_grad", "rosenbrock_hessian",
    "rosenbrock_gradient_flow", "rosenbrock_newton_flow",
    "gradient_flow_field", "adaptive_gradient_flow", "frozen_rho_virtual_builder",
    "kernel_ridge_system",
    "LipschitzEstimate", "estimate_lipschitz", "disturbance_bound", "stability_bound",
    "StabilityReport", "measure_stability", "bounding_ball",
    "LossFamily", "make_family", "FAMILIES", "quadratic_family", "ridge_family",
    "smoothed_hinge_family", "softplus_family", "interpolating_family", "wells_family",
    "pl_constant", "ScalingReport", "scaling_experiment",
    "OptimalMetricReport", "optimal_metric_experiment",
]
