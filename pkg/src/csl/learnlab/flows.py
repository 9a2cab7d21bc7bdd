"""Optimizer flow builders.

Sum-separable gradient flows d theta/dt = -alpha(t) P^{-1} (1/n) sum grad l,
adaptive-rate variants, and the kernel ridge system (G, J, lambda_I).
"""
from __future__ import annotations

import numpy as np

from ..dynsys import Trajectory, VectorField, _fd_jacobian
from ..errors import MissingHessian
from ..matcalc import Metric
from .data import TrainingSet
from .losses import LossModel


def _mean_grad_fn(loss: LossModel, S: TrainingSet):
    X, Y = S.features, S.labels
    if loss.mean_grad is not None:
        return lambda th: loss.mean_grad(th, X, Y)
    return lambda th: sum(loss.grad(th, z) for z in S) / S.n


def _mean_hessian_fn(loss: LossModel, S: TrainingSet):
    X, Y = S.features, S.labels
    if loss.mean_hessian is not None:
        return lambda th: loss.mean_hessian(th, X, Y)
    if loss.hessian is not None:
        return lambda th: sum(np.asarray(loss.hessian(th, z)) for z in S) / S.n
    return None


def gradient_flow_field(loss: LossModel, S: TrainingSet, preconditioner: Metric | None = None,
                        schedule=None, exact_jacobian: bool = False) -> VectorField:
    """Gradient flow of the empirical loss over S.

    Evaluates -alpha(t) * P^{-1} * (1/n) sum_i grad l(theta, z_i); with no
    schedule alpha = 1, with no preconditioner P = I. The Jacobian uses
    the loss Hessians when available, otherwise central differences of
    the field; exact_jacobian=True makes a missing Hessian an error.
    """
    dim = S.dim
    mean_grad = _mean_grad_fn(loss, S)
    mean_hess = _mean_hessian_fn(loss, S)
    if exact_jacobian and mean_hess is None:
        raise MissingHessian(f"gradient_flow_field: loss {loss.name} has no Hessian")
    Pinv = np.linalg.inv(preconditioner.M) if preconditioner is not None else None
    alpha = schedule if schedule is not None else (lambda t: 1.0)

    def f(th, t):
        g = mean_grad(th)
        if Pinv is not None:
            g = Pinv @ g
        return -alpha(t) * g

    if mean_hess is not None:
        def jac(th, t):
            H = mean_hess(th)
            if Pinv is not None:
                H = Pinv @ H
            return -alpha(t) * H
    else:
        jac = _fd_jacobian(f, dim, 1e-6)

    return VectorField(dim=dim, eval=f, jacobian=jac)


def adaptive_gradient_flow(loss: LossModel, S: TrainingSet, rho) -> VectorField:
    """Flow d theta/dt = -rho(theta, t) * (1/n) sum grad l, rho >= rho_min > 0.

    Jacobian by finite differences (rho may be state-dependent).
    """
    mean_grad = _mean_grad_fn(loss, S)

    def f(th, t):
        return -rho(th, t) * mean_grad(th)

    return VectorField(dim=S.dim, eval=f, jacobian=_fd_jacobian(f, S.dim, 1e-6))


def frozen_rho_virtual_builder(loss: LossModel, S: TrainingSet, rho):
    """Virtual-system builder for the adaptive flow: rho frozen along x(t).

    Returns a builder mapping a frozen x-trajectory to the vector field
    y -> -rho(x(t), t) * (1/n) sum grad l(y, z_i), which agrees with the
    adaptive flow on the diagonal y = x(t).
    """
    mean_grad = _mean_grad_fn(loss, S)
    mean_hess = _mean_hessian_fn(loss, S)

    def builder(x_traj: Trajectory) -> VectorField:
        def g(y, t):
            return -rho(x_traj.state_at(t), t) * mean_grad(y)

        if mean_hess is not None:
            jac = lambda y, t: -rho(x_traj.state_at(t), t) * mean_hess(y)
        else:
            jac = _fd_jacobian(g, S.dim, 1e-6)
        return VectorField(dim=S.dim, eval=g, jacobian=jac)

    return builder


def kernel_ridge_system(X, y, alpha: float, feature_map=None):
    """Gram matrix, optimizer Jacobian, and identity-metric rate.

    G = (1/n) phi(X)^T phi(X) with an elementwise feature map phi,
    J = -(G + alpha I), lambda_I = eig_min(G) + alpha. Requires alpha > 0.
    """
    X = np.asarray(X, dtype=float)
    Phi = feature_map(X) if feature_map is not None else X
    n = Phi.shape[0]
    G = Phi.T @ Phi / n
    J = -(G + alpha * np.eye(G.shape[0]))
    lambda_I = float(np.linalg.eigvalsh(G)[0] + alpha)
    return G, J, lambda_I
