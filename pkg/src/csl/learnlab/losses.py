"""Loss zoo.

Per-example losses l(theta, z) with gradients, optional Hessians, and
vectorized mean-over-dataset paths used by the flow builders. Also the
Rosenbrock surface and its gradient / damped-Newton flows.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from ..dynsys import VectorField, vector_field
from .data import Example, TrainingSet


@dataclass(frozen=True)
class LossModel:
    """Per-example loss with gradient access.

    loss and grad take (theta, Example). The mean_* callables, when
    present, evaluate (1/n) sums over feature matrix X and labels Y in
    one vectorized call; grad_norms returns the per-example gradient
    norms at a fixed theta. All are pure.
    """

    name: str
    loss: Callable[[np.ndarray, Example], float]
    grad: Callable[[np.ndarray, Example], np.ndarray]
    hessian: Optional[Callable[[np.ndarray, Example], np.ndarray]] = None
    mean_grad: Optional[Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]] = None
    mean_hessian: Optional[Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]] = None
    grad_norms: Optional[Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]] = None


def _softplus(v):
    return np.logaddexp(0.0, v)


def quadratic_loss(gamma: float = 1.0) -> LossModel:
    """l(theta, z) = gamma/2 * ||theta - x||^2, a well centered at the features."""
    return LossModel(
        name=f"quadratic(gamma={gamma:g})",
        loss=lambda th, z: 0.5 * gamma * float(np.sum((th - z.x) ** 2)),
        grad=lambda th, z: gamma * (th - z.x),
        hessian=lambda th, z: gamma * np.eye(len(th)),
        mean_grad=lambda th, X, Y: gamma * (th - X.mean(axis=0)),
        mean_hessian=lambda th, X, Y: gamma * np.eye(len(th)),
        grad_norms=lambda th, X, Y: gamma * np.linalg.norm(th[None, :] - X, axis=1),
    )


def ridge_loss(alpha: float) -> LossModel:
    """l(theta, z) = 1/2 (x^T theta - y)^2 + alpha/2 ||theta||^2."""

    def mean_grad(th, X, Y):
        return X.T @ (X @ th - Y) / len(Y) + alpha * th

    def mean_hessian(th, X, Y):
        return X.T @ X / len(Y) + alpha * np.eye(len(th))

    def grad_norms(th, X, Y):
        r = X @ th - Y
        return np.linalg.norm(X * r[:, None] + alpha * th[None, :], axis=1)

    return LossModel(
        name=f"ridge(alpha={alpha:g})",
        loss=lambda th, z: 0.5 * float(z.x @ th - z.y) ** 2 + 0.5 * alpha * float(th @ th),
        grad=lambda th, z: z.x * float(z.x @ th - z.y) + alpha * th,
        hessian=lambda th, z: np.outer(z.x, z.x) + alpha * np.eye(len(th)),
        mean_grad=mean_grad,
        mean_hessian=mean_hessian,
        grad_norms=grad_norms,
    )


def smoothed_hinge_loss(delta: float = 0.5) -> LossModel:
    """Softplus-smoothed hinge on the margin 1 - y * x^T theta.

    C-infinity, convex, and globally Lipschitz with ||grad|| <= ||x||, so
    normalized features give a global L <= 1.
    """

    def margin(th, X, Y):
        return 1.0 - Y * (X @ th)

    def mean_grad(th, X, Y):
        w = expit(margin(th, X, Y) / delta)
        return -(X.T @ (w * Y)) / len(Y)

    def mean_hessian(th, X, Y):
        u = margin(th, X, Y) / delta
        w = expit(u) * expit(-u) / delta  # sigmoid'(u)/delta
        return (X.T * (w * Y ** 2)) @ X / len(Y)

    def grad_norms(th, X, Y):
        w = expit(margin(th, X, Y) / delta)
        return np.abs(w * Y) * np.linalg.norm(X, axis=1)

    return LossModel(
        name=f"smoothed_hinge(delta={delta:g})",
        loss=lambda th, z: delta * float(_softplus((1.0 - z.y * float(z.x @ th)) / delta)),
        grad=lambda th, z: -expit((1.0 - z.y * float(z.x @ th)) / delta) * z.y * z.x,
        hessian=lambda th, z: (
            lambda u: expit(u) * expit(-u) / delta * z.y ** 2 * np.outer(z.x, z.x)
        )((1.0 - z.y * float(z.x @ th)) / delta),
        mean_grad=mean_grad,
        mean_hessian=mean_hessian,
        grad_norms=grad_norms,
    )


def softplus_loss() -> LossModel:
    """l(theta, z) = softplus(x^T theta) - y * x^T theta, for labels in [0, 1]."""

    def mean_grad(th, X, Y):
        return X.T @ (expit(X @ th) - Y) / len(Y)

    def mean_hessian(th, X, Y):
        s = X @ th
        w = expit(s) * expit(-s)
        return (X.T * w) @ X / len(Y)

    def grad_norms(th, X, Y):
        return np.abs(expit(X @ th) - Y) * np.linalg.norm(X, axis=1)

    return LossModel(
        name="softplus",
        loss=lambda th, z: float(_softplus(float(z.x @ th)) - z.y * float(z.x @ th)),
        grad=lambda th, z: (expit(float(z.x @ th)) - z.y) * z.x,
        hessian=lambda th, z: (
            lambda s: expit(s) * expit(-s) * np.outer(z.x, z.x)
        )(float(z.x @ th)),
        mean_grad=mean_grad,
        mean_hessian=mean_hessian,
        grad_norms=grad_norms,
    )


def quadratic_well_loss() -> LossModel:
    """Separable double wells: sum_j ((theta_j - x_j)^2 - 1)^2 / 4.

    Each coordinate has isolated minima at x_j +/- 1 with locally positive
    definite Hessian, surrounded by indefinite regions.
    """

    def mean_grad(th, X, Y):
        u = th[None, :] - X
        return ((u ** 2 - 1.0) * u).mean(axis=0)

    def mean_hessian(th, X, Y):
        u = th[None, :] - X
        return np.diag((3.0 * u ** 2 - 1.0).mean(axis=0))

    def grad_norms(th, X, Y):
        u = th[None, :] - X
        return np.linalg.norm((u ** 2 - 1.0) * u, axis=1)

    return LossModel(
        name="quadratic_well",
        loss=lambda th, z: float(np.sum(((th - z.x) ** 2 - 1.0) ** 2) / 4.0),
        grad=lambda th, z: ((th - z.x) ** 2 - 1.0) * (th - z.x),
        hessian=lambda th, z: np.diag(3.0 * (th - z.x) ** 2 - 1.0),
        mean_grad=mean_grad,
        mean_hessian=mean_hessian,
        grad_norms=grad_norms,
    )


def apply_feature_map(S: TrainingSet, phi) -> TrainingSet:
    """New training set with the elementwise map phi applied to features."""
    return TrainingSet(
        Example(x=phi(np.asarray(ex.x)), y=ex.y, id=ex.id) for ex in S
    )


def gradient_check(loss: LossModel, examples, rng: np.random.Generator,
                   n_points: int = 20, scale: float = 1.0, rtol: float = 1e-6) -> float:
    """Compare loss.grad against central differences of loss.loss.

    Returns the worst relative error over random (theta, example) pairs
    and asserts it stays below rtol.
    """
    examples = list(examples)
    dim = len(examples[0].x)
    worst = 0.0
    for _ in range(n_points):
        th = scale * rng.standard_normal(dim)
        z = examples[int(rng.integers(len(examples)))]
        g = np.asarray(loss.grad(th, z))
        g_fd = np.empty(dim)
        for k in range(dim):
            h = 1e-6 * (1.0 + abs(th[k]))
            e = np.zeros(dim)
            e[k] = h
            g_fd[k] = (loss.loss(th + e, z) - loss.loss(th - e, z)) / (2.0 * h)
        err = np.linalg.norm(g - g_fd) / max(np.linalg.norm(g_fd), 1.0)
        worst = max(worst, float(err))
    assert worst <= rtol, f"gradient_check({loss.name}): relative error {worst:.3e}"
    return worst


# -- Rosenbrock surface (raw, not per-example) --------------------------------

def rosenbrock(p) -> float:
    x, y = p
    return 100.0 * (x ** 2 - y) ** 2 + (x - 1.0) ** 2


def rosenbrock_grad(p) -> np.ndarray:
    x, y = p
    return np.array([400.0 * x * (x ** 2 - y) + 2.0 * (x - 1.0), -200.0 * (x ** 2 - y)])


def rosenbrock_hessian(p) -> np.ndarray:
    x, y = p
    return np.array([
        [1200.0 * x ** 2 - 400.0 * y + 2.0, -400.0 * x],
        [-400.0 * x, 200.0],
    ])


def rosenbrock_gradient_flow() -> VectorField:
    """Plain gradient flow d theta/dt = -grad f on the Rosenbrock surface."""
    return VectorField(
        dim=2,
        eval=lambda p, t: -rosenbrock_grad(p),
        jacobian=lambda p, t: -rosenbrock_hessian(p),
    )


def rosenbrock_newton_flow(eps: float = 1e-3) -> VectorField:
    """Damped Newton flow d theta/dt = -(hess f + eps I)^{-1} grad f.

    Jacobian by finite differences (the exact one needs third derivatives).
    """

    def f(p, t):
        return -np.linalg.solve(rosenbrock_hessian(p) + eps * np.eye(2), rosenbrock_grad(p))

    return vector_field(2, f)
