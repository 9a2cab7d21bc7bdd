"""Stability-bound calculators and Lipschitz estimation.

The regimes cover: generic contraction, strongly convex gradient descent
(plain and preconditioned), convex losses under a learning-rate schedule,
adaptive rates via partial contraction, the PL condition, and Lyapunov
functions with quadratic growth.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NonPositiveParameter, UnknownRegime
from ..matcalc import Metric
from .data import TrainingSet
from .losses import LossModel

REGIMES = (
    "generic_contraction",
    "strongly_convex_gd",
    "preconditioned",
    "convex_schedule",
    "adaptive_rate",
    "pl_condition",
    "lyapunov_quadratic_growth",
)


@dataclass(frozen=True)
class LipschitzEstimate:
    """Sampled sup of ||grad l|| over a compact region and candidate examples.

    L is the loss Lipschitz constant; xi bounds the per-example update
    norm (equal to L for plain gradient flows, ||P^{-1}|| * L for
    preconditioned ones). Monotone nondecreasing in the region.
    """

    L: float
    xi: float
    omega: dict


def estimate_lipschitz(loss: LossModel, S: TrainingSet, z_candidates=(),
                       omega_sampler=None, n_samples: int = 256, seed: int = 0,
                       preconditioner: Metric | None = None) -> LipschitzEstimate:
    """L = max over sampled theta in Omega and z in S + candidates of ||grad l||."""
    if n_samples < 1:
        raise ValueError("estimate_lipschitz: n_samples must be >= 1")
    if omega_sampler is None:
        raise ValueError("estimate_lipschitz: an omega_sampler region is required")
    rng = np.random.default_rng(seed)
    thetas = omega_sampler.sample(rng, n_samples)
    candidates = list(z_candidates)
    X = np.vstack([S.features] + [z.x[None, :] for z in candidates]) if candidates else S.features
    Y = np.concatenate([S.labels, [z.y for z in candidates]]) if candidates else S.labels
    L = 0.0
    if loss.grad_norms is not None:
        for th in thetas:
            L = max(L, float(np.max(loss.grad_norms(th, X, Y))))
    else:
        examples = list(S) + candidates
        for th in thetas:
            for z in examples:
                L = max(L, float(np.linalg.norm(loss.grad(th, z))))
    xi = L * float(np.linalg.norm(np.linalg.inv(preconditioner.M), 2)) if preconditioner else L
    return LipschitzEstimate(L=L, xi=xi, omega=omega_sampler.describe())


def disturbance_bound(lip: LipschitzEstimate, n: int, mode: str = "replace_one") -> float:
    """Replace-one disturbance 2 xi / n; leave-one-out halves it to xi / n."""
    if n < 1:
        raise NonPositiveParameter("disturbance_bound: n must be >= 1")
    if mode == "replace_one":
        return 2.0 * lip.xi / n
    if mode == "leave_one_out":
        return lip.xi / n
    raise ValueError(f"disturbance_bound: unknown mode {mode!r}")


def _require_positive(**params):
    for name, value in params.items():
        if value is None or value <= 0:
            raise NonPositiveParameter(f"stability_bound: {name} must be positive, got {value}")


def stability_bound(regime: str, *, n=None, L=None, xi=None, chi=1.0, lam=None,
                    C=0.0, t=None, gamma=None, p_min=None, p_max=None,
                    schedule=None, T=None, h=1e-3, rho_min=None, mu=None,
                    beta=None, V0=None, lyap_lipschitz=None, theta_gap=0.0) -> float:
    """Theoretical stability bound for the requested regime.

    With t omitted the asymptotic bound is returned (transient terms
    dropped). The convex_schedule regime integrates the schedule by the
    composite trapezoid rule with step h up to time T.
    """
    if regime == "generic_contraction":
        _require_positive(n=n, L=L, xi=xi, chi=chi, lam=lam)
        eps = 2.0 * chi * L * xi / (lam * n)
        if t is not None:
            eps += chi * L * C * math.exp(-lam * t)
        return eps
    if regime == "strongly_convex_gd":
        _require_positive(n=n, L=L, gamma=gamma)
        return 2.0 * L * L / (gamma * n)
    if regime == "preconditioned":
        _require_positive(n=n, L=L, gamma=gamma, p_min=p_min, p_max=p_max)
        return math.sqrt(p_max ** 3 / p_min) * (2.0 * L * L / (gamma * n))
    if regime == "convex_schedule":
        _require_positive(n=n, L=L, T=T, h=h)
        if schedule is None:
            raise NonPositiveParameter("stability_bound: convex_schedule needs a schedule")
        ts = np.linspace(0.0, T, max(1, int(round(T / h))) + 1)
        integral = float(np.trapezoid([schedule(s) for s in ts], ts))
        return (2.0 * L * L / n) * integral
    if regime == "adaptive_rate":
        _require_positive(n=n, L=L, xi=xi, chi=chi, lam=lam, rho_min=rho_min)
        return 2.0 * chi * L * xi / (rho_min * lam * n)
    if regime == "pl_condition":
        _require_positive(n=n, L=L, mu=mu)
        return 4.0 * L * L / (mu * n)
    if regime == "lyapunov_quadratic_growth":
        _require_positive(n=n, L=L, xi=xi, mu=mu, beta=beta, lyap_lipschitz=lyap_lipschitz)
        inside = 2.0 * lyap_lipschitz * xi / (n * beta * mu)
        if t is not None:
            if V0 is None or V0 < 0:
                raise NonPositiveParameter("stability_bound: V0 must be >= 0 when t is given")
            inside += V0 * math.exp(-beta * t)
        return L * (theta_gap + math.sqrt(inside))
    raise UnknownRegime(f"stability_bound: unknown regime {regime!r}")
