"""Paired-trajectory stability experiments.

measure_stability integrates the flows on S and on a replace-one S' with
the identical stepper and records distance curves, the sup loss gap over
a finite probe set, and the theoretical envelope. scaling_experiment
sweeps n and fits the 1/n law; optimal_metric_experiment reproduces the
random-Q metric comparison for kernel ridge regression.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..dynsys import BallRegion, integrate
from ..errors import NonPositiveParameter
from ..matcalc import (
    Metric,
    contraction_rate,
    geodesic_distance,
    identity_metric,
    random_spd,
    solve_lyapunov,
)
from .bounds import estimate_lipschitz, stability_bound
from .data import Example, TrainingSet, replace_one
from .losses import (
    LossModel,
    quadratic_loss,
    quadratic_well_loss,
    ridge_loss,
    smoothed_hinge_loss,
    softplus_loss,
)
from .flows import gradient_flow_field


@dataclass(frozen=True)
class StabilityReport:
    """Measured curves, sup loss gap, and the theoretical envelope.

    The sup over z in the stability definition is approximated by the
    finite set S + S' + probe, so the JSON field is named
    sup_loss_gap_over_probe.
    """

    times: np.ndarray
    dist_curve: np.ndarray
    geo_curve: Optional[np.ndarray]
    sup_loss_gap: float
    bound_curve: np.ndarray
    regime: str
    params: dict
    init: dict

    @property
    def final_dist(self) -> float:
        return float(self.dist_curve[-1])

    def to_json_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "dist_curve": self.dist_curve.tolist(),
            "geo_curve": None if self.geo_curve is None else self.geo_curve.tolist(),
            "sup_loss_gap_over_probe": self.sup_loss_gap,
            "bound_curve": self.bound_curve.tolist(),
            "regime": self.regime,
            "params": self.params,
            "init": self.init,
        }

    def curves_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["t", "dist", "bound"] + (["geo"] if self.geo_curve is not None else [])
            writer.writerow(header)
            for k, t in enumerate(self.times):
                row = [repr(float(t)), repr(float(self.dist_curve[k])),
                       repr(float(self.bound_curve[k]))]
                if self.geo_curve is not None:
                    row.append(repr(float(self.geo_curve[k])))
                writer.writerow(row)


def bounding_ball(states, inflate: float = 0.1) -> BallRegion:
    """Smallest centered ball around the visited states, inflated by 10%."""
    states = np.asarray(states, dtype=float)
    center = states.mean(axis=0)
    radius = float(np.max(np.linalg.norm(states - center, axis=1)))
    return BallRegion(center, (radius + 1e-6) * (1.0 + inflate))


def measure_stability(loss: LossModel, S: TrainingSet, i: int, z_new: Example,
                      theta0, t_end: float, h: float, metric: Metric | None = None,
                      probe_set=(), preconditioner: Metric | None = None,
                      schedule=None, field_builder=None, bound_params: dict | None = None,
                      theta0_prime=None, regime: str = "generic_contraction",
                      lipschitz_samples: int = 128, seed: int = 0) -> StabilityReport:
    """Paired-trajectory replace-one experiment.

    Both flows are integrated with the identical fixed-step stepper from
    theta0 (C = 0) or from (theta0, theta0_prime) to exercise a nonzero
    initial spread. The bound curve uses supplied bound_params (chi, lam,
    L, xi) or estimates them post hoc on the visited region.
    """
    S_prime = replace_one(S, i, z_new)
    if field_builder is None:
        field_builder = lambda S_: gradient_flow_field(loss, S_, preconditioner, schedule)
    field_S = field_builder(S)
    field_Sp = field_builder(S_prime)

    theta0 = np.asarray(theta0, dtype=float)
    start_prime = theta0 if theta0_prime is None else np.asarray(theta0_prime, dtype=float)
    C = float(np.linalg.norm(theta0 - start_prime))

    traj_S = integrate(field_S, theta0, t_end, h)
    traj_Sp = integrate(field_Sp, start_prime, t_end, h)
    times = traj_S.times
    dist_curve = np.linalg.norm(traj_S.states - traj_Sp.states, axis=1)
    geo_curve = None
    if metric is not None:
        geo_curve = np.array([
            geodesic_distance(metric, a, b)
            for a, b in zip(traj_S.states, traj_Sp.states)
        ])

    probes = list(probe_set)
    zs = list(S) + [z_new] + probes
    th_a, th_b = traj_S.final_state, traj_Sp.final_state
    sup_gap = max(abs(loss.loss(th_a, z) - loss.loss(th_b, z)) for z in zs)

    if bound_params is None:
        bound_metric = metric if metric is not None else (
            preconditioner if preconditioner is not None else identity_metric(S.dim)
        )
        pick = np.linspace(0, len(times) - 1, min(5, len(times))).astype(int)
        lam_hat = min(
            contraction_rate(field_S.jacobian(traj.states[k], float(times[k])), bound_metric)
            for traj in (traj_S, traj_Sp)
            for k in pick
        )
        omega = bounding_ball(np.vstack([traj_S.states, traj_Sp.states]))
        lip = estimate_lipschitz(loss, S, z_candidates=[z_new] + probes,
                                 omega_sampler=omega, n_samples=lipschitz_samples,
                                 seed=seed, preconditioner=preconditioner)
        bound_params = {"chi": bound_metric.chi, "lam": lam_hat, "L": lip.L, "xi": lip.xi}
    chi, lam, L, xi = (bound_params[k] for k in ("chi", "lam", "L", "xi"))

    n = S.n
    if regime == "generic_contraction" and lam <= 0.0:
        regime = "semi_contraction"
    if regime == "generic_contraction":
        bound_curve = chi * L * C * np.exp(-lam * times) + 2.0 * chi * L * xi / (lam * n)
    elif regime == "convex_schedule":
        if schedule is None:
            raise NonPositiveParameter("measure_stability: convex_schedule needs a schedule")
        rates = np.array([schedule(t) for t in times])
        integral = np.concatenate([[0.0], np.cumsum(0.5 * (rates[1:] + rates[:-1]) * np.diff(times))])
        bound_curve = L * (2.0 * L / n) * integral + L * C
    elif regime == "semi_contraction":
        bound_curve = L * ((2.0 * chi * xi / n) * times + C)
    else:
        raise NonPositiveParameter(f"measure_stability: unsupported regime {regime!r}")

    return StabilityReport(
        times=times,
        dist_curve=dist_curve,
        geo_curve=geo_curve,
        sup_loss_gap=float(sup_gap),
        bound_curve=bound_curve,
        regime=regime,
        params={"chi": chi, "lam": lam, "L": L, "xi": xi, "C": C, "n": n,
                "replaced_index": i, "probe_size": len(probes)},
        init={"reference": "origin", "C": C, "shared_start": theta0_prime is None},
    )


# -- loss families -------------------------------------------------------------

@dataclass(frozen=True)
class LossFamily:
    """Generative family: a loss plus samplers for datasets and fresh examples."""

    name: str
    loss: LossModel
    dim: int
    sample: Callable[[np.random.Generator, int], TrainingSet]
    draw: Callable[[np.random.Generator, int], Example]
    strong_convexity: Optional[Callable[[TrainingSet], float]] = None
    params: dict = field(default_factory=dict)


def quadratic_family(gamma: float = 1.0, d: int = 2, spread: float = 1.0) -> LossFamily:
    """Quadratic wells l = gamma/2 ||theta - c||^2 with Gaussian centers."""

    def draw(rng, id):
        return Example(x=spread * rng.standard_normal(d), y=0.0, id=id)

    return LossFamily(
        name="quadratic",
        loss=quadratic_loss(gamma),
        dim=d,
        sample=lambda rng, n: TrainingSet(draw(rng, k) for k in range(n)),
        draw=draw,
        strong_convexity=lambda S: gamma,
        params={"gamma": gamma, "d": d, "spread": spread},
    )


def ridge_family(d: int = 3, alpha: float = 0.5, noise: float = 0.1) -> LossFamily:
    """Linear-Gaussian regression data under the ridge loss."""
    theta_star = np.ones(d) / math.sqrt(d)

    def draw(rng, id):
        x = rng.standard_normal(d) / math.sqrt(d)
        y = float(x @ theta_star) + noise * float(rng.standard_normal())
        return Example(x=x, y=y, id=id)

    def strong_convexity(S):
        G = S.features.T @ S.features / S.n
        return float(np.linalg.eigvalsh(G)[0] + alpha)

    return LossFamily(
        name="ridge",
        loss=ridge_loss(alpha),
        dim=d,
        sample=lambda rng, n: TrainingSet(draw(rng, k) for k in range(n)),
        draw=draw,
        strong_convexity=strong_convexity,
        params={"alpha": alpha, "d": d, "noise": noise},
    )


def smoothed_hinge_family(d: int = 4, delta: float = 0.5, flip: float = 0.1) -> LossFamily:
    """Unit-norm features with noisy sign labels under the smoothed hinge."""
    theta_star = np.ones(d)

    def draw(rng, id):
        x = rng.standard_normal(d)
        x /= np.linalg.norm(x)
        y = float(np.sign(x @ theta_star) or 1.0)
        if rng.random() < flip:
            y = -y
        return Example(x=x, y=y, id=id)

    return LossFamily(
        name="smoothed_hinge",
        loss=smoothed_hinge_loss(delta),
        dim=d,
        sample=lambda rng, n: TrainingSet(draw(rng, k) for k in range(n)),
        draw=draw,
        params={"delta": delta, "d": d, "flip": flip},
    )


def softplus_family(d: int = 3) -> LossFamily:
    """Unit-norm features with soft labels in [0, 1] under the softplus loss."""
    theta_star = np.ones(d)

    def draw(rng, id):
        x = rng.standard_normal(d)
        x /= np.linalg.norm(x)
        y = 1.0 / (1.0 + math.exp(-float(x @ theta_star)))
        return Example(x=x, y=y, id=id)

    return LossFamily(
        name="softplus",
        loss=softplus_loss(),
        dim=d,
        sample=lambda rng, n: TrainingSet(draw(rng, k) for k in range(n)),
        draw=draw,
        params={"d": d},
    )


def interpolating_family(d: int = 64, noise: float = 0.05) -> LossFamily:
    """Overparameterized least squares (alpha = 0): PL but not strongly convex.

    With n < d the data interpolate, the loss surface has a valley of
    global minima, and gradient flow is semi-contracting.
    """
    theta_star_seed = 123

    def draw(rng, id):
        theta_star = np.random.default_rng(theta_star_seed).standard_normal(d) / math.sqrt(d)
        x = rng.standard_normal(d) / math.sqrt(d)
        y = float(x @ theta_star) + noise * float(rng.standard_normal())
        return Example(x=x, y=y, id=id)

    return LossFamily(
        name="interpolating_ls",
        loss=ridge_loss(0.0),
        dim=d,
        sample=lambda rng, n: TrainingSet(draw(rng, k) for k in range(n)),
        draw=draw,
        params={"d": d, "noise": noise},
    )


def wells_family(d: int = 2, spread: float = 0.1) -> LossFamily:
    """Tightly clustered double wells: isolated local minima for local-contraction demos."""

    def draw(rng, id):
        return Example(x=spread * rng.standard_normal(d), y=0.0, id=id)

    return LossFamily(
        name="quadratic_well",
        loss=quadratic_well_loss(),
        dim=d,
        sample=lambda rng, n: TrainingSet(draw(rng, k) for k in range(n)),
        draw=draw,
        params={"d": d, "spread": spread},
    )


FAMILIES = {
    "quadratic": quadratic_family,
    "ridge": ridge_family,
    "smoothed_hinge": smoothed_hinge_family,
    "softplus": softplus_family,
    "interpolating_ls": interpolating_family,
    "quadratic_well": wells_family,
}


def make_family(name: str, **kwargs) -> LossFamily:
    if name not in FAMILIES:
        raise ValueError(f"make_family: unknown family {name!r} (have {sorted(FAMILIES)})")
    return FAMILIES[name](**kwargs)


def pl_constant(S: TrainingSet) -> float:
    """PL constant 2 * (smallest nonzero eigenvalue of (1/n) X^T X) for least squares."""
    eigs = np.linalg.eigvalsh(S.features.T @ S.features / S.n)
    nonzero = eigs[eigs > 1e-10 * max(eigs[-1], 1e-30)]
    return 2.0 * float(nonzero[0])


# -- scaling experiment --------------------------------------------------------

@dataclass(frozen=True)
class ScalingReport:
    """Replace-one stability gap versus n, with the fitted log-log slope."""

    family: str
    n_list: list
    eps_trials: np.ndarray     # (len(n_list), trials)
    bound_trials: np.ndarray   # per-trial strongly-convex bound (nan if unavailable)
    eps_mean: np.ndarray
    slope: Optional[float]
    slope_residual: Optional[float]
    degenerate: bool
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "family": self.family,
            "n_list": list(self.n_list),
            "eps_trials": self.eps_trials.tolist(),
            "bound_trials": self.bound_trials.tolist(),
            "eps_mean": self.eps_mean.tolist(),
            "slope": self.slope,
            "slope_residual": self.slope_residual,
            "degenerate": self.degenerate,
            "seed": self.seed,
        }

    def curves_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "eps_mean"] + [f"eps_trial{k}" for k in range(self.eps_trials.shape[1])])
            for j, n in enumerate(self.n_list):
                writer.writerow([n, repr(float(self.eps_mean[j]))]
                                + [repr(float(v)) for v in self.eps_trials[j]])


def scaling_experiment(family: LossFamily, n_list, trials: int, seed: int,
                       t_end: float, h: float, probe: int = 64,
                       metric: Metric | None = None) -> ScalingReport:
    """Average replace-one loss gap for each n and the fitted 1/n slope.

    Each trial draws fresh data, a random replaced index, and a fresh
    replacement from the family; its random stream depends only on
    (seed, n index, trial index) so scheduling order cannot matter.
    """
    n_list = list(n_list)
    if len(n_list) < 3 or any(a >= b for a, b in zip(n_list, n_list[1:])):
        raise ValueError("scaling_experiment: n_list must be ascending with >= 3 entries")
    if trials < 1:
        raise ValueError("scaling_experiment: trials must be >= 1")
    eps = np.empty((len(n_list), trials))
    bound = np.full((len(n_list), trials), np.nan)
    for j, n in enumerate(n_list):
        for k in range(trials):
            rng = np.random.default_rng([seed, j, k])
            S = family.sample(rng, n)
            i = int(rng.integers(n))
            z_new = family.draw(rng, id=n)
            probes = [family.draw(rng, id=n + 1 + p) for p in range(probe)]
            report = measure_stability(
                family.loss, S, i, z_new, theta0=np.zeros(family.dim),
                t_end=t_end, h=h, metric=metric, probe_set=probes,
                lipschitz_samples=64, seed=seed,
            )
            eps[j, k] = report.sup_loss_gap
            if family.strong_convexity is not None:
                bound[j, k] = stability_bound(
                    "strongly_convex_gd", n=n, L=report.params["L"],
                    gamma=family.strong_convexity(S),
                )
    eps_mean = eps.mean(axis=1)
    degenerate = bool(np.any(eps_mean <= 0.0))
    slope = residual = None
    if not degenerate:
        coeffs, res, *_ = np.polyfit(np.log(n_list), np.log(eps_mean), 1, full=True)
        slope = float(coeffs[0])
        residual = float(res[0]) if len(res) else 0.0
    return ScalingReport(
        family=family.name, n_list=n_list, eps_trials=eps, bound_trials=bound,
        eps_mean=eps_mean, slope=slope, slope_residual=residual,
        degenerate=degenerate, seed=seed,
    )


# -- optimal metric for kernel ridge -------------------------------------------

@dataclass(frozen=True)
class OptimalMetricReport:
    """chi / lambda comparison across random-Q Lyapunov metrics.

    The identity row uses chi = 1 and the identity-metric rate; the
    q_identity row is the Q = I Lyapunov solution whose rate must match
    it. violations counts samples with ratio_I > ratio_M + 1e-9.
    """

    alpha: float
    lambda_I: float
    lambda_QI: float
    n_random: int
    kinds: list
    chis: np.ndarray
    lambdas: np.ndarray
    ratios: np.ndarray
    violations: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "lambda_I": self.lambda_I,
            "lambda_QI": self.lambda_QI,
            "n_random": self.n_random,
            "kinds": list(self.kinds),
            "chis": self.chis.tolist(),
            "lambdas": self.lambdas.tolist(),
            "ratios": self.ratios.tolist(),
            "violations": self.violations,
            "seed": self.seed,
        }

    def curves_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["kind", "chi", "lambda", "ratio"])
            for kind, chi, lam, ratio in zip(self.kinds, self.chis, self.lambdas, self.ratios):
                writer.writerow([kind, repr(float(chi)), repr(float(lam)), repr(float(ratio))])


def optimal_metric_experiment(G, alpha: float, n_random: int, seed: int = 0) -> OptimalMetricReport:
    """Random-Q metric comparison for the kernel ridge Jacobian J = -(G + alpha I).

    For each random SPD Q, solves the Lyapunov equation for M, takes
    lambda_M = (1/2) eig_min(Q) / eig_max(M) and chi_M from the Cholesky
    factor of M, and records chi/lambda. The identity metric must attain
    the minimal ratio on every sample.
    """
    if n_random < 1:
        raise ValueError("optimal_metric_experiment: n_random must be >= 1")
    G = np.asarray(G, dtype=float)
    dim = G.shape[0]
    J = -(G + alpha * np.eye(dim))
    lambda_I = float(np.linalg.eigvalsh(G)[0] + alpha)

    kinds = ["identity"]
    chis = [1.0]
    lambdas = [lambda_I]

    m_qi = solve_lyapunov(J, np.eye(dim))
    lambda_QI = 0.5 / m_qi.eig_max  # eig_min(I) = 1
    kinds.append("q_identity")
    chis.append(m_qi.chi)
    lambdas.append(lambda_QI)

    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        Q = random_spd(dim, rng)
        m = solve_lyapunov(J, Q)
        kinds.append("random")
        chis.append(m.chi)
        lambdas.append(0.5 * float(np.linalg.eigvalsh(Q)[0]) / m.eig_max)

    chis = np.asarray(chis)
    lambdas = np.asarray(lambdas)
    ratios = chis / lambdas
    ratio_I = ratios[0]
    violations = int(np.sum(ratio_I > ratios + 1e-9))
    return OptimalMetricReport(
        alpha=alpha, lambda_I=lambda_I, lambda_QI=float(lambda_QI),
        n_random=n_random, kinds=kinds, chis=chis, lambdas=lambdas,
        ratios=ratios, violations=violations, seed=seed,
    )
