"""Dynamical systems: fixed-step integration, sampled contraction
certification, and robustness envelopes in continuous and discrete time.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DimensionMismatch,
    NonFinite,
    NonPositiveRate,
    RateOutOfRange,
    VirtualMismatch,
)
from .matcalc import Metric, contraction_rate

# |lambda| <= RATE_FLOOR is judged semi-contracting (double-precision eigenvalue noise)
RATE_FLOOR = 1e-8


@dataclass(frozen=True)
class VectorField:
    """Continuous-time dynamics dx/dt = f(x, t) with Jacobian access."""

    dim: int
    eval: Callable[[np.ndarray, float], np.ndarray]
    jacobian: Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class DiscreteMap:
    """Discrete-time dynamics x_{t+1} = step(x_t, t, realization).

    Must be deterministic given (x, t, realization); the realization
    argument carries any stochastic draws.
    """

    dim: int
    step: Callable[[np.ndarray, int, object], np.ndarray]


def vector_field(dim: int, f, jacobian=None, fd_step: float = 1e-6) -> VectorField:
    """Wrap f (and optionally its Jacobian) as a VectorField.

    Without an explicit Jacobian, central finite differences of f are
    used with per-component step fd_step * (1 + |x_k|).
    """
    if jacobian is None:
        jacobian = _fd_jacobian(f, dim, fd_step)
    return VectorField(dim=dim, eval=f, jacobian=jacobian)


def _fd_jacobian(f, dim: int, step: float):
    def jac(x, t):
        x = np.asarray(x, dtype=float)
        J = np.empty((dim, dim))
        for k in range(dim):
            h = step * (1.0 + abs(x[k]))
            e = np.zeros(dim)
            e[k] = h
            J[:, k] = (np.asarray(f(x + e, t)) - np.asarray(f(x - e, t))) / (2.0 * h)
        return J

    return jac


def jacobian_check(field: VectorField, rng: np.random.Generator, n_points: int = 20,
                   scale: float = 1.0, t_range: tuple[float, float] = (0.0, 1.0),
                   rtol: float = 1e-6) -> float:
    """Max relative error between field.jacobian and central differences.

    Raises AssertionError if the error exceeds rtol at any sampled point.
    """
    fd = _fd_jacobian(field.eval, field.dim, 1e-6)
    worst = 0.0
    for _ in range(n_points):
        x = scale * rng.standard_normal(field.dim)
        t = float(rng.uniform(*t_range))
        J = np.asarray(field.jacobian(x, t))
        J_fd = fd(x, t)
        err = np.linalg.norm(J - J_fd) / max(np.linalg.norm(J_fd), 1.0)
        worst = max(worst, float(err))
    assert worst <= rtol, f"jacobian_check: relative error {worst:.3e} exceeds {rtol:.0e}"
    return worst


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped states; times strictly increasing."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "states", np.asarray(self.states, dtype=float))
        if len(self.times) != len(self.states):
            raise DimensionMismatch("Trajectory: times and states differ in length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("Trajectory: times must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def state_at(self, t: float) -> np.ndarray:
        """Linear interpolation of the state at time t (clamped to the range)."""
        ts = self.times
        if t <= ts[0]:
            return self.states[0]
        if t >= ts[-1]:
            return self.states[-1]
        k = int(np.searchsorted(ts, t) - 1)
        w = (t - ts[k]) / (ts[k + 1] - ts[k])
        return (1.0 - w) * self.states[k] + w * self.states[k + 1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t"] + [f"x{i}" for i in range(self.dim)])
            for t, x in zip(self.times, self.states):
                writer.writerow([repr(float(t))] + [repr(float(v)) for v in x])


def integrate(field: VectorField, x0, t_end: float, h: float) -> Trajectory:
    """Classical 4th-order Runge-Kutta with fixed step h from t = 0.

    States are recorded at every step; the number of steps is
    round(t_end / h), so the final time is within h of t_end. Raises
    NonFinite as soon as a state leaves the finite range.
    """
    if h <= 0.0:
        raise ValueError("integrate: step size h must be positive")
    if t_end < 0.0:
        raise ValueError("integrate: t_end must be non-negative")
    x = np.array(x0, dtype=float)
    if x.shape != (field.dim,):
        raise DimensionMismatch(f"integrate: x0 has shape {x.shape}, field dim is {field.dim}")
    n_steps = max(1, int(round(t_end / h))) if t_end > 0.0 else 0
    times = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, field.dim))
    times[0] = 0.0
    states[0] = x
    f = field.eval
    for k in range(n_steps):
        t = k * h
        k1 = f(x, t)
        k2 = f(x + 0.5 * h * k1, t + 0.5 * h)
        k3 = f(x + 0.5 * h * k2, t + 0.5 * h)
        k4 = f(x + h * k3, t + h)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NonFinite(f"integrate: non-finite state at t = {t + h:.6g}")
        times[k + 1] = (k + 1) * h
        states[k + 1] = x
    return Trajectory(times=times, states=states)


def iterate_map(dmap: DiscreteMap, x0, n_steps: int, realization=None) -> Trajectory:
    """Iterate a discrete map, recording every state."""
    x = np.array(x0, dtype=float)
    times = np.arange(n_steps + 1, dtype=float)
    states = np.empty((n_steps + 1, dmap.dim))
    states[0] = x
    for t in range(n_steps):
        x = np.asarray(dmap.step(x, t, realization), dtype=float)
        if not np.all(np.isfinite(x)):
            raise NonFinite(f"iterate_map: non-finite state at step {t + 1}")
        states[t + 1] = x
    return Trajectory(times=times, states=states)


@dataclass(frozen=True)
class BallRegion:
    """Euclidean ball; samples uniformly in volume."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    @property
    def dim(self) -> int:
        return len(self.center)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.standard_normal((n, self.dim))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        r = self.radius * rng.random(n) ** (1.0 / self.dim)
        return self.center + u * r[:, None]

    def describe(self) -> dict:
        return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True)
class BoxRegion:
    """Axis-aligned box; samples uniformly."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if self.lo.shape != self.hi.shape or np.any(self.lo > self.hi):
            raise ValueError("BoxRegion: lo and hi must match with lo <= hi")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))

    def describe(self) -> dict:
        return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True)
class ContractionCertificate:
    """Sampled evidence record for the metric Lyapunov inequality.

    lambda_min_observed is the minimum pointwise rate over all sampled
    (x, t); this certifies nothing outside the sample, and worst_point
    records where the minimum occurred.
    """

    metric: Metric
    lambda_min_observed: float
    n_samples: int
    region: dict
    worst_point: np.ndarray
    verdict: str

    def to_json_dict(self) -> dict:
        return {
            "metric": self.metric.to_json_dict(),
            "lambda_min_observed": self.lambda_min_observed,
            "n_samples": self.n_samples,
            "region": self.region,
            "worst_point": np.asarray(self.worst_point).tolist(),
            "verdict": self.verdict,
        }


def _verdict(lam: float, rate_floor: float) -> str:
    if lam > rate_floor:
        return "contracting"
    if abs(lam) <= rate_floor:
        return "semi_contracting"
    return "not_contracting"


def certify_contraction(field: VectorField, metric: Metric, sampler, n_samples: int,
                        times, seed: int = 0, rate_floor: float = RATE_FLOOR) -> ContractionCertificate:
    """Minimum pointwise contraction rate over sampled states and times.

    Evaluates contraction_rate(J(x, t), metric) at n_samples states drawn
    from the sampler crossed with the given times.
    """
    if n_samples < 1:
        raise ValueError("certify_contraction: n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    points = sampler.sample(rng, n_samples)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    lam_min = np.inf
    worst = points[0]
    for x in points:
        for t in times:
            lam = contraction_rate(field.jacobian(x, float(t)), metric)
            if lam < lam_min:
                lam_min = lam
                worst = x
    return ContractionCertificate(
        metric=metric,
        lambda_min_observed=float(lam_min),
        n_samples=n_samples,
        region=sampler.describe(),
        worst_point=worst,
        verdict=_verdict(float(lam_min), rate_floor),
    )


def robustness_envelope_continuous(chi: float, lam: float, R0: float, D: float, t):
    """Disturbance envelope chi*R0*exp(-lam*t) + D*chi/lam.

    Bounds the distance between a contracting trajectory (rate lam,
    metric condition bound chi) and a copy perturbed by a disturbance of
    norm at most D. Accepts scalar or array t.
    """
    if lam <= 0.0:
        raise NonPositiveRate(
            "robustness_envelope_continuous: lambda must be > 0 "
            "(use semi_contraction_bound for lambda = 0)"
        )
    t_arr = np.asarray(t, dtype=float)
    out = chi * R0 * np.exp(-lam * t_arr) + D * chi / lam
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def robustness_envelope_discrete(chi: float, mu: float, R0: float, D: float, t):
    """Discrete-time envelope chi*R0*mu^t + D*chi/(1-mu), for 0 < mu < 1."""
    if not 0.0 < mu < 1.0:
        raise RateOutOfRange(f"robustness_envelope_discrete: mu = {mu} not in (0, 1)")
    t_arr = np.asarray(t, dtype=float)
    out = chi * R0 * mu ** t_arr + D * chi / (1.0 - mu)
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def local_region_requirement(b: float, chi: float, lam: float, D: float,
                             optimizer_variant: bool = False) -> float:
    """Required outer contraction-region radius for local robustness.

    Default form: b*(chi + 1) + chi*D/lam. With optimizer_variant the
    transient term doubles instead, 2*b*chi + chi*D/lam (callers supply
    D = 2*xi/n for the replace-one optimizer case).
    """
    base = 2.0 * b * chi if optimizer_variant else b * (chi + 1.0)
    return base + chi * D / lam


def semi_contraction_bound(chi: float, xi: float, n: int, T: float, R0: float, L: float) -> float:
    """Time-linear stability bound L * ((2*chi*xi/n) * T + R0) for rate >= 0."""
    return L * ((2.0 * chi * xi / n) * T + R0)


def partial_contraction_check(field: VectorField, virtual_field_builder, metric: Metric,
                              sampler, n_samples: int, x_traj: Trajectory, seed: int = 0,
                              consistency_rtol: float = 1e-9,
                              rate_floor: float = RATE_FLOOR) -> ContractionCertificate:
    """Certify contraction of the virtual y-system along a frozen x-trajectory.

    The builder receives the x-trajectory and must return the vector
    field y -> g(y, x(t), t). Consistency g(x, x, t) = f(x, t) is checked
    on trajectory points before certification; VirtualMismatch otherwise.
    """
    virtual = virtual_field_builder(x_traj)
    check_idx = np.linspace(0, len(x_traj.times) - 1, min(32, len(x_traj.times))).astype(int)
    for k in check_idx:
        x, t = x_traj.states[k], float(x_traj.times[k])
        fv = np.asarray(field.eval(x, t))
        gv = np.asarray(virtual.eval(x, t))
        if np.linalg.norm(gv - fv) > consistency_rtol * (1.0 + np.linalg.norm(fv)):
            raise VirtualMismatch(
                f"partial_contraction_check: g(x,x,t) != f(x,t) at t = {t:.6g} "
                f"(error {np.linalg.norm(gv - fv):.3e})"
            )
    times = x_traj.times[np.linspace(0, len(x_traj.times) - 1, min(16, len(x_traj.times))).astype(int)]
    return certify_contraction(virtual, metric, sampler, n_samples, times,
                               seed=seed, rate_floor=rate_floor)


def scaled_field(field: VectorField, beta: float) -> VectorField:
    """Speed up the dynamics by a factor beta > 0."""
    return VectorField(
        dim=field.dim,
        eval=lambda x, t: beta * np.asarray(field.eval(x, t)),
        jacobian=lambda x, t: beta * np.asarray(field.jacobian(x, t)),
    )


def linear_field(J) -> VectorField:
    """The linear system dx/dt = J x."""
    J = np.asarray(J, dtype=float)
    return VectorField(dim=J.shape[0], eval=lambda x, t: J @ x, jacobian=lambda x, t: J)
