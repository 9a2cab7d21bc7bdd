"""Constant-metric linear algebra.

SPD metrics with their Cholesky factors and condition numbers, geodesic
distances, continuous Lyapunov solves, and contraction-rate extraction
from the generalized symmetric-definite pencil (MJ + J^T M, M).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, eigh, solve_continuous_lyapunov

from .errors import (
    DimensionMismatch,
    NotHurwitz,
    NotNegativeDefinite,
    NotPositiveDefinite,
    NotSymmetric,
    ResidualTooLarge,
)

# eigenvalue > SPD_RTOL * eig_max declares positive definite
SPD_RTOL = 1e-12
SYMMETRY_RTOL = 1e-9
LYAPUNOV_RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class Metric:
    """SPD metric M = T^T T.

    chi is the condition number of the factor T, computed exactly from
    its singular values and used as the (tightest valid) upper bound on
    cond(T). eig_min / eig_max are the extremal eigenvalues of M, so
    eig_min * I <= M <= eig_max * I.
    """

    dim: int
    M: np.ndarray
    T: np.ndarray
    chi: float
    eig_min: float
    eig_max: float

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "M": self.M.tolist(),
            "T": self.T.tolist(),
            "chi": self.chi,
            "eig_min": self.eig_min,
            "eig_max": self.eig_max,
        }


@dataclass(frozen=True)
class DistortionBand:
    """Bounds on the ratio d_M1 / d_M2 of geodesic distances.

    lower = sqrt(eig_min(M1) / eig_max(M2)),
    upper = sqrt(eig_max(M1) / eig_min(M2)).
    """

    lower: float
    upper: float

    def contains(self, ratio: float) -> bool:
        return self.lower <= ratio <= self.upper


def _as_square(A, name: str) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")
    return A


def make_metric(M) -> Metric:
    """Build a Metric from a symmetric positive-definite matrix.

    The factor T is the upper Cholesky factor, M = T^T T.

    Raises NotSymmetric if the asymmetry exceeds 1e-9 * ||M||_F and
    NotPositiveDefinite if the smallest eigenvalue is not positive
    (relative to eig_max).
    """
    M = _as_square(M, "M")
    scale = np.linalg.norm(M)
    asym = float(np.max(np.abs(M - M.T)))
    if asym > SYMMETRY_RTOL * max(scale, np.finfo(float).tiny):
        raise NotSymmetric(f"make_metric: asymmetry {asym:.3e} exceeds {SYMMETRY_RTOL:.0e}*||M||_F")
    Ms = 0.5 * (M + M.T)
    eigs = np.linalg.eigvalsh(Ms)
    eig_min, eig_max = float(eigs[0]), float(eigs[-1])
    if eig_max <= 0.0 or eig_min <= SPD_RTOL * eig_max:
        raise NotPositiveDefinite(f"make_metric: smallest eigenvalue {eig_min:.3e} is not positive")
    T = cholesky(Ms)  # upper triangular, Ms = T.T @ T
    s = np.linalg.svd(T, compute_uv=False)
    chi = float(s[0] / s[-1])
    return Metric(dim=Ms.shape[0], M=Ms, T=T, chi=chi, eig_min=eig_min, eig_max=eig_max)


def identity_metric(dim: int) -> Metric:
    return make_metric(np.eye(dim))


def geodesic_distance(metric: Metric, x, y) -> float:
    """Distance sqrt((x-y)^T M (x-y)); for constant M the geodesic is straight."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (metric.dim,) or y.shape != (metric.dim,):
        raise DimensionMismatch(
            f"geodesic_distance: expected vectors of length {metric.dim}, "
            f"got {x.shape} and {y.shape}"
        )
    return float(np.linalg.norm(metric.T @ (x - y)))


def distortion_band(m1: Metric, m2: Metric) -> DistortionBand:
    """Bounds on d_m1(x,y)/d_m2(x,y), uniform over all point pairs x != y."""
    if m1.dim != m2.dim:
        raise DimensionMismatch("distortion_band: metrics have different dimensions")
    return DistortionBand(
        lower=math.sqrt(m1.eig_min / m2.eig_max),
        upper=math.sqrt(m1.eig_max / m2.eig_min),
    )


def solve_lyapunov(J, Q) -> Metric:
    """Solve M J + J^T M = -Q for the constant metric M.

    J must be Hurwitz and Q SPD; the result then is SPD. The solution is
    accepted only if ||MJ + J^T M + Q||_F <= 1e-10 * ||Q||_F.
    """
    J = _as_square(J, "J")
    Q = _as_square(Q, "Q")
    if J.shape != Q.shape:
        raise DimensionMismatch("solve_lyapunov: J and Q must have the same shape")
    if np.max(np.linalg.eigvals(J).real) >= 0.0:
        raise NotHurwitz("solve_lyapunov: J has an eigenvalue with non-negative real part")
    make_metric(Q)  # validates symmetry and positive definiteness of Q
    # scipy solves a x + x a^H = q; with a = J^T this is J^T M + M J = -Q
    M = solve_continuous_lyapunov(J.T, -Q)
    M = 0.5 * (M + M.T)
    residual = float(np.linalg.norm(M @ J + J.T @ M + Q))
    if residual > LYAPUNOV_RESIDUAL_RTOL * np.linalg.norm(Q):
        raise ResidualTooLarge(
            f"solve_lyapunov: residual {residual:.3e} exceeds "
            f"{LYAPUNOV_RESIDUAL_RTOL:.0e}*||Q||_F"
        )
    return make_metric(M)


def contraction_rate(J, metric: Metric) -> float:
    """Largest lambda with M J + J^T M <= -2 lambda M.

    Computed as -1/2 times the largest generalized eigenvalue of the
    pencil (MJ + J^T M, M). May be <= 0: positive certifies pointwise
    contraction, zero semi-contraction.
    """
    J = _as_square(J, "J")
    if J.shape[0] != metric.dim:
        raise DimensionMismatch(
            f"contraction_rate: J is {J.shape[0]}x{J.shape[0]}, metric dim is {metric.dim}"
        )
    A = metric.M @ J + J.T @ metric.M
    A = 0.5 * (A + A.T)  # exact symmetrization of rounding noise
    nu = eigh(A, metric.M, eigvals_only=True)
    return float(-0.5 * nu[-1])


def optimal_metric_rate(J) -> tuple[Metric, float]:
    """Rate-optimal metric for a symmetric negative-definite Jacobian.

    Returns M = (1/2) (-J)^{-1} (the Q = I Lyapunov solution) and the
    corresponding rate 1/(2 eig_max(M)), which equals the rate in the
    identity metric.
    """
    J = _as_square(J, "J")
    scale = np.linalg.norm(J)
    asym = float(np.max(np.abs(J - J.T)))
    if asym > SYMMETRY_RTOL * max(scale, np.finfo(float).tiny):
        raise NotSymmetric("optimal_metric_rate: J is not symmetric")
    Js = 0.5 * (J + J.T)
    eigs = np.linalg.eigvalsh(Js)
    if eigs[-1] >= -SPD_RTOL * abs(eigs[0]):
        raise NotNegativeDefinite("optimal_metric_rate: J is not negative definite")
    metric = make_metric(0.5 * np.linalg.inv(-Js))
    return metric, 0.5 / metric.eig_max


def random_spd(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Well-conditioned random SPD sample A^T A + 0.1 I, A i.i.d. standard normal."""
    A = rng.standard_normal((dim, dim))
    return A.T @ A + 0.1 * np.eye(dim)


def random_hurwitz(dim: int, rng: np.random.Generator, margin: float = 0.5) -> np.ndarray:
    """Random matrix with all eigenvalue real parts <= -margin."""
    A = rng.standard_normal((dim, dim)) / math.sqrt(dim)
    shift = float(np.max(np.linalg.eigvals(A).real))
    return A - (shift + margin) * np.eye(dim)
