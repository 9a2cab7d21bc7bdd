import math

import numpy as np
import pytest

from csl.errors import (
    DimensionMismatch,
    NotHurwitz,
    NotNegativeDefinite,
    NotPositiveDefinite,
    NotSymmetric,
)
from csl.matcalc import (
    contraction_rate,
    distortion_band,
    geodesic_distance,
    identity_metric,
    make_metric,
    optimal_metric_rate,
    random_hurwitz,
    random_spd,
    solve_lyapunov,
)


class TestMakeMetric:
    def test_identity(self):
        m = make_metric(np.eye(2))
        assert m.chi == 1.0
        assert m.eig_min == pytest.approx(1.0)
        assert m.eig_max == pytest.approx(1.0)

    def test_diagonal_factor_is_forced(self):
        m = make_metric(np.diag([4.0, 1.0]))
        np.testing.assert_allclose(m.T, np.diag([2.0, 1.0]))
        assert m.chi == pytest.approx(2.0)
        assert m.eig_min == pytest.approx(1.0)
        assert m.eig_max == pytest.approx(4.0)

    def test_chi_against_eigendecomposition(self):
        # oracle: eigenvalues of [[2,1],[1,2]] are 3 and 1, so chi = sqrt(3)
        M = np.array([[2.0, 1.0], [1.0, 2.0]])
        eigs = np.linalg.eigvalsh(M)
        assert eigs == pytest.approx([1.0, 3.0])
        m = make_metric(M)
        assert m.chi == pytest.approx(math.sqrt(3.0), rel=1e-12)
        assert m.chi == pytest.approx(1.7320508075688772, rel=1e-12)

    def test_factor_reconstructs(self):
        rng = np.random.default_rng(0)
        for dim in (2, 3, 5, 8):
            M = random_spd(dim, rng)
            m = make_metric(M)
            assert np.linalg.norm(m.T.T @ m.T - m.M) <= 1e-10 * np.linalg.norm(m.M)
            # chi agrees with sqrt of the eigenvalue ratio of M
            assert m.chi == pytest.approx(math.sqrt(m.eig_max / m.eig_min), rel=1e-10)
            assert m.chi >= 1.0

    def test_rejects_asymmetric(self):
        with pytest.raises(NotSymmetric):
            make_metric(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            make_metric(np.diag([1.0, -1.0]))

    def test_rejects_nonsquare(self):
        with pytest.raises(DimensionMismatch):
            make_metric(np.ones((2, 3)))


class TestGeodesicDistance:
    def test_euclidean_case(self):
        m = identity_metric(2)
        assert geodesic_distance(m, [0.0, 0.0], [3.0, 4.0]) == pytest.approx(5.0)

    def test_zero_iff_equal(self):
        rng = np.random.default_rng(1)
        m = make_metric(random_spd(3, rng))
        x = rng.standard_normal(3)
        assert geodesic_distance(m, x, x) == 0.0
        assert geodesic_distance(m, x, x + 1e-8) > 0.0

    def test_quadratic_form(self):
        # oracle: (1,1) under diag(4,1) has squared length 4 + 1 = 5
        m = make_metric(np.diag([4.0, 1.0]))
        d = geodesic_distance(m, [0.0, 0.0], [1.0, 1.0])
        assert d == pytest.approx(math.sqrt(5.0), rel=1e-12)

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(2)
        m = make_metric(random_spd(4, rng))
        x, y, z = rng.standard_normal((3, 4))
        assert geodesic_distance(m, x, y) == pytest.approx(geodesic_distance(m, y, x))
        assert geodesic_distance(m, x, z) <= (
            geodesic_distance(m, x, y) + geodesic_distance(m, y, z) + 1e-12
        )

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            geodesic_distance(identity_metric(2), [0.0, 0.0], [1.0, 2.0, 3.0])


class TestDistortionBand:
    def test_identity_pair(self):
        m = identity_metric(3)
        band = distortion_band(m, m)
        assert band.lower == pytest.approx(1.0)
        assert band.upper == pytest.approx(1.0)

    def test_uniform_scaling(self):
        band = distortion_band(make_metric(4.0 * np.eye(2)), identity_metric(2))
        assert band.lower == pytest.approx(2.0)
        assert band.upper == pytest.approx(2.0)

    def test_hand_computed_band(self):
        # mu1 = L1 = 1, mu2 = 1, L2 = 9 -> band [1/3, 1]
        band = distortion_band(identity_metric(2), make_metric(np.diag([9.0, 1.0])))
        assert band.lower == pytest.approx(1.0 / 3.0)
        assert band.upper == pytest.approx(1.0)

    def test_ratio_property_random_pairs(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            dim = int(rng.integers(2, 9))
            m1 = make_metric(random_spd(dim, rng))
            m2 = make_metric(random_spd(dim, rng))
            band = distortion_band(m1, m2)
            for _ in range(10):
                x = rng.standard_normal(dim)
                y = x + rng.standard_normal(dim)
                ratio = geodesic_distance(m1, x, y) / geodesic_distance(m2, x, y)
                assert band.lower - 1e-12 <= ratio <= band.upper + 1e-12


class TestSolveLyapunov:
    def test_scalar_identity_case(self):
        m = solve_lyapunov(-np.eye(2), np.eye(2))
        np.testing.assert_allclose(m.M, 0.5 * np.eye(2))

    def test_decoupled_diagonal(self):
        m = solve_lyapunov(np.diag([-1.0, -2.0]), np.eye(2))
        np.testing.assert_allclose(m.M, np.diag([0.5, 0.25]))

    def test_residual_contract_random(self):
        rng = np.random.default_rng(4)
        J = random_hurwitz(10, rng)
        A = rng.standard_normal((10, 10))
        Q = A.T @ A + np.eye(10)
        m = solve_lyapunov(J, Q)
        # oracle: substitute back
        residual = np.linalg.norm(m.M @ J + J.T @ m.M + Q)
        assert residual <= 1e-10 * np.linalg.norm(Q)
        assert m.eig_min > 0.0

    def test_rejects_non_hurwitz(self):
        with pytest.raises(NotHurwitz):
            solve_lyapunov(np.diag([1.0, -1.0]), np.eye(2))

    def test_rejects_indefinite_q(self):
        with pytest.raises(NotPositiveDefinite):
            solve_lyapunov(-np.eye(2), np.diag([1.0, -1.0]))


class TestContractionRate:
    def test_scaled_identity(self):
        assert contraction_rate(-2.0 * np.eye(3), identity_metric(3)) == pytest.approx(2.0)

    def test_slowest_mode(self):
        assert contraction_rate(np.diag([-3.0, -1.0]), identity_metric(2)) == pytest.approx(1.0)

    def test_preconditioned_rate_is_gamma_over_pmax(self):
        gamma = 0.7
        P = np.diag([2.0, 1.0])
        J = -np.linalg.inv(P) @ (gamma * np.eye(2))
        lam = contraction_rate(J, make_metric(P))
        assert lam == pytest.approx(gamma / 2.0, rel=1e-12)

    def test_identity_metric_reduces_to_symmetric_part(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            dim = int(rng.integers(2, 7))
            J = rng.standard_normal((dim, dim))
            J = 0.5 * (J + J.T)
            lam = contraction_rate(J, identity_metric(dim))
            assert abs(lam + np.linalg.eigvalsh(J)[-1]) <= 1e-12

    def test_scale_invariance_of_metric(self):
        rng = np.random.default_rng(6)
        J = rng.standard_normal((4, 4))
        M = random_spd(4, rng)
        lam = contraction_rate(J, make_metric(M))
        for c in (1e-3, 0.5, 7.0, 1e4):
            assert contraction_rate(J, make_metric(c * M)) == pytest.approx(lam, rel=1e-9, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            contraction_rate(np.eye(3), identity_metric(2))


class TestOptimalMetricRate:
    def test_negative_identity(self):
        metric, lam = optimal_metric_rate(-np.eye(2))
        np.testing.assert_allclose(metric.M, 0.5 * np.eye(2))
        assert lam == pytest.approx(1.0)

    def test_kernel_ridge_rate(self):
        G = np.diag([1.0, 3.0])
        alpha = 0.5
        _, lam = optimal_metric_rate(-(G + alpha * np.eye(2)))
        assert lam == pytest.approx(1.5, rel=1e-12)

    def test_matches_identity_metric_rate(self):
        rng = np.random.default_rng(7)
        A = rng.standard_normal((5, 5))
        J = -(A.T @ A + 0.3 * np.eye(5))
        metric, lam = optimal_metric_rate(J)
        # oracle: contraction rate in the identity metric
        assert lam == pytest.approx(contraction_rate(J, identity_metric(5)), rel=1e-10)
        # and the returned metric achieves its advertised rate
        assert lam == pytest.approx(contraction_rate(J, metric), rel=1e-10)

    def test_rejects_asymmetric(self):
        with pytest.raises(NotSymmetric):
            optimal_metric_rate(np.array([[-1.0, 0.5], [0.0, -1.0]]))

    def test_rejects_indefinite(self):
        with pytest.raises(NotNegativeDefinite):
            optimal_metric_rate(np.diag([-1.0, 1.0]))


def test_metric_json_round_trip_shape():
    m = make_metric(np.diag([4.0, 1.0]))
    d = m.to_json_dict()
    assert d["dim"] == 2
    assert d["M"] == [[4.0, 0.0], [0.0, 1.0]]
    rebuilt = make_metric(np.array(d["M"]))
    assert rebuilt.chi == pytest.approx(m.chi)
