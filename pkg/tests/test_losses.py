import numpy as np
import pytest

from csl.learnlab import (
    Example,
    TrainingSet,
    apply_feature_map,
    gradient_check,
    quadratic_loss,
    quadratic_well_loss,
    ridge_loss,
    smoothed_hinge_loss,
    softplus_loss,
)

ZOO = [
    quadratic_loss(0.7),
    ridge_loss(0.5),
    smoothed_hinge_loss(0.5),
    softplus_loss(),
    quadratic_well_loss(),
]


def _examples(rng, d=3, n=12, labels="real"):
    out = []
    for k in range(n):
        x = rng.standard_normal(d)
        if labels == "sign":
            y = float(rng.choice([-1.0, 1.0]))
        elif labels == "unit":
            y = float(rng.random())
        else:
            y = float(rng.standard_normal())
        out.append(Example(x=x, y=y, id=k))
    return out


@pytest.mark.parametrize("loss", ZOO, ids=lambda l: l.name)
def test_gradient_matches_finite_differences(loss):
    rng = np.random.default_rng(20)
    labels = "sign" if "hinge" in loss.name else ("unit" if loss.name == "softplus" else "real")
    gradient_check(loss, _examples(rng, labels=labels), rng, n_points=20, rtol=1e-6)


@pytest.mark.parametrize("loss", ZOO, ids=lambda l: l.name)
def test_loss_nonnegative(loss):
    rng = np.random.default_rng(21)
    for z in _examples(rng, labels="unit" if loss.name == "softplus" else "sign"):
        th = rng.standard_normal(3)
        assert loss.loss(th, z) >= 0.0


@pytest.mark.parametrize("loss", ZOO, ids=lambda l: l.name)
def test_hessian_matches_grad_differences(loss):
    rng = np.random.default_rng(22)
    z = _examples(rng, labels="unit" if loss.name == "softplus" else "sign")[0]
    th = 0.5 * rng.standard_normal(3)
    H = np.asarray(loss.hessian(th, z))
    H_fd = np.empty((3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1e-6
        H_fd[:, k] = (loss.grad(th + e, z) - loss.grad(th - e, z)) / 2e-6
    np.testing.assert_allclose(H, H_fd, rtol=1e-4, atol=1e-6)


@pytest.mark.parametrize("loss", ZOO, ids=lambda l: l.name)
def test_vectorized_paths_match_per_example(loss):
    rng = np.random.default_rng(23)
    labels = "sign" if "hinge" in loss.name else ("unit" if loss.name == "softplus" else "real")
    examples = _examples(rng, labels=labels)
    S = TrainingSet(examples)
    X, Y = S.features, S.labels
    th = rng.standard_normal(3)
    mean_loop = sum(loss.grad(th, z) for z in examples) / len(examples)
    np.testing.assert_allclose(loss.mean_grad(th, X, Y), mean_loop, rtol=1e-12, atol=1e-14)
    hess_loop = sum(np.asarray(loss.hessian(th, z)) for z in examples) / len(examples)
    np.testing.assert_allclose(loss.mean_hessian(th, X, Y), hess_loop, rtol=1e-10, atol=1e-13)
    norms_loop = [float(np.linalg.norm(loss.grad(th, z))) for z in examples]
    np.testing.assert_allclose(loss.grad_norms(th, X, Y), norms_loop, rtol=1e-12, atol=1e-14)


def test_convexity_of_convex_losses():
    rng = np.random.default_rng(24)
    for loss, labels in [(ridge_loss(0.1), "real"), (smoothed_hinge_loss(0.5), "sign"),
                         (softplus_loss(), "unit")]:
        for z in _examples(rng, labels=labels, n=6):
            th = rng.standard_normal(3)
            eigs = np.linalg.eigvalsh(np.asarray(loss.hessian(th, z)))
            assert eigs[0] >= -1e-12, f"{loss.name} Hessian not PSD"


def test_quadratic_well_has_isolated_minima():
    loss = quadratic_well_loss()
    z = Example(x=np.zeros(2), y=0.0, id=0)
    for corner in ([1.0, 1.0], [-1.0, 1.0], [1.0, -1.0]):
        th = np.asarray(corner)
        assert np.linalg.norm(loss.grad(th, z)) <= 1e-12
        assert np.linalg.eigvalsh(np.asarray(loss.hessian(th, z)))[0] > 0
    # the origin is a stationary point with indefinite curvature
    assert np.linalg.eigvalsh(np.asarray(loss.hessian(np.zeros(2), z)))[0] < 0


def test_apply_feature_map():
    S = TrainingSet([Example(x=np.array([0.0, 2.0]), y=1.0, id=0)])
    mapped = apply_feature_map(S, np.tanh)
    np.testing.assert_allclose(mapped.features, np.tanh(S.features))
    assert mapped.labels[0] == 1.0
