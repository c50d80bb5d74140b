import numpy as np
import pytest

from gradients import chol_jvp, chol_vjp, phi


def _random_spd(rng, dim=4):
    a = rng.standard_normal((dim, dim))
    return a @ a.T + dim * np.eye(dim)


def _random_symmetric(rng, dim=4):
    a = rng.standard_normal((dim, dim))
    return 0.5 * (a + a.T)


def test_phi_halves_diagonal():
    np.testing.assert_array_equal(phi(np.array([[2.0, 5.0], [3.0, 4.0]])), [[1.0, 0.0], [3.0, 2.0]])


def test_scalar_case():
    chol = np.array([[3.0]])
    assert chol_jvp(chol, np.array([[1.0]]))[0, 0] == pytest.approx(1.0 / 6.0)


def test_identity_case():
    dcov = np.eye(3)
    np.testing.assert_allclose(chol_jvp(np.eye(3), dcov), 0.5 * np.eye(3))


def test_forward_rule_matches_finite_differences():
    rng = np.random.default_rng(0)
    step = 1e-6
    for _ in range(100):
        cov = _random_spd(rng)
        dcov = _random_symmetric(rng)
        numeric = (np.linalg.cholesky(cov + step * dcov) - np.linalg.cholesky(cov - step * dcov)) / (2 * step)
        np.testing.assert_allclose(chol_jvp(np.linalg.cholesky(cov), dcov), numeric, rtol=1e-6, atol=1e-8)


def test_reverse_rule_is_adjoint_of_forward_rule():
    rng = np.random.default_rng(1)
    for _ in range(50):
        chol = np.linalg.cholesky(_random_spd(rng))
        dcov = _random_symmetric(rng)
        chol_bar = np.tril(rng.standard_normal((4, 4)))
        cov_bar = chol_vjp(chol, chol_bar)
        np.testing.assert_allclose(cov_bar, cov_bar.T, atol=1e-12)
        assert np.sum(chol_bar * chol_jvp(chol, dcov)) == pytest.approx(np.sum(cov_bar * dcov), rel=1e-10)
