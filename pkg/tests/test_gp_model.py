import dataclasses

import numpy as np
import pytest
from scipy.linalg import LinAlgError

from core import ContractViolation, IllConditionedError, flags
from gp_model import (GpHyperparams, GpModel, TrainingSettings, build_dataset, factorize_gram, fit_model,
                      gp_predict, gp_predict_grads, kernel_eval, kernel_matrix, load_model, nlml, nlml_and_grad,
                      save_model, train_hyperparams)


def _random_model(rng, n_points=8, state_dim=2, action_dim=1):
    inputs = rng.standard_normal((n_points, state_dim + action_dim))
    targets = rng.standard_normal((n_points, state_dim))
    hyperparams = [GpHyperparams(float(rng.uniform(-0.5, 0.5)),
                                 rng.uniform(-0.3, 0.7, size=state_dim + action_dim),
                                 float(rng.uniform(-2.5, -1.0)))
                   for _ in range(state_dim)]
    return GpModel(inputs, targets, hyperparams)


def test_kernel_values():
    h = GpHyperparams.from_natural(2.0, [1.0, 1.0], 0.1)
    assert kernel_eval([0.3, -1.0], [0.3, -1.0], h) == pytest.approx(4.0)
    h1 = GpHyperparams.from_natural(1.0, [1.0], 0.1)
    assert kernel_eval([0.0], [1.0], h1) == pytest.approx(np.exp(-1.0))
    assert kernel_eval([0.0], [1e3], h1) == pytest.approx(0.0, abs=1e-300)


def test_kernel_dimension_mismatch():
    h = GpHyperparams.from_natural(1.0, [1.0, 1.0], 0.1)
    with pytest.raises(ContractViolation):
        kernel_eval([0.0], [0.0], h)


def test_hyperparams_vector_order():
    h = GpHyperparams.from_natural(2.0, [3.0, 4.0], 0.5)
    np.testing.assert_allclose(np.exp(h.to_vector()), [2.0, 3.0, 4.0, 0.5])
    assert GpHyperparams.from_vector(h.to_vector()).to_dict() == h.to_dict()


def test_nlml_single_point():
    h = GpHyperparams.from_natural(1.5, [1.0], 0.2)
    value, _ = nlml_and_grad(np.array([[0.4]]), np.array([0.0]), h)
    assert value == pytest.approx(0.5 * np.log(2 * np.pi * (1.5 ** 2 + 0.2 ** 2)), rel=1e-7)


def test_nlml_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    step = 1e-5
    for _ in range(100):
        inputs = rng.standard_normal((8, 3))
        targets = rng.standard_normal(8)
        vector = np.concatenate([[rng.uniform(-0.5, 0.5)], rng.uniform(-0.3, 0.7, 3), [rng.uniform(-2.5, -1.0)]])
        _, grad = nlml_and_grad(inputs, targets, GpHyperparams.from_vector(vector))
        numeric = np.empty_like(vector)
        for i in range(vector.size):
            shift = np.zeros_like(vector)
            shift[i] = step
            up, _ = nlml_and_grad(inputs, targets, GpHyperparams.from_vector(vector + shift))
            down, _ = nlml_and_grad(inputs, targets, GpHyperparams.from_vector(vector - shift))
            numeric[i] = (up - down) / (2 * step)
        np.testing.assert_allclose(grad, numeric, rtol=1e-5, atol=1e-6)


def test_prediction_far_from_data_reverts_to_prior():
    h = GpHyperparams.from_natural(0.7, [1.0, 1.0], 0.05)
    model = GpModel(np.array([[0.0, 0.0], [0.5, 0.1]]), np.array([[1.0], [0.8]]), [h])
    pred = gp_predict(model, [100.0, -100.0])
    assert pred.mean_delta[0] == pytest.approx(0.0, abs=1e-12)
    assert pred.mean[0] == pytest.approx(100.0)
    assert pred.latent_variance[0] == pytest.approx(0.49)
    assert pred.variance[0] == pytest.approx(0.49 + 0.0025)


def test_single_point_posterior_mean():
    h = GpHyperparams.from_natural(1.0, [1.0], 0.3)
    model = GpModel(np.array([[0.2]]), np.array([[2.0]]), [h])
    pred = gp_predict(model, [0.2])
    assert pred.mean_delta[0] == pytest.approx(2.0 / (1.0 + 0.09), rel=1e-7)


def test_predictive_variance_bounds():
    rng = np.random.default_rng(1)
    model = _random_model(rng)
    for x in rng.standard_normal((50, model.input_dim)) * 2:
        pred = gp_predict(model, x)
        noise = np.array([h.noise_std ** 2 for h in model.hyperparams])
        signal = np.array([h.signal_std ** 2 for h in model.hyperparams])
        assert np.all(pred.variance >= noise * (1 - 1e-9))
        assert np.all(pred.variance <= (signal + noise) * (1 + 1e-9))


def test_near_noise_free_interpolation():
    h = GpHyperparams.from_natural(1.0, [1.0], 1e-5)
    inputs = np.arange(5.0)[:, None] * 2.0
    targets = np.sin(inputs)
    model = GpModel(inputs, targets, [h])
    for x, y in zip(inputs, targets):
        assert gp_predict(model, x).mean_delta[0] == pytest.approx(y[0], abs=1e-6)


def test_prediction_gradients_match_finite_differences():
    rng = np.random.default_rng(2)
    step = 1e-6
    for _ in range(100):
        model = _random_model(rng)
        x = rng.standard_normal(model.input_dim)
        dmean, dstd = gp_predict_grads(model, x)
        num_mean = np.empty_like(dmean)
        num_std = np.empty_like(dstd)
        for i in range(model.input_dim):
            shift = np.zeros_like(x)
            shift[i] = step
            up = gp_predict(model, x + shift)
            down = gp_predict(model, x - shift)
            num_mean[:, i] = (up.mean_delta - down.mean_delta) / (2 * step)
            num_std[:, i] = (np.sqrt(up.variance) - np.sqrt(down.variance)) / (2 * step)
        np.testing.assert_allclose(dmean, num_mean, rtol=1e-5, atol=1e-7)
        np.testing.assert_allclose(dstd, num_std, rtol=1e-5, atol=1e-7)


def test_mean_gradient_vanishes_at_symmetric_point_and_far_away():
    h = GpHyperparams.from_natural(1.0, [1.0], 0.1)
    model = GpModel(np.array([[-1.0], [1.0]]), np.array([[1.0], [1.0]]), [h])
    dmean, _ = gp_predict_grads(model, [0.0])
    assert dmean[0, 0] == pytest.approx(0.0, abs=1e-12)
    dmean, dstd = gp_predict_grads(model, [50.0])
    assert dmean[0, 0] == pytest.approx(0.0, abs=1e-12)
    assert dstd[0, 0] == pytest.approx(0.0, abs=1e-12)


def test_factorizations_are_cached():
    rng = np.random.default_rng(3)
    model = _random_model(rng)
    assert model.factorization_count == 2
    for x in rng.standard_normal((20, model.input_dim)):
        gp_predict(model, x)
        gp_predict_grads(model, x)
    model.predict_batch(rng.standard_normal((10, model.input_dim)), with_grads=True)
    assert model.factorization_count == 2
    model.set_data(rng.standard_normal((5, 3)), rng.standard_normal((5, 2)))
    assert model.factorization_count == 4


def test_batch_prediction_matches_pointwise():
    rng = np.random.default_rng(4)
    model = _random_model(rng)
    batch = rng.standard_normal((6, model.input_dim))
    pred = model.predict_batch(batch)
    for p, x in enumerate(batch):
        single = gp_predict(model, x)
        np.testing.assert_allclose(pred.mean[p], single.mean_delta)
        np.testing.assert_allclose(pred.var_f[p], single.latent_variance)


def test_clamped_latent_variance_has_zero_gradient():
    model = GpModel(np.zeros((1, 2)), np.zeros((1, 1)), [GpHyperparams(0.0, np.zeros(2), -3.0)])
    # Doppelte Inverse: am Trainingspunkt wird s^2 - k K^-1 k negativ
    model._factors = [dataclasses.replace(f, inverse=2.0 * f.inverse) for f in model.factors()]
    pred = model.predict_batch(np.array([[0.0, 0.0], [1.0, 0.0]]), with_grads=True)
    assert pred.var_f[0, 0] == 0.0
    np.testing.assert_array_equal(pred.dvar_f[0], 0.0)
    assert pred.var_f[1, 0] > 0.0
    assert np.abs(pred.dvar_f[1, 0, 0]) > 0.0


def test_data_validation():
    h = GpHyperparams.from_natural(1.0, [1.0, 1.0], 0.1)
    with pytest.raises(ContractViolation):
        GpModel(np.zeros((3, 2)), np.zeros((2, 1)), [h])
    with pytest.raises(ContractViolation):
        GpModel(np.array([[0.0, np.nan]]), np.zeros((1, 1)), [h])
    model = GpModel(np.zeros((1, 2)), np.zeros((1, 1)), [h])
    with pytest.raises(ContractViolation):
        gp_predict(model, [0.0])


def test_ill_conditioned_gram_raises(monkeypatch):
    def always_fails(*args, **kwargs):
        raise LinAlgError("nicht positiv definit")

    monkeypatch.setattr("gp_model.gp_model.cholesky", always_fails)
    h = GpHyperparams.from_natural(1.0, [1.0], 0.1)
    with pytest.raises(IllConditionedError):
        factorize_gram(np.zeros((2, 1)), np.zeros(2), h)


def test_checkpoint_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(5)
    model = _random_model(rng)
    path = tmp_path / "model.json"
    save_model(model, str(path))
    loaded = load_model(str(path))
    np.testing.assert_array_equal(loaded.inputs, model.inputs)
    np.testing.assert_array_equal(loaded.targets, model.targets)
    for a, b in zip(loaded.hyperparams, model.hyperparams):
        assert a.to_dict() == b.to_dict()
    x = rng.standard_normal(model.input_dim)
    np.testing.assert_array_equal(gp_predict(loaded, x).mean, gp_predict(model, x).mean)
    np.testing.assert_array_equal(gp_predict(loaded, x).variance, gp_predict(model, x).variance)


def test_training_recovers_lengthscale():
    rng = np.random.default_rng(6)
    true_h = GpHyperparams.from_natural(1.0, [0.7], 0.1)
    inputs = np.sort(rng.uniform(-3.0, 3.0, size=100))[:, None]
    gram = kernel_matrix(inputs, inputs, true_h) + 1e-8 * np.eye(100)
    f = np.linalg.cholesky(gram) @ rng.standard_normal(100)
    targets = (f + 0.1 * rng.standard_normal(100))[:, None]
    model = fit_model(inputs, targets, restarts=3)
    trained = model.hyperparams[0]
    assert abs(trained.log_lengthscales[0] - np.log(0.7)) < 0.5
    assert abs(trained.log_noise_std - np.log(0.1)) < 0.7


def test_training_noise_free_data_reaches_small_noise():
    inputs = np.linspace(-2.0, 2.0, 20)[:, None]
    targets = 0.5 * inputs
    model = fit_model(inputs, targets, restarts=1)
    assert model.hyperparams[0].noise_std < 1e-2 * float(np.std(targets))


def test_more_restarts_never_worse():
    rng = np.random.default_rng(7)
    inputs = rng.uniform(-2, 2, size=(30, 2))
    targets = np.sin(inputs[:, :1]) + 0.05 * rng.standard_normal((30, 1))
    one = fit_model(inputs, targets, restarts=1)
    three = fit_model(inputs, targets, restarts=3)
    assert nlml(three, 0)[0] <= nlml(one, 0)[0] + 1e-9


def test_training_is_deterministic():
    rng = np.random.default_rng(8)
    inputs = rng.uniform(-2, 2, size=(25, 2))
    targets = np.cos(inputs[:, :1])
    a = fit_model(inputs, targets, restarts=2, settings=TrainingSettings(seed=3))
    b = fit_model(inputs, targets, restarts=2, settings=TrainingSettings(seed=3))
    assert a.hyperparams[0].to_dict() == b.hyperparams[0].to_dict()


def test_diverging_restarts_keep_initialization(monkeypatch):
    def diverges(*args, **kwargs):
        raise ValueError("divergiert")

    monkeypatch.setattr("gp_model.training.minimize", diverges)
    inputs = np.linspace(-1, 1, 10)[:, None]
    model = GpModel(inputs, inputs ** 2, [GpHyperparams.from_natural(1.0, [1.0], 0.1)])
    trained = train_hyperparams(model, restarts=2)
    assert flags.counts()["gp_restarts_diverged"] == 1
    assert trained.hyperparams[0].noise_std > 0


def test_training_rejects_zero_restarts():
    model = GpModel(np.zeros((2, 1)), np.array([[0.0], [1.0]]), [GpHyperparams.from_natural(1.0, [1.0], 0.1)])
    with pytest.raises(ContractViolation):
        train_hyperparams(model, restarts=0)


class _Trial:
    def __init__(self, observations, actions):
        self.observations = observations
        self.actions = actions


def test_build_dataset_uses_differences():
    obs = np.array([[0.0, 1.0], [0.5, 1.5], [1.5, 1.0]])
    act = np.array([[0.1], [-0.2]])
    inputs, targets = build_dataset([_Trial(obs, act)])
    np.testing.assert_array_equal(inputs, [[0.0, 1.0, 0.1], [0.5, 1.5, -0.2]])
    np.testing.assert_array_equal(targets, [[0.5, 0.5], [1.0, -0.5]])
    with pytest.raises(ContractViolation):
        build_dataset([])
