import numpy as np
import pytest

from core import ConfigError, ContractViolation, ParticleStreams, flags
from environment import GaussianInitialState, QuadraticCost
from environment.costs import SaturatingQuadraticCost
from policy import LinearPolicy, PolicyEnvInfo, PolicyInputMap, PolicyParams, policy_init
from rollout import (LinearGaussianModel, RolloutConfig, RolloutMode, StateBatch, gr_resample, propagate_step,
                     rollout_batch, rollout_seed)


def _linear_setup(noise_std=0.1, latent_std=None):
    model = LinearGaussianModel([[0.0, 0.1], [-0.2, 0.0]], [[0.0], [0.5]], noise_std, latent_std)
    policy = LinearPolicy(PolicyInputMap(2), 1, 10.0)
    params = PolicyParams(policy, policy.pack([[0.3, -0.4]], [0.2]))
    initial = GaussianInitialState(mean=(0.5, -0.5), std=(0.2, 0.1))
    return model, params, initial, QuadraticCost(np.eye(2))


def test_config_validation():
    with pytest.raises(ConfigError):
        RolloutConfig(n_particles=0)
    with pytest.raises(ConfigError):
        RolloutConfig(noise_variance_multiplier=-1.0)
    with pytest.raises(ConfigError):
        RolloutConfig.from_dict({"n_particles": 5, "foo": 1})
    cfg = RolloutConfig(mode="gaussian_resample", fixed_seed=True)
    assert cfg.resamples and cfg.seed_is_fixed
    assert RolloutConfig.from_dict(cfg.to_dict()) == cfg


def test_drop_model_uncertainty_keeps_only_noise():
    model, params, _, _ = _linear_setup(noise_std=0.1, latent_std=0.3)
    batch = StateBatch(np.zeros((4, 2)))
    eps = np.zeros((4, 2))
    res = propagate_step(model, params, batch, RolloutConfig(drop_model_uncertainty=True), eps=eps)
    np.testing.assert_allclose(res.sigma, 0.1)
    np.testing.assert_array_equal(res.dsigma_dx, 0.0)
    res = propagate_step(model, params, batch, RolloutConfig(noise_variance_multiplier=100.0), eps=eps)
    np.testing.assert_allclose(res.sigma, np.sqrt(0.09 + 1.0))


def test_propagation_is_reparameterized():
    model, params, _, _ = _linear_setup()
    batch = StateBatch(np.random.default_rng(0).standard_normal((6, 2)))
    res = propagate_step(model, params, batch, RolloutConfig(), ParticleStreams(3), step=2)
    np.testing.assert_array_equal(res.next_states.states, res.mu + res.sigma * res.eps)


def test_propagation_requires_draws_or_streams():
    model, params, _, _ = _linear_setup()
    batch = StateBatch(np.zeros((3, 2)))
    with pytest.raises(ContractViolation):
        propagate_step(model, params, batch, RolloutConfig())
    with pytest.raises(ContractViolation):
        propagate_step(model, params, batch, RolloutConfig(), eps=np.zeros((2, 2)))


def test_identical_particles_with_identical_draws_stay_identical():
    model, params, _, _ = _linear_setup()
    batch = StateBatch(np.tile([[0.3, -0.1]], (3, 1)))
    eps = np.tile([[0.5, -1.2]], (3, 1))
    res = propagate_step(model, params, batch, RolloutConfig(), eps=eps)
    assert np.all(res.next_states.states == res.next_states.states[0])


def test_rollout_shapes_on_cartpole_sized_problem():
    model = LinearGaussianModel(np.eye(4) * -0.05, np.ones((4, 1)) * 0.01, 0.05)
    params = policy_init("rbf", np.random.default_rng(0), PolicyEnvInfo(), n_basis=10)
    tape = rollout_batch(model, params, RolloutConfig(n_particles=300, horizon=30), GaussianInitialState(),
                         QuadraticCost(np.eye(4)))
    assert tape.states.shape == (31, 300, 4)
    assert tape.actions.shape == (30, 300, 1)
    assert tape.du_dtheta.shape == (30, 300, 1, params.n_params)
    assert tape.costs.shape == (31, 300)
    assert tape.alive.all()
    assert np.all(np.abs(tape.actions) <= 10.0)


def test_tape_satisfies_transition_identity():
    model, params, initial, cost = _linear_setup()
    tape = rollout_batch(model, params, RolloutConfig(n_particles=20, horizon=8), initial, cost)
    for t in range(tape.horizon):
        np.testing.assert_array_equal(tape.states[t + 1], tape.mu[t] + tape.sigma[t] * tape.eps[t])
        np.testing.assert_array_equal(tape.inputs[t], tape.states[t])
    np.testing.assert_allclose(tape.costs, cost(tape.states))


def test_fixed_seed_rollouts_are_bit_identical():
    model, params, initial, cost = _linear_setup()
    cfg = RolloutConfig(n_particles=15, horizon=6, mode=RolloutMode.FIXED_SEED, seed=4)
    a = rollout_batch(model, params, cfg, initial, cost, call_index=0)
    b = rollout_batch(model, params, cfg, initial, cost, call_index=7)
    np.testing.assert_array_equal(a.states, b.states)
    np.testing.assert_array_equal(a.costs, b.costs)
    assert rollout_seed(cfg, 0) == rollout_seed(cfg, 7) == 4


def test_plain_rollouts_draw_fresh_noise_per_call():
    model, params, initial, cost = _linear_setup()
    cfg = RolloutConfig(n_particles=15, horizon=6, seed=4)
    a = rollout_batch(model, params, cfg, initial, cost, call_index=0)
    b = rollout_batch(model, params, cfg, initial, cost, call_index=1)
    assert not np.array_equal(a.states, b.states)
    again = rollout_batch(model, params, cfg, initial, cost, call_index=1)
    np.testing.assert_array_equal(b.states, again.states)


def test_particle_draws_do_not_depend_on_batch_size():
    model, params, initial, cost = _linear_setup()
    small = rollout_batch(model, params, RolloutConfig(n_particles=10, horizon=5), initial, cost)
    large = rollout_batch(model, params, RolloutConfig(n_particles=20, horizon=5), initial, cost)
    np.testing.assert_allclose(small.states, large.states[:, :10], rtol=1e-12, atol=1e-14)


def test_zero_horizon_returns_initial_cost():
    model, params, initial, cost = _linear_setup()
    tape = rollout_batch(model, params, RolloutConfig(n_particles=7, horizon=0), initial, cost)
    assert tape.states.shape == (1, 7, 2)
    np.testing.assert_allclose(tape.particle_returns(), cost(tape.states[0]))


def test_return_standard_error():
    model, params, initial, cost = _linear_setup()
    tape = rollout_batch(model, params, RolloutConfig(n_particles=50, horizon=4), initial, cost)
    returns = tape.particle_returns()
    assert tape.return_standard_error() == pytest.approx(returns.std(ddof=1) / np.sqrt(50))
    np.testing.assert_allclose(tape.returns_to_go()[-1], tape.costs[-1])


def test_non_finite_particles_are_truncated():
    model = LinearGaussianModel([[1e10]], [[0.0]], 0.1)
    policy = LinearPolicy(PolicyInputMap(1), 1, 10.0)
    params = PolicyParams(policy, policy.pack([[0.1]], [0.0]))
    initial = GaussianInitialState(mean=(1e300,), std=(0.0,))
    cost = SaturatingQuadraticCost([[1.0]], [0.0])
    with np.errstate(over="ignore", invalid="ignore"):
        tape = rollout_batch(model, params, RolloutConfig(n_particles=3, horizon=3), initial, cost)
    assert flags.has_failures()
    assert flags.counts()["particle_truncated"] == 1
    assert not tape.alive[1:].any()
    assert np.all(np.isfinite(tape.states)) and np.all(np.isfinite(tape.costs))
    np.testing.assert_array_equal(tape.costs[1:], 0.0)


def test_gaussian_resample_with_zero_draws_collapses_to_mean(rng):
    batch = StateBatch(rng.standard_normal((40, 3)))
    resampled, record = gr_resample(batch, draws=np.zeros((40, 3)))
    np.testing.assert_allclose(resampled.states, np.tile(batch.states.mean(axis=0), (40, 1)))
    np.testing.assert_allclose(record.chol @ record.chol.T, np.cov(batch.states, rowvar=False))


def test_gaussian_resample_statistics(rng):
    source = rng.multivariate_normal([1.0, -2.0], [[1.0, 0.6], [0.6, 2.0]], size=100_000)
    batch = StateBatch(source)
    resampled, record = gr_resample(batch, ParticleStreams(11), step=1)
    n = source.shape[0]
    stderr = np.sqrt(np.diag(record.cov) / n)
    assert np.all(np.abs(resampled.states.mean(axis=0) - record.mean) < 3 * stderr + 1e-12)
    centered = resampled.states - resampled.states.mean(axis=0)
    products = centered[:, :, None] * centered[:, None, :]
    cov_stderr = products.std(axis=0, ddof=1) / np.sqrt(n)
    assert np.all(np.abs(np.cov(resampled.states, rowvar=False) - record.cov) <= 3 * cov_stderr)
    np.testing.assert_array_equal(resampled.states, record.mean + record.draws @ record.chol.T)


def test_gaussian_resample_of_identical_particles_adds_jitter():
    batch = StateBatch(np.tile([[0.5, 1.0]], (10, 1)))
    resampled, record = gr_resample(batch, ParticleStreams(0), step=1)
    assert record.jitter > 0
    assert flags.counts()["gr_jitter"] == 1
    assert np.max(np.abs(resampled.states - [0.5, 1.0])) < 1e-3


def test_gaussian_resample_with_fewer_particles_than_dimensions():
    batch = StateBatch(np.random.default_rng(2).standard_normal((2, 4)))
    resampled, record = gr_resample(batch, ParticleStreams(0), step=1)
    assert record.jitter > 0
    assert np.all(np.isfinite(resampled.states))


def test_gaussian_resample_rollout_records_each_step():
    model, params, initial, cost = _linear_setup()
    cfg = RolloutConfig(n_particles=25, horizon=4, mode=RolloutMode.GAUSSIAN_RESAMPLE)
    tape = rollout_batch(model, params, cfg, initial, cost)
    assert tape.resamples[0] is None
    assert all(r is not None for r in tape.resamples[1:])
    for t in range(1, tape.horizon):
        r = tape.resamples[t]
        np.testing.assert_array_equal(tape.inputs[t], r.mean + r.draws @ r.chol.T)
        np.testing.assert_allclose(r.mean, tape.states[t].mean(axis=0))


def test_tape_csv_dump(tmp_path):
    model, params, initial, cost = _linear_setup()
    tape = rollout_batch(model, params, RolloutConfig(n_particles=3, horizon=2), initial, cost)
    path = tmp_path / "tape.csv"
    tape.dump_csv(str(path))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].split(",") == tape.csv_header()
    assert len(lines) == 1 + 3 * 3
