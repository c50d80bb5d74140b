import numpy as np
import pytest

from core import ConfigError, ContractViolation
from environment import (AngleCost, CartPole, CartPoleParams, GaussianInitialState, NoiseConfig, QuadraticCost,
                         TipCost, observe, random_controller, run_trial, saturate, saturate_grad, step_dynamics)
from environment.costs import CostConfig, CostVariant, SaturatingQuadraticCost, cost, make_cost


def test_hanging_equilibrium_is_stationary():
    state = np.array([0.0, np.pi, 0.0, 0.0])
    np.testing.assert_allclose(step_dynamics(state, 0.0, 0.1), state, atol=1e-12)


def test_upright_equilibrium_and_instability():
    upright = np.zeros(4)
    np.testing.assert_array_equal(step_dynamics(upright, 0.0, 0.1), upright)
    env = CartPole()
    state = np.array([0.0, 0.01, 0.0, 0.0])
    for _ in range(10):
        state = env.control_step(state, 0.0)
    assert state[1] > 0.05


def test_energy_is_conserved_without_friction_and_force():
    env = CartPole(CartPoleParams(friction=0.0))
    state = np.array([0.0, np.pi - 0.3, 0.0, 0.0])
    start = env.energy(state)
    for _ in range(50):
        state = env.step_dynamics(state, 0.0, 0.02)
    assert abs(env.energy(state) - start) / abs(start) < 1e-6


def test_dynamics_is_deterministic():
    state = np.array([0.1, 2.0, -0.3, 0.7])
    np.testing.assert_array_equal(step_dynamics(state, 3.0, 0.1), step_dynamics(state, 3.0, 0.1))


def test_dynamics_contract_violations():
    with pytest.raises(ContractViolation):
        step_dynamics(np.zeros(4), 10.5, 0.1)
    with pytest.raises(ContractViolation):
        step_dynamics(np.array([0.0, np.nan, 0.0, 0.0]), 0.0, 0.1)
    with pytest.raises(ContractViolation):
        step_dynamics(np.zeros(4), 0.0, 0.0)
    with pytest.raises(ContractViolation):
        CartPoleParams(pole_length=-1.0)


def test_observe_without_noise_is_exact():
    state = np.array([0.1, 0.2, 0.3, 0.4])
    np.testing.assert_array_equal(observe(state, NoiseConfig(0.0), np.random.default_rng(0)), state)


def test_observe_noise_statistics(rng):
    states = np.zeros((100_000, 4))
    noisy = observe(states, NoiseConfig(1.0), rng)
    assert noisy[:, 0].std() == pytest.approx(0.01, rel=0.02)
    assert noisy[:, 1].std() == pytest.approx(np.deg2rad(1.0), rel=0.02)
    np.testing.assert_allclose(NoiseConfig(4.0).stds, 2.0 * NoiseConfig(1.0).stds)


def test_noise_multiplier_must_be_non_negative():
    with pytest.raises(ContractViolation):
        NoiseConfig(-1.0)


def test_saturation_values():
    assert saturate(0.0) == 0.0
    assert saturate(np.pi / 2) == pytest.approx(1.0)
    assert saturate_grad(np.pi / 2) == pytest.approx(0.0, abs=1e-12)
    scan = saturate(np.linspace(-10, 10, 100_001))
    assert np.max(np.abs(scan)) == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.abs(scan) <= 1.0 + 1e-12)


def test_saturation_gradient_matches_finite_differences():
    u = np.linspace(-4, 4, 41)
    numeric = (saturate(u + 1e-6) - saturate(u - 1e-6)) / 2e-6
    np.testing.assert_allclose(saturate_grad(u), numeric, atol=1e-8)


def test_cost_values():
    angle = AngleCost()
    assert angle(np.zeros(4)) == 0.0
    assert angle(np.array([1.0, 0.0, 5.0, 5.0])) == pytest.approx(1.0 - np.exp(-1.0))
    tip = TipCost()
    assert tip(np.zeros(4)) == 0.0


def test_costs_stay_in_unit_interval(rng):
    states = rng.standard_normal((1000, 4)) * 3
    for c in (AngleCost(), TipCost()):
        values = c(states)
        assert np.all(values >= 0.0) and np.all(values < 1.0)


def test_tip_cost_is_periodic_and_symmetric():
    tip = TipCost()
    for beta in (0.3, 1.7, 3.0):
        state = np.array([0.2, beta, 0.0, 0.0])
        wrapped = state + np.array([0.0, 2 * np.pi, 0.0, 0.0])
        assert tip(wrapped) == pytest.approx(tip(state), abs=1e-12)
        mirrored = np.array([0.0, -beta, 0.0, 0.0])
        assert tip(mirrored) == pytest.approx(tip(np.array([0.0, beta, 0.0, 0.0])), abs=1e-12)


def test_angle_cost_distinguishes_wrapped_angles():
    angle = AngleCost()
    assert angle(np.array([0.0, 1.0, 0.0, 0.0])) != pytest.approx(angle(np.array([0.0, 2 * np.pi - 1.0, 0.0, 0.0])))


@pytest.mark.parametrize("cost_fn", [AngleCost(), TipCost(), QuadraticCost(np.diag([1.0, 2.0, 0.5, 0.0])),
                                     SaturatingQuadraticCost(np.eye(4) * 0.3, [0.1, 0.0, 0.0, 0.2])])
def test_cost_gradients_match_finite_differences(cost_fn, rng):
    states = rng.standard_normal((20, 4))
    grad = cost_fn.grad(states)
    numeric = np.empty_like(states)
    for i in range(4):
        shift = np.zeros(4)
        shift[i] = 1e-6
        numeric[:, i] = (cost_fn(states + shift) - cost_fn(states - shift)) / 2e-6
    np.testing.assert_allclose(grad, numeric, rtol=1e-6, atol=1e-9)


def test_make_cost_variants():
    assert isinstance(make_cost(CostConfig()), AngleCost)
    assert isinstance(make_cost(CostConfig(variant=CostVariant.TIP)), TipCost)
    with pytest.raises(ConfigError):
        make_cost(CostConfig(variant=CostVariant.QUADRATIC))
    assert cost(np.zeros(4), CostConfig(variant=CostVariant.TIP)) == 0.0


def test_initial_state_sampling():
    init = GaussianInitialState()
    draws = np.ones((3, 4))
    np.testing.assert_allclose(init.sample(draws), [[0.1, np.pi + 0.1, 0.1, 0.1]] * 3)
    with pytest.raises(ContractViolation):
        GaussianInitialState(mean=(0.0,), std=(-1.0,))


def test_run_trial_shapes_and_bounds(rng):
    env = CartPole()
    record = run_trial(env, random_controller(env.u_max, rng), 30, NoiseConfig(1.0), rng,
                       GaussianInitialState(), AngleCost())
    assert record.true_states.shape == (31, 4)
    assert record.observations.shape == (31, 4)
    assert record.actions.shape == (30, 1)
    assert np.all(np.abs(record.actions) <= env.u_max)
    np.testing.assert_allclose(record.costs, AngleCost()(record.true_states))
    assert len(record.csv_rows()) == 31


def test_run_trial_is_reproducible():
    env = CartPole()
    records = []
    for _ in range(2):
        rng = np.random.default_rng(9)
        records.append(run_trial(env, random_controller(env.u_max, rng), 10, NoiseConfig(1.0), rng,
                                 GaussianInitialState(), TipCost()))
    np.testing.assert_array_equal(records[0].observations, records[1].observations)
