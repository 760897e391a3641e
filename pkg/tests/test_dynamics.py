import math

import numpy as np
import pytest

from config.settings import ATOL_RATIO, STEPPER_TOLERANCE_FACTOR
from modules.dynamics import (
    IntegratorStats,
    Trajectory,
    absolute_phase,
    energy_expectation,
    evolve,
    evolve_gate_chain,
    evolve_spectator_chain,
    loss_channels,
    population,
    relative_phase,
    sample_grid,
    subset_population,
    wrap_phase,
)
from modules.errors import DimensionMismatchError, IntegrationError, InvalidParameterError
from modules.hamiltonian import build_effective_hamiltonian, effective_generator
from modules.model import AtomLevel as L, BasisState, ParameterSet, StateVector

A10 = BasisState(L.A, L.ONE, 0)
S010 = BasisState(L.ZERO, L.ONE, 0)


def test_sample_grid_row_count():
    assert sample_grid(24.0, 0.01).size == 2401
    assert sample_grid(1.0, 0.3).tolist() == pytest.approx([0.0, 0.3, 0.6, 0.9])


def test_wrap_phase_range():
    assert wrap_phase(math.pi) == pytest.approx(math.pi)
    assert wrap_phase(-math.pi) == pytest.approx(math.pi)
    assert wrap_phase(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    np.testing.assert_allclose(wrap_phase(np.array([0.0, 2 * math.pi])), [0.0, 0.0], atol=1e-15)


def test_two_level_rabi_oscillation():
    omega = 2 * math.pi
    matrix = np.array([[0, omega / 2], [omega / 2, 0]], dtype=complex)
    traj = evolve(matrix, np.array([1.0, 0.0]), 1.0, sample_interval=0.25)
    expected = np.cos(omega * traj.times / 2) ** 2
    np.testing.assert_allclose(np.abs(traj.amplitudes[:, 0]) ** 2, expected, atol=1e-8)


def test_time_dependent_generator():
    # i dC/dt = t C  ->  C(t) = exp(-i t^2 / 2)
    traj = evolve(lambda t: np.array([[t]], dtype=complex), np.array([1.0]), 2.0, sample_interval=0.5)
    np.testing.assert_allclose(traj.final_amplitudes[0], np.exp(-2j), atol=1e-8)


def test_zero_generator_keeps_state(fig2):
    state = StateVector.from_label("a10+010", fig2.n_max)
    traj = evolve(np.zeros((48, 48)), state, 5.0)
    np.testing.assert_allclose(traj.final_amplitudes, state.amplitudes, atol=1e-15)


def test_final_time_off_grid(fig2):
    state = StateVector.from_label("a10", fig2.n_max)
    traj = evolve(effective_generator(fig2), state, 0.105, sample_interval=0.01)
    assert traj.times[-1] == pytest.approx(0.1)
    assert traj.final_time == 0.105
    assert traj.n_max == 2


@pytest.mark.parametrize("kwargs", [
    dict(t_final=0.0),
    dict(t_final=1.0, rel_tol=1e-2),
    dict(t_final=1.0, rel_tol=1e-14),
    dict(t_final=1.0, sample_interval=0.0),
])
def test_evolve_rejects_bad_arguments(fig2, kwargs):
    state = StateVector.from_label("a10", fig2.n_max)
    with pytest.raises(InvalidParameterError):
        evolve(effective_generator(fig2), state, **kwargs)


def test_evolve_rejects_overnormalised_state():
    with pytest.raises(InvalidParameterError):
        evolve(np.zeros((2, 2)), np.array([1.0, 1.0]), 1.0)


def test_evolve_rejects_dimension_mismatch(fig2):
    with pytest.raises(DimensionMismatchError):
        evolve(effective_generator(fig2), np.array([1.0, 0.0]), 1.0)


def test_integration_error_carries_failure_time():
    error = IntegrationError("Integration failed: step size too small", 12.5)
    assert error.failure_time == 12.5
    assert "t = 12.5 us" in str(error)
    assert error.exit_code == 3


def test_observables_on_superposition(fig2):
    state = StateVector.from_label("a10+010", fig2.n_max)
    traj = evolve(effective_generator(fig2), state, 1.0, sample_interval=0.1)
    assert population(traj, A10)[0] == pytest.approx(0.5)
    assert subset_population(traj, [A10, S010])[0] == pytest.approx(1.0)
    assert absolute_phase(traj, A10)[0] == pytest.approx(0.0)
    rel = relative_phase(traj, A10, S010)
    assert rel.defined.all()
    assert rel.segments() == [(0, traj.times.size)]


def test_relative_phase_undefined_without_amplitude(fig2):
    traj = evolve(effective_generator(fig2), StateVector.from_label("010", fig2.n_max), 0.5, sample_interval=0.1)
    rel = relative_phase(traj, A10, S010)
    assert not rel.defined.any()
    assert math.isnan(rel.final_value)
    assert rel.segments() == []


def test_energy_is_conserved(fig2):
    matrix = build_effective_hamiltonian(fig2).entries
    traj = evolve(matrix, StateVector.from_label("a10+010", fig2.n_max), 2.0, sample_interval=0.1)
    energy = energy_expectation(traj, matrix)
    np.testing.assert_allclose(energy, energy[0], atol=1e-6)


def test_loss_channels_match_norm_loss(fig3_dissipative):
    traj = evolve(
        effective_generator(fig3_dissipative),
        StateVector.from_label("a10", fig3_dissipative.n_max),
        5.0,
        sample_interval=0.001,
    )
    losses = loss_channels(traj, fig3_dissipative)
    norm_loss = 1.0 - traj.norm_squared()[-1]
    assert losses['atomic_loss'] + losses['cavity_loss'] == pytest.approx(norm_loss, rel=1e-2)
    assert losses['atomic_loss'] > 0 and losses['cavity_loss'] > 0


def test_loss_channels_vanish_without_dissipation(fig2):
    traj = evolve(effective_generator(fig2), StateVector.from_label("a10", fig2.n_max), 1.0)
    assert loss_channels(traj, fig2) == {'atomic_loss': 0.0, 'cavity_loss': 0.0}


def test_subspace_trajectories_are_labelled(fig3):
    chain = evolve_gate_chain(fig3, [0, 1, 0, 0, 0], 1.0)
    assert chain.basis_states[1] == A10
    assert population(chain, A10)[0] == 1.0
    spectator = evolve_spectator_chain(fig3, [1, 0, 0], 1.0)
    assert spectator.n_max is None
    with pytest.raises(InvalidParameterError):
        spectator.column(A10)


def test_subspace_rejects_wrong_length(fig3):
    with pytest.raises(DimensionMismatchError):
        evolve_gate_chain(fig3, [1, 0, 0], 1.0)


def test_uncoupled_params_leave_populations_constant():
    params = ParameterSet.symmetric(omega=0.0, delta_L=10.0, delta_C=5.0, g=0.0)
    traj = evolve(effective_generator(params), StateVector.from_label("a10+e01", params.n_max), 3.0)
    weights = np.abs(traj.amplitudes) ** 2
    assert weights.shape == (traj.times.size, params.dimension)
    assert np.max(np.ptp(weights, axis=0)) <= 1e-8
    np.testing.assert_allclose(weights, np.broadcast_to(weights[0], weights.shape), atol=1e-8)


def test_integrator_stats_record_steps(fig2):
    traj = evolve(effective_generator(fig2), StateVector.from_label("a10", fig2.n_max), 1.0, rel_tol=1e-8)
    stats = traj.stats
    assert stats.method == "DOP853"
    assert stats.status == 0
    assert stats.n_steps > 0
    assert stats.nfev >= stats.n_steps
    assert stats.abs_tol == pytest.approx(1e-8 * ATOL_RATIO)
    # |y| <= 1, so the bound sits between atol and atol + stepper rtol
    assert stats.abs_tol < stats.local_error_bound <= stats.abs_tol + 1e-8 * STEPPER_TOLERANCE_FACTOR * 1.001


def test_single_photon_decays_at_cavity_rate():
    params = ParameterSet.symmetric(omega=0.0, delta_L=10.0, delta_C=5.0, g=0.0, kappa=0.1)
    traj = evolve(effective_generator(params), StateVector.from_label("001", params.n_max), 1.0)
    assert traj.norm_squared()[-1] == pytest.approx(math.exp(-2 * 2 * math.pi * 0.1), abs=1e-8)
    assert traj.norm_squared()[-1] == pytest.approx(0.2846, abs=1e-4)


def test_halving_tolerance_barely_moves_final_state(fig2):
    state = StateVector.from_label("a10+010", fig2.n_max)
    coarse = evolve(effective_generator(fig2), state, 1.0, rel_tol=1e-6)
    fine = evolve(effective_generator(fig2), state, 1.0, rel_tol=5e-7)
    assert np.max(np.abs(coarse.final_amplitudes - fine.final_amplitudes)) < 1e-6


def test_relative_phase_restarts_after_gap():
    # c_num = exp(0.9 i k) with a vanishing sample at k = 5
    k = np.arange(11)
    num = np.exp(0.9j * k)
    num[5] = 0.0
    amplitudes = np.column_stack([num, np.ones(k.size)])
    stats = IntegratorStats("DOP853", 1e-10, 1e-14, 0, 0, "synthetic")
    traj = Trajectory(
        times=k.astype(float),
        amplitudes=amplitudes,
        final_time=10.0,
        final_amplitudes=amplitudes[-1],
        stats=stats,
        basis_states=(A10, S010),
    )
    rel = relative_phase(traj, A10, S010)
    assert rel.segments() == [(0, 5), (6, 11)]
    assert math.isnan(rel.unwrapped_phase[5])
    # First run continues past pi, the second starts again on the principal branch
    assert rel.unwrapped_phase[4] == pytest.approx(3.6)
    assert rel.unwrapped_phase[6] == pytest.approx(wrap_phase(5.4))
    np.testing.assert_allclose(np.diff(rel.unwrapped_phase[6:]), 0.9)
    assert rel.final_value == pytest.approx(wrap_phase(5.4) + 4 * 0.9)


def test_gate_chain_without_cavity_coupling_never_fills_photon_state(fig2):
    params = fig2.with_changes(g_A=0.0, g_B=0.0)
    chain = evolve_gate_chain(params, [0, 1, 0, 0, 0], 5.0)
    assert np.max(population(chain, BasisState(L.A, L.A, 1))) == 0.0
    assert chain.norm_squared() == pytest.approx(np.ones(chain.times.size), abs=1e-8)


def test_gate_chain_without_drive_is_detuned_rabi():
    params = ParameterSet(omega=0.0, delta_L=10.0, delta_C=5.0, g_A=0.0, g_B=3.0)
    chain = evolve_gate_chain(params, [0, 0, 0, 1, 0], 1.0)
    # Two levels split by delta_C - delta_L = -5 MHz, coupled by g_B = 3 MHz
    expected = 36.0 / 61.0 * np.sin(math.pi * math.sqrt(61.0) * chain.times) ** 2
    np.testing.assert_allclose(population(chain, BasisState(L.A, L.A, 1)), expected, atol=1e-8)
    np.testing.assert_allclose(population(chain, BasisState(L.A, L.E, 0)), 1.0 - expected, atol=1e-8)
