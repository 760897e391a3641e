"""
End-to-end reproduction checks for the adiabatic and non-adiabatic parameter regimes,
dissipation, analytic consistency and numerical soundness.
"""
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from modules.dynamics import evolve, evolve_gate_chain, evolve_spectator_chain, population, relative_phase
from modules.gate import run_gate, run_protocol, sweep_point_parameters
from modules.hamiltonian import (
    GATE_CHAIN_STATES,
    SPECTATOR_CHAIN_STATES,
    FrameDirection,
    LabFrameFrequencies,
    LabGenerator,
    charge_blocks,
    effective_generator,
    frame_rotate,
)
from modules.model import AtomLevel as L, BasisState, ParameterSet, StateVector, enumerate_basis, index_of
from modules.reduction import (
    approximate_parameters,
    effective_parameters,
    gate_duration,
    light_shift_phase,
    two_level_solution,
)

FAST_RTOL = 1e-8

A10 = BasisState(L.A, L.ONE, 0)
S010 = BasisState(L.ZERO, L.ONE, 0)


def phase_error(phase, target=math.pi):
    return abs(math.remainder(phase - target, 2 * math.pi))


def superposition_trajectory(params, t_final, rel_tol=FAST_RTOL):
    initial = StateVector.from_label("a10+010", params.n_max)
    return evolve(effective_generator(params), initial, t_final, rel_tol, sample_interval=0.01)


# ============================================================================
# REGIME REPRODUCTION
# ============================================================================

class TestAdiabaticRegime:

    def test_relative_phase_settles_at_pi(self, fig2):
        T = gate_duration(fig2)
        assert T == pytest.approx(24.0, abs=0.01)
        traj = superposition_trajectory(fig2, T)
        rel = relative_phase(traj, A10, S010)
        assert phase_error(rel.final_value) < 0.15

    def test_spectator_population_with_sudden_switch_on(self, fig2):
        traj = superposition_trajectory(fig2, gate_duration(fig2))
        relative = population(traj, S010) / 0.5
        assert relative.min() >= 0.95
        assert relative.mean() >= 0.97
        assert relative.max() <= 1.0 + 1e-8

    def test_populations_with_ramped_switch_on(self, fig2_ramped):
        T = gate_duration(fig2_ramped)
        traj = superposition_trajectory(fig2_ramped, T)
        spectator = population(traj, S010) / 0.5
        assert spectator.min() >= 0.97
        assert spectator.max() <= 1.0 + 1e-8
        final = abs(traj.final_state.amplitude(A10)) ** 2
        assert abs(final - 0.5) < 0.03
        assert phase_error(relative_phase(traj, A10, S010).final_value) < 0.15


class TestNonAdiabaticRegime:

    def test_relative_phase_at_reduced_gate_time(self, fig3):
        T = gate_duration(fig3)
        assert T == pytest.approx(16.30, abs=0.01)
        traj = superposition_trajectory(fig3, T)
        assert phase_error(relative_phase(traj, A10, S010).final_value) < 0.25

    def test_full_return_near_dressed_gate_time(self, fig3):
        T_dressed = gate_duration(fig3, timing="dressed")
        traj = superposition_trajectory(fig3, T_dressed + 1.0)
        returned = population(traj, A10) / 0.5
        window = np.abs(traj.times - T_dressed) <= 1.0
        assert returned[window].max() >= 0.93
        # Halfway through, the active pair has swapped into |1,a,0>
        halfway = np.argmin(np.abs(traj.times - T_dressed / 2))
        assert returned[halfway] < 0.15


class TestDissipation:

    def test_fig3_success_close_to_ninety_percent(self, fig3_dissipative):
        report = run_protocol(fig3_dissipative, rel_tol=FAST_RTOL)
        assert 0.85 <= report.mean_success <= 0.95
        assert all(0.0 <= run.success <= 1.0 for run in report.runs.values())

    def test_fig2_success_above_ninety_percent(self, fig2_dissipative):
        report = run_protocol(fig2_dissipative, rel_tol=FAST_RTOL)
        assert report.mean_success > 0.9

    @pytest.mark.parametrize("field", ["gamma", "kappa"])
    def test_success_monotone_in_each_rate(self, fig3, field):
        successes = []
        for value in (0.0, 0.05, 0.1):
            params = fig3.with_changes(**{field: value})
            successes.append(run_gate(params, "11", rel_tol=FAST_RTOL).success)
        assert successes[0] > successes[1] > successes[2]


# ============================================================================
# ANALYTIC CONSISTENCY
# ============================================================================

@settings(max_examples=1000)
@given(
    st.floats(min_value=0.1, max_value=50.0),
    st.floats(min_value=5.0, max_value=500.0),
    st.floats(min_value=-500.0, max_value=500.0),
    st.floats(min_value=0.0, max_value=20.0),
)
def test_light_shift_identity_on_random_draws(omega, delta_L, delta_C, g):
    assume(abs(delta_C) > 1.0)
    params = ParameterSet.symmetric(omega=omega, delta_L=delta_L, delta_C=delta_C, g=g)
    s = g * g / (delta_L * delta_C)
    assume(abs(1 - 2 * s) > 0.1 and abs(1 - s) > 0.1)
    red = effective_parameters(params)
    expected = params.omega_rad ** 2 / (4 * params.complex_delta_L)
    assert abs((red.delta - 0.5 * red.omega_eff) - expected) <= 1e-12 * abs(expected)


def test_reduced_model_tracks_full_dynamics(fig2):
    T = gate_duration(fig2)
    full = evolve(effective_generator(fig2), StateVector.basis(A10, fig2.n_max), T, FAST_RTOL, 0.01)
    red = effective_parameters(fig2)
    reduced = np.array([abs(two_level_solution(red, (0.0, 1.0), t).c_a10) for t in full.times])
    assert np.max(np.abs(np.abs(full.amplitude_series(A10)) - reduced)) <= 0.12


def test_spectator_phase_follows_light_shift(fig2):
    T = gate_duration(fig2)
    chain = evolve_spectator_chain(fig2, [1, 0, 0], T, FAST_RTOL, 0.01)
    phase = np.unwrap(np.angle(chain.amplitude_series(S010)))
    expected = -light_shift_phase(effective_parameters(fig2), T).real
    assert chain.times[-1] == pytest.approx(T)
    assert phase[-1] == pytest.approx(expected, rel=0.05)


@pytest.mark.parametrize("c", [1.0, 2.0, 4.0])
def test_ratio_scaling(fig2, c):
    scaled = sweep_point_parameters(fig2, (("laser_scale", c),))
    assert approximate_parameters(scaled).omega_eff == pytest.approx(approximate_parameters(fig2).omega_eff, rel=1e-12)
    run = run_gate(scaled, "a10+010", rel_tol=FAST_RTOL)
    assert phase_error(run.conditional_phase) < 0.2


# ============================================================================
# NUMERICAL SOUNDNESS
# ============================================================================

@pytest.mark.parametrize("preset", ["fig2", "fig3"])
def test_subspace_oracles(request, preset):
    params = request.getfixturevalue(preset)
    T = gate_duration(params)
    rel_tol = 1e-12

    full = evolve(effective_generator(params), StateVector.basis(A10, params.n_max), T, rel_tol, 0.05)
    chain = evolve_gate_chain(params, [0, 1, 0, 0, 0], T, rel_tol, 0.05)
    columns = [index_of(s) for s in GATE_CHAIN_STATES]
    assert np.max(np.abs(full.amplitudes[:, columns] - chain.amplitudes)) <= 1e-8

    full = evolve(effective_generator(params), StateVector.basis(S010, params.n_max), T, rel_tol, 0.05)
    chain = evolve_spectator_chain(params, [1, 0, 0], T, rel_tol, 0.05)
    columns = [index_of(s) for s in SPECTATOR_CHAIN_STATES]
    assert np.max(np.abs(full.amplitudes[:, columns] - chain.amplitudes)) <= 1e-8


def test_conservation_without_dissipation(fig2):
    initial = StateVector.from_label("a10+010+e01+1e0+0a1", fig2.n_max)
    traj = evolve(effective_generator(fig2), initial, 50.0, sample_interval=0.1)
    norm = traj.norm_squared()
    assert np.max(np.abs(norm - norm[0])) <= 1e-8

    weights = np.abs(traj.amplitudes) ** 2
    basis = enumerate_basis(fig2.n_max)
    for atom in ("atom_a", "atom_b"):
        ground = [k for k, s in enumerate(basis) if getattr(s, atom) == L.ZERO]
        series = weights[:, ground].sum(axis=1)
        assert np.max(np.abs(series - series[0])) <= 1e-8
    for block in charge_blocks(fig2.n_max).values():
        series = weights[:, block].sum(axis=1)
        assert np.max(np.abs(series - series[0])) <= 1e-8


def test_dissipative_norm_never_increases(fig3_dissipative):
    initial = StateVector.from_label("a10+010+a00", fig3_dissipative.n_max)
    traj = evolve(effective_generator(fig3_dissipative), initial, 20.0, sample_interval=0.05)
    assert np.all(np.diff(traj.norm_squared()) <= 1e-10)


def test_lab_frame_equivalence():
    params = ParameterSet.symmetric(omega=2.0, delta_L=10.0, delta_C=5.0, g=1.5)
    freqs = LabFrameFrequencies.from_parameters(params)
    assert max(abs(f) for f in (freqs.omega_1, freqs.omega_e, freqs.omega_a, freqs.omega_L, freqs.omega_C)) <= 100

    initial = StateVector.from_label("a10+010+1a0", params.n_max)
    rel_tol = 1e-11
    lab = evolve(LabGenerator(params, freqs), initial, 1.0, rel_tol, 0.01)
    interaction = evolve(effective_generator(params), initial, 1.0, rel_tol, 0.01)
    for t, lab_state in lab.samples:
        rotated = frame_rotate(lab_state, freqs, t, FrameDirection.TO_INTERACTION)
        k = int(round(t / 0.01))
        assert np.max(np.abs(rotated.amplitudes - interaction.amplitudes[k])) <= 1e-6


def test_truncation_convergence(fig2):
    low = run_protocol(fig2, rel_tol=1e-10)
    high = run_protocol(fig2.with_changes(n_max=3), rel_tol=1e-10)
    assert phase_error(low.residual_phase, high.residual_phase) < 1e-4
    assert abs(low.mean_success - high.mean_success) < 1e-6

    low_run = run_gate(fig2, "a10+010", rel_tol=1e-10)
    high_run = run_gate(fig2.with_changes(n_max=3), "a10+010", rel_tol=1e-10)
    assert phase_error(low_run.conditional_phase, high_run.conditional_phase) < 1e-4
    assert high_run.leakage < 1e-4
