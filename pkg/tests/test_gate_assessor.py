import math

import pytest

from modules.gate_assessor import GateAssessor


def assess(**overrides):
    metrics = {'residual_phase': math.pi - 0.05, 'fidelity': 0.98, 'mean_success': 0.97}
    metrics.update(overrides)
    return GateAssessor().assess_gate("run", **metrics)


def test_clean_gate_passes():
    result = assess()
    assert result['verdict'] == 'PASS'
    assert result['phase_error_rad'] == pytest.approx(0.05)
    assert result['dominant_loss'] == 'none'
    assert result['recommendations'][0].startswith("✓")


def test_phase_error_wraps_around():
    assert assess(residual_phase=-math.pi + 0.1)['phase_error_rad'] == pytest.approx(0.1)


@pytest.mark.parametrize("overrides,verdict", [
    ({'residual_phase': math.pi - 0.3}, 'WARN'),
    ({'residual_phase': 0.0}, 'FAIL'),
    ({'fidelity': 0.9}, 'WARN'),
    ({'fidelity': 0.5}, 'FAIL'),
    ({'mean_success': 0.8}, 'WARN'),
    ({'mean_success': 0.8, 'fidelity': 0.1}, 'FAIL'),
    ({'fidelity': float('nan')}, 'FAIL'),
])
def test_most_restrictive_grade_wins(overrides, verdict):
    assert assess(**overrides)['verdict'] == verdict


def test_dominant_loss_and_advice():
    result = assess(mean_success=0.7, losses={'atomic_loss': 0.2, 'cavity_loss': 0.1})
    assert result['dominant_loss'] == 'atomic'
    assert any("atomic decay" in r for r in result['recommendations'])

    result = assess(mean_success=0.7, losses={'atomic_loss': 0.05, 'cavity_loss': 0.25})
    assert result['dominant_loss'] == 'cavity'
    assert any("cavity decay" in r for r in result['recommendations'])


def test_leakage_and_adiabaticity_advice():
    result = assess(leakage=1e-3, adiabaticity={'omega_over_delta_L': 0.33})
    assert any("n_max" in r for r in result['recommendations'])
    assert any("adiabatic" in r for r in result['recommendations'])
