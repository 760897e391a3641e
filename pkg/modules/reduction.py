"""
Adiabatic-elimination analytics for the 4-photon 2-atom gate

All returned rates are angular (rad/us); `ReducedParameters.to_dict` reports
them in MHz.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from config.settings import DEFAULT_GATE_TIMING, GATE_AREA_RTOL, POLE_GUARD
from modules.errors import NoGateError, ResonanceProximityError, UnsupportedConfigurationError
from modules.model import TWO_PI, ParameterSet, PulseEnvelope

logger = logging.getLogger(__name__)


class ReductionVariant(str, Enum):
    EXACT = "exact"
    APPROXIMATE = "approximate"
    DRESSED = "dressed"


@dataclass(frozen=True)
class ReducedParameters:
    """s (dimensionless) and the light shifts / effective Rabi frequency in rad/us."""

    s: complex
    delta: complex
    omega_eff: complex
    delta_prime: complex
    variant: ReductionVariant

    def to_dict(self) -> Dict[str, float]:
        suffix = self.variant.value
        return {
            f's_{suffix}': self.s.real,
            f's_{suffix}_imag': self.s.imag,
            f'delta_{suffix}_MHz': self.delta.real / TWO_PI,
            f'delta_{suffix}_imag_MHz': self.delta.imag / TWO_PI,
            f'omega_eff_{suffix}_MHz': self.omega_eff.real / TWO_PI,
            f'omega_eff_{suffix}_imag_MHz': self.omega_eff.imag / TWO_PI,
            f'delta_prime_{suffix}_MHz': self.delta_prime.real / TWO_PI,
            f'delta_prime_{suffix}_imag_MHz': self.delta_prime.imag / TWO_PI,
        }


@dataclass(frozen=True)
class TwoLevelSolution:
    c_1a0: complex
    c_a10: complex
    big_theta: complex
    theta: complex


# ============================================================================
# HELPERS
# ============================================================================

def _common_coupling(params: ParameterSet) -> float:
    if not params.couplings_equal:
        raise UnsupportedConfigurationError(
            f"Reduction assumes g_A = g_B, got g_A={params.g_A} MHz and g_B={params.g_B} MHz"
        )
    return params.g_A_rad


def _check_detunings(params: ParameterSet) -> None:
    if params.complex_delta_L == 0:
        raise ResonanceProximityError("Laser detuning Delta_L + i Gamma/2 vanishes")
    if params.complex_delta_C == 0:
        raise ResonanceProximityError("Cavity detuning delta_C + i kappa vanishes")


def coupling_ratio(params: ParameterSet) -> complex:
    """s = g^2 / (Delta_L~ delta_C~)."""
    g = _common_coupling(params)
    _check_detunings(params)
    return g * g / (params.complex_delta_L * params.complex_delta_C)


def light_shift_scale(params: ParameterSet) -> complex:
    """|Omega|^2 / (4 Delta_L~), the bare single-atom light shift."""
    _check_detunings(params)
    return params.omega_rad ** 2 / (4.0 * params.complex_delta_L)


# ============================================================================
# ELIMINATION FORMULAS
# ============================================================================

def effective_parameters(params: ParameterSet) -> ReducedParameters:
    """
    Exact elimination result for the symmetric case g_A = g_B, common Omega.

    Raises:
        ResonanceProximityError: |1 - 2s| or |1 - s| within POLE_GUARD of zero
        UnsupportedConfigurationError: unequal couplings
    """
    s = coupling_ratio(params)
    if abs(1 - 2 * s) <= POLE_GUARD or abs(1 - s) <= POLE_GUARD:
        raise ResonanceProximityError(
            f"Adiabatic elimination invalid near the pole: |1 - 2s| = {abs(1 - 2 * s):.4g}"
        )
    scale = light_shift_scale(params)
    return ReducedParameters(
        s=s,
        delta=0.5 * scale * (1 / (1 - 2 * s) + 1),
        omega_eff=scale * (1 / (1 - 2 * s) - 1),
        delta_prime=scale / (1 - s),
        variant=ReductionVariant.EXACT,
    )


def approximate_parameters(params: ParameterSet) -> ReducedParameters:
    """Leading order in s: delta ~ delta' ~ scale (1 + s), Omega_eff ~ Omega^2 s / (2 Delta_L~)."""
    s = coupling_ratio(params)
    scale = light_shift_scale(params)
    shift = scale * (1 + s)
    return ReducedParameters(
        s=s,
        delta=shift,
        omega_eff=params.omega_rad ** 2 / (2.0 * params.complex_delta_L) * s,
        delta_prime=shift,
        variant=ReductionVariant.APPROXIMATE,
    )


def _connected_eigenvalue(matrix: np.ndarray) -> complex:
    """Eigenvalue whose eigenvector has the largest weight on the first (undriven) level."""
    values, vectors = np.linalg.eig(matrix)
    weights = np.abs(vectors[0, :]) ** 2 / np.sum(np.abs(vectors) ** 2, axis=0)
    return complex(values[int(np.argmax(weights))])


def dressed_parameters(params: ParameterSet) -> ReducedParameters:
    """
    Light shifts and splitting from exact eigenvalues of the small blocks.

    The gate pair splits into an antisymmetric combination that never couples to
    the cavity and a symmetric one that couples with sqrt(2) g; the spectator
    atom sees the single-atom chain. No expansion in Omega / Delta_L is made.
    """
    g = _common_coupling(params)
    _check_detunings(params)
    half_omega = 0.5 * params.omega_rad
    dL = params.complex_delta_L
    dC = params.complex_delta_C
    root2_g = math.sqrt(2.0) * g

    antisymmetric = np.array([[0, half_omega], [half_omega, -dL]], dtype=complex)
    symmetric = np.array([
        [0, half_omega, 0],
        [half_omega, -dL, root2_g],
        [0, root2_g, -dC],
    ], dtype=complex)
    spectator = np.array([
        [0, half_omega, 0],
        [half_omega, -dL, g],
        [0, g, -dC],
    ], dtype=complex)

    e_anti = _connected_eigenvalue(antisymmetric)
    e_sym = _connected_eigenvalue(symmetric)
    e_spectator = _connected_eigenvalue(spectator)
    return ReducedParameters(
        s=g * g / (dL * dC),
        delta=0.5 * (e_sym + e_anti),
        omega_eff=e_sym - e_anti,
        delta_prime=e_spectator,
        variant=ReductionVariant.DRESSED,
    )


def adiabaticity_ratios(params: ParameterSet) -> Dict[str, float]:
    """
    The two alternative validity conditions of the elimination, as ratios.

    Small values mean the elimination is trustworthy; nothing is enforced.
    """
    delta_L = abs(params.delta_L)
    cavity_shift = params.g_A ** 2 / params.delta_C if params.delta_C else math.inf
    shifted = abs(params.delta_L - cavity_shift)
    return {
        'omega_over_delta_L': params.omega / delta_L if delta_L else math.inf,
        'cavity_shift_over_delta_L': abs(cavity_shift) / delta_L if delta_L else math.inf,
        'omega_over_shifted_delta_L': params.omega / shifted if shifted else math.inf,
    }


# ============================================================================
# PULSE AREAS AND TIMING
# ============================================================================

def two_level_solution(
    red: ReducedParameters,
    c0: Sequence[complex],
    t: float,
    envelope: PulseEnvelope = PulseEnvelope()
) -> TwoLevelSolution:
    """
    Closed-form solution of the reduced |1,a,0>, |a,1,0> system.

    With Theta(t) = integral of delta and theta(t) = integral of Omega_eff / 2,
    both scaled by the squared envelope (quasi-static reduction):
        C_1a0(t) e^{i Theta} = C_1a0(0) cos(theta) - i C_a10(0) sin(theta)
        C_a10(t) e^{i Theta} = C_a10(0) cos(theta) - i C_1a0(0) sin(theta)

    Args:
        red: Reduced parameters
        c0: Initial (C_1a0, C_a10)
        t: Time in us
        envelope: Drive envelope

    Returns:
        TwoLevelSolution with amplitudes and the areas Theta, theta
    """
    area = envelope.squared_area(t)
    big_theta = red.delta * area
    theta = 0.5 * red.omega_eff * area
    phase = cmath.exp(-1j * big_theta)
    cos_theta = cmath.cos(theta)
    sin_theta = cmath.sin(theta)
    c_1a0, c_a10 = complex(c0[0]), complex(c0[1])
    return TwoLevelSolution(
        c_1a0=phase * (c_1a0 * cos_theta - 1j * c_a10 * sin_theta),
        c_a10=phase * (c_a10 * cos_theta - 1j * c_1a0 * sin_theta),
        big_theta=big_theta,
        theta=theta,
    )


def light_shift_phase(red: ReducedParameters, t: float, envelope: PulseEnvelope = PulseEnvelope()) -> complex:
    """Theta'(t): C_010(t) = C_010(0) exp(-i Theta'(t))."""
    return red.delta_prime * envelope.squared_area(t)


def _timing_parameters(params: ParameterSet, timing: str) -> ReducedParameters:
    quiet = params.dissipationless()
    if timing == "reduced":
        return effective_parameters(quiet)
    if timing == "dressed":
        return dressed_parameters(quiet)
    raise UnsupportedConfigurationError(f"Unknown gate timing '{timing}' (expected 'reduced' or 'dressed')")


def gate_duration(params: ParameterSet, timing: str = DEFAULT_GATE_TIMING) -> float:
    """
    Smallest T with theta(T) = pi, from the dissipationless Omega_eff.

    Raises:
        NoGateError: Omega_eff vanishes (no drive or no cavity coupling)
    """
    red = _timing_parameters(params, timing)
    rate = abs(red.omega_eff.real)
    if rate < 1e-14:
        raise NoGateError("Effective 4-photon Rabi frequency is zero; no gate can be driven")
    target_area = TWO_PI / rate
    envelope = params.envelope
    if envelope.is_constant:
        return target_area
    upper = envelope.ramp_time + target_area
    duration = brentq(
        lambda t: envelope.squared_area(t) - target_area,
        0.0, upper,
        rtol=GATE_AREA_RTOL * 1e-3,
        xtol=GATE_AREA_RTOL * 1e-3 * upper,
    )
    logger.debug("Ramped gate duration %.6g us for target area %.6g us", duration, target_area)
    return float(duration)


def phase_mismatch(params: ParameterSet, timing: str = DEFAULT_GATE_TIMING) -> float:
    """
    (Re delta - Re delta') * T: how far the light shifts fail to cancel over one gate.

    Equal shifts (no cavity coupling, or no drive) give 0 without timing a gate.
    """
    red = effective_parameters(params)
    if red.delta.real == red.delta_prime.real:
        return 0.0
    return float((red.delta.real - red.delta_prime.real) * gate_duration(params, timing))


def reduction_summary(params: ParameterSet, timing: str = DEFAULT_GATE_TIMING) -> Tuple[Dict, Dict]:
    """Flat key-value report of every reduced quantity; second item holds notices."""
    report: Dict = {}
    notices: Dict = {}
    report.update(effective_parameters(params).to_dict())
    report.update(approximate_parameters(params).to_dict())
    report.update(dressed_parameters(params).to_dict())
    try:
        report['phase_mismatch_rad'] = phase_mismatch(params, timing)
        report['gate_time_us'] = gate_duration(params, timing)
        report['gate_time_dressed_us'] = gate_duration(params, "dressed")
    except NoGateError as exc:
        notices['no_gate'] = str(exc)
    report.update(adiabaticity_ratios(params))
    return report, notices
