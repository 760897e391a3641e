"""
Generator matrices: interaction-picture effective Hamiltonian, lab-frame
Hamiltonian and the frame rotation that connects them.

All matrix elements are angular frequencies (rad/us) with hbar = 1, so the
equation of motion is i dC/dt = M(t) C.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from modules.errors import UnsupportedConfigurationError
from modules.model import (
    AtomLevel,
    BasisState,
    ParameterSet,
    PulseEnvelope,
    StateVector,
    angular,
    enumerate_basis,
    excitation_charge,
    index_of,
)

# Chain of the 4-photon 2-atom process
GATE_CHAIN_STATES: Tuple[BasisState, ...] = (
    BasisState(AtomLevel.ONE, AtomLevel.A, 0),
    BasisState(AtomLevel.A, AtomLevel.ONE, 0),
    BasisState(AtomLevel.E, AtomLevel.A, 0),
    BasisState(AtomLevel.A, AtomLevel.E, 0),
    BasisState(AtomLevel.A, AtomLevel.A, 1),
)

GeneratorSource = Callable[[float], np.ndarray]

# Single-atom off-resonant chain on atom B
SPECTATOR_CHAIN_STATES: Tuple[BasisState, ...] = (
    BasisState(AtomLevel.ZERO, AtomLevel.ONE, 0),
    BasisState(AtomLevel.ZERO, AtomLevel.E, 0),
    BasisState(AtomLevel.ZERO, AtomLevel.A, 1),
)


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Dense generator over the truncated basis (or a subspace of it)."""

    entries: np.ndarray
    hermitian_flag: bool

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    def element(self, bra: BasisState, ket: BasisState, n_max: int) -> complex:
        """<bra|M|ket>."""
        return complex(self.entries[index_of(bra, n_max), index_of(ket, n_max)])

    def restrict(self, states: Sequence[BasisState], n_max: int) -> np.ndarray:
        """Sub-matrix on the listed states, in the listed order."""
        idx = [index_of(s, n_max) for s in states]
        return self.entries[np.ix_(idx, idx)]

    def is_hermitian(self, atol: float = 0.0) -> bool:
        return bool(np.allclose(self.entries, self.entries.conj().T, rtol=0.0, atol=atol))


class EnvelopeGenerator:
    """
    Time-dependent generator source M(t) = static + f(t) * drive.

    Instances are callables t -> ndarray as expected by dynamics.evolve; the
    split keeps each evaluation to one scaled matrix addition.
    """

    def __init__(
        self,
        static: np.ndarray,
        drive: np.ndarray,
        envelope: PulseEnvelope,
        hermitian: bool
    ):
        self.static = static
        self.drive = drive
        self.envelope = envelope
        self.hermitian = hermitian
        self._constant = static + drive if envelope.is_constant else None

    @property
    def is_constant(self) -> bool:
        return self._constant is not None

    @property
    def dimension(self) -> int:
        return self.static.shape[0]

    def __call__(self, t: float) -> np.ndarray:
        if self._constant is not None:
            return self._constant
        return self.static + self.envelope.value(t) * self.drive

    def matrix(self, t: float) -> GeneratorMatrix:
        return GeneratorMatrix(np.array(self(t)), self.hermitian)


# ============================================================================
# EFFECTIVE (INTERACTION-PICTURE) HAMILTONIAN
# ============================================================================

def _with_level(state: BasisState, atom: int, level: AtomLevel, photons: int) -> BasisState:
    if atom == 0:
        return BasisState(level, state.atom_b, photons)
    return BasisState(state.atom_a, level, photons)


def _coupling_parts(params: ParameterSet) -> Tuple[np.ndarray, np.ndarray]:
    """Split the effective generator into its envelope-free part and the unit-envelope drive."""
    dim = params.dimension
    static = np.zeros((dim, dim), dtype=complex)
    drive = np.zeros((dim, dim), dtype=complex)
    half_omega = 0.5 * params.omega_rad
    couplings = (params.g_A_rad, params.g_B_rad)

    for k, state in enumerate(enumerate_basis(params.n_max)):
        levels = (state.atom_a, state.atom_b)
        excited = sum(1 for level in levels if level == AtomLevel.E)
        static[k, k] = -excited * params.complex_delta_L - state.photons * params.complex_delta_C

        for atom, level in enumerate(levels):
            if level == AtomLevel.ONE:
                # |e><1| drive at fixed photon number
                j = index_of(_with_level(state, atom, AtomLevel.E, state.photons))
                drive[j, k] += half_omega
                drive[k, j] += half_omega
            elif level == AtomLevel.A and state.photons >= 1:
                # c|e><a|: |a, n> -> sqrt(n) |e, n-1>
                j = index_of(_with_level(state, atom, AtomLevel.E, state.photons - 1))
                element = couplings[atom] * math.sqrt(state.photons)
                static[j, k] += element
                static[k, j] += element
    return static, drive


def effective_generator(params: ParameterSet) -> EnvelopeGenerator:
    """Callable effective generator for the full truncated basis."""
    static, drive = _coupling_parts(params)
    return EnvelopeGenerator(static, drive, params.envelope, hermitian=not params.is_dissipative)


def build_effective_hamiltonian(params: ParameterSet, t: float = 0.0) -> GeneratorMatrix:
    """
    Interaction-picture effective Hamiltonian at time t.

    Args:
        params: Physical parameters (dissipation enters through the complex detunings)
        t: Time in us, used only through the pulse envelope

    Returns:
        GeneratorMatrix, Hermitian iff gamma = kappa = 0
    """
    return effective_generator(params).matrix(t)


def charge_blocks(n_max: int) -> Dict[int, List[int]]:
    """Basis indices grouped by excitation charge."""
    blocks: Dict[int, List[int]] = {}
    for k, state in enumerate(enumerate_basis(n_max)):
        blocks.setdefault(excitation_charge(state), []).append(k)
    return blocks


# ============================================================================
# SUBSPACE COEFFICIENT MATRICES
# ============================================================================

def _gate_chain_parts(params: ParameterSet) -> Tuple[np.ndarray, np.ndarray]:
    half_omega = 0.5 * params.omega_rad
    dL = params.complex_delta_L
    dC = params.complex_delta_C
    gA, gB = params.g_A_rad, params.g_B_rad
    static = np.array([
        [0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0],
        [0, 0, -dL, 0, gA],
        [0, 0, 0, -dL, gB],
        [0, 0, gA, gB, -dC],
    ], dtype=complex)
    drive = np.zeros((5, 5), dtype=complex)
    drive[0, 2] = drive[2, 0] = half_omega
    drive[1, 3] = drive[3, 1] = half_omega
    return static, drive


def _spectator_chain_parts(params: ParameterSet) -> Tuple[np.ndarray, np.ndarray]:
    half_omega = 0.5 * params.omega_rad
    gB = params.g_B_rad
    static = np.array([
        [0, 0, 0],
        [0, -params.complex_delta_L, gB],
        [0, gB, -params.complex_delta_C],
    ], dtype=complex)
    drive = np.zeros((3, 3), dtype=complex)
    drive[0, 1] = drive[1, 0] = half_omega
    return static, drive


def gate_chain_generator(params: ParameterSet) -> EnvelopeGenerator:
    """Five-amplitude system on GATE_CHAIN_STATES, written directly from its equations."""
    static, drive = _gate_chain_parts(params)
    return EnvelopeGenerator(static, drive, params.envelope, hermitian=not params.is_dissipative)


def spectator_chain_generator(params: ParameterSet) -> EnvelopeGenerator:
    """Three-amplitude system on SPECTATOR_CHAIN_STATES."""
    static, drive = _spectator_chain_parts(params)
    return EnvelopeGenerator(static, drive, params.envelope, hermitian=not params.is_dissipative)


# ============================================================================
# LAB FRAME
# ============================================================================

@dataclass(frozen=True)
class LabFrameFrequencies:
    """
    Absolute level and field frequencies in MHz for lab-frame checks.

    Only toy magnitudes are meaningful; optical frequencies would make the
    lab-frame integration impractical.
    """

    omega_1: float
    omega_e: float
    omega_a: float
    omega_L: float
    omega_C: float

    @classmethod
    def from_parameters(
        cls,
        params: ParameterSet,
        omega_1: float = 5.0,
        omega_a: float = 12.0,
        omega_L: float = 60.0
    ) -> "LabFrameFrequencies":
        """
        Frequencies consistent with the detunings of params.

        Delta_L = omega_L - (omega_e - omega_1) and
        delta_C = (omega_L - omega_C) - (omega_a - omega_1) hold by construction.
        """
        omega_e = omega_L - params.delta_L + omega_1
        omega_C = omega_L - params.delta_C - (omega_a - omega_1)
        return cls(omega_1=omega_1, omega_e=omega_e, omega_a=omega_a, omega_L=omega_L, omega_C=omega_C)

    @property
    def laser_detuning(self) -> float:
        return self.omega_L - (self.omega_e - self.omega_1)

    @property
    def cavity_detuning(self) -> float:
        return (self.omega_L - self.omega_C) - (self.omega_a - self.omega_1)

    def level_frequency(self, level: AtomLevel) -> float:
        """Angular frequency of an atomic level; |0> is the zero of energy."""
        return {
            AtomLevel.ZERO: 0.0,
            AtomLevel.ONE: angular(self.omega_1),
            AtomLevel.E: angular(self.omega_e),
            AtomLevel.A: angular(self.omega_a),
        }[level]


class LabGenerator:
    """Callable lab-frame Hamiltonian; explicitly time dependent through e^{-i omega_L t}."""

    is_constant = False
    hermitian = True

    def __init__(self, params: ParameterSet, freqs: LabFrameFrequencies):
        if params.is_dissipative:
            raise UnsupportedConfigurationError(
                "Lab-frame Hamiltonian is only defined without dissipation (gamma = kappa = 0)"
            )
        self.params = params
        self.freqs = freqs
        dim = params.dimension
        self.static = np.zeros((dim, dim), dtype=complex)
        # Upper-triangle part of the drive: <e|M|1> entries only
        self.raise_part = np.zeros((dim, dim), dtype=complex)
        cavity = angular(freqs.omega_C)
        couplings = (params.g_A_rad, params.g_B_rad)
        half_omega = 0.5 * params.omega_rad

        for k, state in enumerate(enumerate_basis(params.n_max)):
            levels = (state.atom_a, state.atom_b)
            self.static[k, k] = sum(freqs.level_frequency(level) for level in levels) + cavity * state.photons
            for atom, level in enumerate(levels):
                if level == AtomLevel.ONE:
                    j = index_of(_with_level(state, atom, AtomLevel.E, state.photons))
                    self.raise_part[j, k] += half_omega
                elif level == AtomLevel.A and state.photons >= 1:
                    j = index_of(_with_level(state, atom, AtomLevel.E, state.photons - 1))
                    element = couplings[atom] * math.sqrt(state.photons)
                    self.static[j, k] += element
                    self.static[k, j] += element

    @property
    def dimension(self) -> int:
        return self.static.shape[0]

    def __call__(self, t: float) -> np.ndarray:
        phase = np.exp(-1j * angular(self.freqs.omega_L) * t) * self.params.envelope.value(t)
        upper = phase * self.raise_part
        return self.static + upper + upper.conj().T

    def matrix(self, t: float) -> GeneratorMatrix:
        return GeneratorMatrix(self(t), True)


def build_lab_hamiltonian(params: ParameterSet, freqs: LabFrameFrequencies, t: float = 0.0) -> GeneratorMatrix:
    """
    Lab-frame Hamiltonian at time t.

    Raises:
        UnsupportedConfigurationError: if gamma or kappa is non-zero
    """
    return LabGenerator(params, freqs).matrix(t)


# ============================================================================
# FRAME ROTATION
# ============================================================================

class FrameDirection(str, Enum):
    TO_INTERACTION = "to_interaction"
    TO_LAB = "to_lab"


def frame_phases(freqs: LabFrameFrequencies, n_max: int) -> np.ndarray:
    """Diagonal generator of U(t) = exp(-i * phases * t) in rad/us."""
    omega_1 = angular(freqs.omega_1)
    omega_L = angular(freqs.omega_L)
    omega_a = angular(freqs.omega_a)
    per_level = {
        AtomLevel.ZERO: 0.0,
        AtomLevel.ONE: omega_1,
        AtomLevel.E: omega_1 + omega_L,
        AtomLevel.A: omega_a,
    }
    photon = omega_L - (omega_a - omega_1)
    return np.array([
        per_level[s.atom_a] + per_level[s.atom_b] + photon * s.photons
        for s in enumerate_basis(n_max)
    ])


def frame_rotate(
    state: StateVector,
    freqs: LabFrameFrequencies,
    t: float,
    direction: FrameDirection
) -> StateVector:
    """
    Apply U(t) (to_lab) or U(t)^dagger (to_interaction).

    psi_lab(t) = U(t) psi_interaction(t).
    """
    n_max = state.n_max
    sign = -1.0 if FrameDirection(direction) == FrameDirection.TO_LAB else 1.0
    phases = np.exp(sign * 1j * frame_phases(freqs, n_max) * t)
    return StateVector(state.amplitudes * phases, t)
