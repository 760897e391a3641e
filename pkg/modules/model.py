"""
Physical parameter set, truncated product basis and state-vector container
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from typing import Dict, List, Optional, Sequence

import numpy as np

from config.settings import DEFAULT_N_MAX
from modules.errors import DimensionMismatchError, InvalidParameterError

TWO_PI = 2.0 * math.pi

LEVELS_PER_ATOM = 4
STATES_PER_PHOTON = LEVELS_PER_ATOM * LEVELS_PER_ATOM


def angular(mhz: float) -> float:
    """Ordinary frequency in MHz to angular frequency in rad/us."""
    return TWO_PI * mhz


# ============================================================================
# BASIS
# ============================================================================

class AtomLevel(IntEnum):
    """The four atomic levels |0>, |1>, |e>, |a>; the value is the level index."""

    ZERO = 0
    ONE = 1
    E = 2
    A = 3

    @property
    def symbol(self) -> str:
        return _LEVEL_SYMBOLS[self]

    @classmethod
    def from_symbol(cls, symbol: str) -> "AtomLevel":
        try:
            return _SYMBOL_LEVELS[symbol.strip().lower()]
        except KeyError:
            raise InvalidParameterError(f"Unknown atomic level '{symbol}' (expected one of 0, 1, e, a)")


_LEVEL_SYMBOLS = {
    AtomLevel.ZERO: "0",
    AtomLevel.ONE: "1",
    AtomLevel.E: "e",
    AtomLevel.A: "a",
}
_SYMBOL_LEVELS = {symbol: level for level, symbol in _LEVEL_SYMBOLS.items()}


@dataclass(frozen=True, order=True)
class BasisState:
    """Product state |i, j, n> of atom A level, atom B level and photon number."""

    atom_a: AtomLevel
    atom_b: AtomLevel
    photons: int

    def __post_init__(self):
        object.__setattr__(self, 'atom_a', AtomLevel(self.atom_a))
        object.__setattr__(self, 'atom_b', AtomLevel(self.atom_b))
        if int(self.photons) != self.photons or self.photons < 0:
            raise InvalidParameterError(f"Photon number must be a non-negative integer, got {self.photons}")
        object.__setattr__(self, 'photons', int(self.photons))

    @property
    def label(self) -> str:
        """Compact label such as 'a10'."""
        return f"{self.atom_a.symbol}{self.atom_b.symbol}{self.photons}"

    def __str__(self) -> str:
        return f"|{self.atom_a.symbol},{self.atom_b.symbol},{self.photons}>"


def basis_dimension(n_max: int) -> int:
    """Number of product states for a photon truncation n_max."""
    _check_n_max(n_max)
    return STATES_PER_PHOTON * (n_max + 1)


def index_of(state: BasisState, n_max: Optional[int] = None) -> int:
    """
    Ordinal of a basis state: photons*16 + level(A)*4 + level(B).

    Args:
        state: Basis state
        n_max: When given, the state must lie inside this truncation

    Returns:
        Index into the state-vector amplitude array
    """
    if n_max is not None and state.photons > n_max:
        raise InvalidParameterError(f"{state} lies outside the truncation n_max={n_max}")
    return state.photons * STATES_PER_PHOTON + int(state.atom_a) * LEVELS_PER_ATOM + int(state.atom_b)


def state_of(index: int) -> BasisState:
    """Inverse of index_of."""
    if index < 0:
        raise InvalidParameterError(f"Basis index must be non-negative, got {index}")
    photons, rest = divmod(index, STATES_PER_PHOTON)
    level_a, level_b = divmod(rest, LEVELS_PER_ATOM)
    return BasisState(AtomLevel(level_a), AtomLevel(level_b), photons)


def enumerate_basis(n_max: int) -> List[BasisState]:
    """All 16*(n_max+1) basis states in index order."""
    return [state_of(k) for k in range(basis_dimension(n_max))]


def excitation_charge(state: BasisState) -> int:
    """Conserved charge Q = photons - (number of atoms in |a>)."""
    atoms_in_a = (state.atom_a == AtomLevel.A) + (state.atom_b == AtomLevel.A)
    return state.photons - int(atoms_in_a)


def parse_basis_label(label: str) -> BasisState:
    """
    Parse '|a,1,0>', 'a,1,0' or 'a10' into a BasisState.

    The compact form only supports single-digit photon numbers.
    """
    text = label.strip().strip("|").strip(">").strip()
    parts = [p.strip() for p in text.split(",")] if "," in text else []
    if not parts:
        if len(text) != 3:
            raise InvalidParameterError(f"Cannot parse basis label '{label}'")
        parts = [text[0], text[1], text[2]]
    if len(parts) != 3 or not parts[2].isdigit():
        raise InvalidParameterError(f"Cannot parse basis label '{label}'")
    return BasisState(AtomLevel.from_symbol(parts[0]), AtomLevel.from_symbol(parts[1]), int(parts[2]))


def _check_n_max(n_max: int) -> None:
    if isinstance(n_max, bool) or int(n_max) != n_max or n_max < 1:
        raise InvalidParameterError(f"n_max must be an integer >= 1, got {n_max}")


# ============================================================================
# PULSE ENVELOPE
# ============================================================================

class EnvelopeShape(str, Enum):
    CONSTANT = "constant"
    SIN_SQUARED_RAMP = "sin2"


@dataclass(frozen=True)
class PulseEnvelope:
    """
    Time dependence f(t) of the common laser drive, Omega(t) = Omega * f(t).

    SIN_SQUARED_RAMP rises as sin^2(pi t / 2 tau) over ramp_time tau and then
    stays on the flat top f = 1.
    """

    shape: EnvelopeShape = EnvelopeShape.CONSTANT
    ramp_time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'shape', EnvelopeShape(self.shape))
        if not math.isfinite(self.ramp_time) or self.ramp_time < 0:
            raise InvalidParameterError(f"ramp_time must be >= 0, got {self.ramp_time}")

    @property
    def is_constant(self) -> bool:
        return self.shape == EnvelopeShape.CONSTANT or self.ramp_time == 0.0

    def value(self, t: float) -> float:
        if self.is_constant or t >= self.ramp_time:
            return 1.0
        if t <= 0.0:
            return 0.0
        return math.sin(0.5 * math.pi * t / self.ramp_time) ** 2

    def squared_area(self, t: float) -> float:
        """Closed form of the integral of f(t')^2 from 0 to t."""
        if t <= 0.0:
            return 0.0
        if self.is_constant:
            return t
        tau = self.ramp_time
        if t >= tau:
            return 0.375 * tau + (t - tau)
        x = 0.5 * math.pi * t / tau
        return (2.0 * tau / math.pi) * (0.375 * x - math.sin(2 * x) / 4 + math.sin(4 * x) / 32)

    def to_dict(self) -> Dict:
        return {'shape': self.shape.value, 'ramp_time_us': self.ramp_time}


# ============================================================================
# PARAMETER SET
# ============================================================================

@dataclass(frozen=True)
class ParameterSet:
    """
    Physical rates and detunings in MHz (ordinary frequency).

    Angular values in rad/us are derived once, here, and used by every
    numerical module; nothing else multiplies by 2*pi.
    """

    omega: float
    delta_L: float
    delta_C: float
    g_A: float
    g_B: float
    gamma: float = 0.0
    kappa: float = 0.0
    n_max: int = DEFAULT_N_MAX
    envelope: PulseEnvelope = field(default_factory=PulseEnvelope)

    omega_rad: float = field(init=False, repr=False, compare=False)
    delta_L_rad: float = field(init=False, repr=False, compare=False)
    delta_C_rad: float = field(init=False, repr=False, compare=False)
    g_A_rad: float = field(init=False, repr=False, compare=False)
    g_B_rad: float = field(init=False, repr=False, compare=False)
    gamma_rad: float = field(init=False, repr=False, compare=False)
    kappa_rad: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ('omega', 'delta_L', 'delta_C', 'g_A', 'g_B', 'gamma', 'kappa'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))
        for name in ('omega', 'g_A', 'g_B', 'gamma', 'kappa'):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be >= 0, got {getattr(self, name)}")
        _check_n_max(self.n_max)
        object.__setattr__(self, 'n_max', int(self.n_max))
        if not isinstance(self.envelope, PulseEnvelope):
            raise InvalidParameterError("envelope must be a PulseEnvelope")

        for name in ('omega', 'delta_L', 'delta_C', 'g_A', 'g_B', 'gamma', 'kappa'):
            object.__setattr__(self, f"{name}_rad", angular(getattr(self, name)))

    @classmethod
    def symmetric(
        cls,
        omega: float,
        delta_L: float,
        delta_C: float,
        g: float,
        gamma: float = 0.0,
        kappa: float = 0.0,
        n_max: int = DEFAULT_N_MAX,
        envelope: Optional[PulseEnvelope] = None
    ) -> "ParameterSet":
        """Common drive and equal couplings g_A = g_B = g."""
        return cls(
            omega=omega, delta_L=delta_L, delta_C=delta_C, g_A=g, g_B=g,
            gamma=gamma, kappa=kappa, n_max=n_max,
            envelope=envelope if envelope is not None else PulseEnvelope()
        )

    @property
    def complex_delta_L(self) -> complex:
        """Delta_L + i Gamma/2 in rad/us."""
        return complex(self.delta_L_rad, 0.5 * self.gamma_rad)

    @property
    def complex_delta_C(self) -> complex:
        """delta_C + i kappa in rad/us."""
        return complex(self.delta_C_rad, self.kappa_rad)

    @property
    def is_dissipative(self) -> bool:
        return self.gamma > 0.0 or self.kappa > 0.0

    @property
    def couplings_equal(self) -> bool:
        return self.g_A == self.g_B

    @property
    def dimension(self) -> int:
        return basis_dimension(self.n_max)

    def with_changes(self, **changes) -> "ParameterSet":
        return replace(self, **changes)

    def dissipationless(self) -> "ParameterSet":
        return replace(self, gamma=0.0, kappa=0.0)

    def to_dict(self) -> Dict:
        return {
            'omega_MHz': self.omega,
            'delta_L_MHz': self.delta_L,
            'delta_C_MHz': self.delta_C,
            'g_A_MHz': self.g_A,
            'g_B_MHz': self.g_B,
            'gamma_MHz': self.gamma,
            'kappa_MHz': self.kappa,
            'n_max': self.n_max,
            'envelope': self.envelope.shape.value,
            'ramp_time_us': self.envelope.ramp_time,
        }


# ============================================================================
# STATE VECTOR
# ============================================================================

@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes over the enumerated basis, tagged with a time in us."""

    amplitudes: np.ndarray
    time_tag: float = 0.0

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        amplitudes.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amplitudes)

    @classmethod
    def basis(cls, state: BasisState, n_max: int, time_tag: float = 0.0) -> "StateVector":
        amplitudes = np.zeros(basis_dimension(n_max), dtype=complex)
        amplitudes[index_of(state, n_max)] = 1.0
        return cls(amplitudes, time_tag)

    @classmethod
    def superposition(
        cls,
        states: Sequence[BasisState],
        n_max: int,
        weights: Optional[Sequence[complex]] = None
    ) -> "StateVector":
        """Normalised superposition; equal weights when none are given."""
        if not states:
            raise InvalidParameterError("A superposition needs at least one basis state")
        weights = list(weights) if weights is not None else [1.0] * len(states)
        if len(weights) != len(states):
            raise InvalidParameterError("One weight per basis state is required")
        amplitudes = np.zeros(basis_dimension(n_max), dtype=complex)
        for state, weight in zip(states, weights):
            amplitudes[index_of(state, n_max)] += weight
        norm = np.linalg.norm(amplitudes)
        if norm == 0:
            raise InvalidParameterError("Superposition weights cancel to the zero vector")
        return cls(amplitudes / norm)

    @classmethod
    def from_label(cls, expression: str, n_max: int) -> "StateVector":
        """Equal-weight superposition from an expression such as 'a10+010'."""
        states = [parse_basis_label(term) for term in expression.split("+") if term.strip()]
        return cls.superposition(states, n_max)

    @property
    def dimension(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n_max(self) -> int:
        photons, rest = divmod(self.dimension, STATES_PER_PHOTON)
        if rest or photons < 2:
            raise DimensionMismatchError(f"Vector of length {self.dimension} is not a full product basis")
        return photons - 1

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def amplitude(self, state: BasisState) -> complex:
        return complex(self.amplitudes[index_of(state, self.n_max)])

    def population(self, state: BasisState) -> float:
        return abs(self.amplitude(state)) ** 2

    def with_amplitudes(self, amplitudes: np.ndarray) -> "StateVector":
        return StateVector(amplitudes, self.time_tag)
