"""
Time integration of i dC/dt = M(t) C and trajectory observables
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import DOP853, RK45, trapezoid

from config.settings import (
    AMPLITUDE_FLOOR,
    ATOL_RATIO,
    DEFAULT_RTOL,
    DEFAULT_SAMPLE_INTERVAL_US,
    INTEGRATOR_METHOD,
    RTOL_BOUNDS,
    STEPPER_TOLERANCE_FACTOR,
)
from modules.errors import DimensionMismatchError, IntegrationError, InvalidParameterError
from modules.hamiltonian import (
    GATE_CHAIN_STATES,
    SPECTATOR_CHAIN_STATES,
    GeneratorMatrix,
    gate_chain_generator,
    spectator_chain_generator,
)
from modules.model import (
    STATES_PER_PHOTON,
    AtomLevel,
    BasisState,
    ParameterSet,
    StateVector,
    enumerate_basis,
    index_of,
)

logger = logging.getLogger(__name__)

GeneratorLike = Union[np.ndarray, GeneratorMatrix, object]

_STEPPERS = {"DOP853": DOP853, "RK45": RK45}


@dataclass(frozen=True)
class IntegratorStats:
    """
    Step bookkeeping of one integration.

    local_error_bound is the largest per-component tolerance
    abs_tol + stepper_rtol * |y| met by every accepted step.
    """

    method: str
    rel_tol: float
    abs_tol: float
    nfev: int
    status: int
    message: str
    n_steps: int = 0
    local_error_bound: float = 0.0


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Time-ordered amplitude samples.

    Full-basis trajectories carry n_max; subspace trajectories carry the
    ordered basis states of their columns instead. The state at t_final is
    kept separately because t_final need not lie on the sampling grid.
    """

    times: np.ndarray
    amplitudes: np.ndarray
    final_time: float
    final_amplitudes: np.ndarray
    stats: IntegratorStats
    n_max: Optional[int] = None
    basis_states: Optional[Tuple[BasisState, ...]] = None

    @property
    def samples(self) -> List[Tuple[float, StateVector]]:
        return [(float(t), StateVector(row, float(t))) for t, row in zip(self.times, self.amplitudes)]

    @property
    def final_state(self) -> StateVector:
        return StateVector(self.final_amplitudes, self.final_time)

    def column(self, state: BasisState) -> int:
        if self.basis_states is not None:
            try:
                return self.basis_states.index(state)
            except ValueError:
                raise InvalidParameterError(f"{state} is not part of this subspace trajectory")
        if self.n_max is None:
            raise InvalidParameterError("Trajectory has no basis labelling")
        return index_of(state, self.n_max)

    def amplitude_series(self, state: BasisState) -> np.ndarray:
        return self.amplitudes[:, self.column(state)]

    def norm_squared(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)


@dataclass(frozen=True, eq=False)
class PhaseSeries:
    """Unwrapped phase; samples where an amplitude vanishes are NaN and not defined."""

    times: np.ndarray
    unwrapped_phase: np.ndarray
    defined: np.ndarray

    def wrapped(self) -> np.ndarray:
        """Phase folded into (-pi, pi]."""
        return wrap_phase(self.unwrapped_phase)

    @property
    def final_value(self) -> float:
        """Last defined unwrapped value."""
        idx = np.flatnonzero(self.defined)
        if idx.size == 0:
            return float("nan")
        return float(self.unwrapped_phase[idx[-1]])

    def segments(self) -> List[Tuple[int, int]]:
        """Half-open index ranges of consecutive defined samples."""
        result = []
        start = None
        for k, ok in enumerate(self.defined):
            if ok and start is None:
                start = k
            elif not ok and start is not None:
                result.append((start, k))
                start = None
        if start is not None:
            result.append((start, len(self.defined)))
        return result


def wrap_phase(phase):
    """Fold phase(s) into (-pi, pi]."""
    wrapped = np.pi - np.mod(np.pi - np.asarray(phase, dtype=float), 2 * np.pi)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def sample_grid(t_final: float, sample_interval: float) -> np.ndarray:
    """Times k * sample_interval, k = 0 .. floor(t_final / sample_interval)."""
    count = int(math.floor(t_final / sample_interval + 1e-9)) + 1
    return np.minimum(np.arange(count) * sample_interval, t_final)


def _as_source(generator: GeneratorLike):
    """Return (callable, constant matrix or None, dimension)."""
    if isinstance(generator, GeneratorMatrix):
        generator = generator.entries
    if isinstance(generator, np.ndarray):
        matrix = np.asarray(generator, dtype=complex)
        return (lambda t: matrix), matrix, matrix.shape[0]
    if not callable(generator):
        raise InvalidParameterError("generator must be a matrix or a callable t -> matrix")
    if getattr(generator, "is_constant", False):
        matrix = np.asarray(generator(0.0), dtype=complex)
        return generator, matrix, matrix.shape[0]
    dimension = getattr(generator, "dimension", None)
    if dimension is None:
        dimension = np.asarray(generator(0.0)).shape[0]
    return generator, None, dimension


def evolve(
    generator: GeneratorLike,
    initial: Union[StateVector, np.ndarray],
    t_final: float,
    rel_tol: float = DEFAULT_RTOL,
    sample_interval: float = DEFAULT_SAMPLE_INTERVAL_US,
    basis_states: Optional[Sequence[BasisState]] = None
) -> Trajectory:
    """
    Integrate i dC/dt = M(t) C from t = 0 to t_final.

    Args:
        generator: Constant matrix, GeneratorMatrix, or callable t -> matrix
            (evaluated at every integrator stage time)
        initial: Initial amplitudes (norm <= 1)
        t_final: Final time in us
        rel_tol: Relative tolerance of the embedded Runge-Kutta step control
        sample_interval: Spacing of recorded samples in us
        basis_states: Column labels for subspace integrations

    Returns:
        Trajectory sampled on the grid k * sample_interval

    Raises:
        InvalidParameterError: bad times, tolerance or initial norm
        DimensionMismatchError: generator and state sizes differ
        IntegrationError: the integrator failed (carries the time reached)
    """
    if not (t_final > 0 and math.isfinite(t_final)):
        raise InvalidParameterError(f"t_final must be > 0, got {t_final}")
    low, high = RTOL_BOUNDS
    if not (low < rel_tol < high):
        raise InvalidParameterError(f"rel_tol must lie in ({low:g}, {high:g}), got {rel_tol:g}")
    if not sample_interval > 0:
        raise InvalidParameterError(f"sample_interval must be > 0, got {sample_interval}")

    y0 = np.array(initial.amplitudes if isinstance(initial, StateVector) else initial, dtype=complex).reshape(-1)
    if float(np.vdot(y0, y0).real) > 1.0 + 1e-12:
        raise InvalidParameterError("Initial state norm must not exceed 1")

    source, constant, dimension = _as_source(generator)
    if dimension != y0.shape[0]:
        raise DimensionMismatchError(f"Generator dimension {dimension} does not match state length {y0.shape[0]}")

    if constant is not None:
        propagator = -1j * constant

        def rhs(t, y):
            return propagator @ y
        max_step = np.inf
    else:
        def rhs(t, y):
            return -1j * (source(t) @ y)
        max_step = sample_interval

    times = sample_grid(t_final, sample_interval)
    t_eval = times if times[-1] >= t_final else np.append(times, t_final)
    # scipy floors rtol at 100 eps
    stepper_rtol = max(rel_tol * STEPPER_TOLERANCE_FACTOR, 100 * np.finfo(float).eps)
    abs_tol = rel_tol * ATOL_RATIO

    stepper = _STEPPERS[INTEGRATOR_METHOD](
        rhs, 0.0, y0, t_final,
        rtol=stepper_rtol,
        atol=abs_tol,
        max_step=max_step,
    )
    amplitudes = np.empty((t_eval.size, dimension), dtype=complex)
    amplitudes[0] = y0
    filled = 1
    n_steps = 0
    peak = float(np.max(np.abs(y0)))
    while stepper.status == 'running':
        message = stepper.step()
        if stepper.status == 'failed':
            raise IntegrationError(f"Integration failed: {message}", float(stepper.t))
        n_steps += 1
        peak = max(peak, float(np.max(np.abs(stepper.y))))
        reached = int(np.searchsorted(t_eval, stepper.t, side='right'))
        if reached > filled:
            amplitudes[filled:reached] = stepper.dense_output()(t_eval[filled:reached]).T
            filled = reached
    amplitudes[-1] = stepper.y

    stats = IntegratorStats(
        method=INTEGRATOR_METHOD,
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        nfev=int(stepper.nfev),
        status=0,
        message="The solver successfully reached the end of the integration interval.",
        n_steps=n_steps,
        local_error_bound=abs_tol + stepper_rtol * peak,
    )
    logger.debug("Integrated %d-dim system to %.4g us in %d steps", dimension, t_final, n_steps)

    n_max = None
    if basis_states is None and y0.size % STATES_PER_PHOTON == 0 and y0.size >= 2 * STATES_PER_PHOTON:
        n_max = y0.size // STATES_PER_PHOTON - 1
    return Trajectory(
        times=times,
        amplitudes=amplitudes[:times.size],
        final_time=float(t_final),
        final_amplitudes=amplitudes[-1].copy(),
        stats=stats,
        n_max=n_max,
        basis_states=tuple(basis_states) if basis_states is not None else None,
    )


# ============================================================================
# OBSERVABLES
# ============================================================================

def population(traj: Trajectory, state: BasisState) -> np.ndarray:
    """|c_state(t)|^2 at every sample."""
    return np.abs(traj.amplitude_series(state)) ** 2


def subset_population(traj: Trajectory, states: Iterable[BasisState]) -> np.ndarray:
    """Total population of a set of basis states at every sample."""
    columns = [traj.column(s) for s in states]
    return np.sum(np.abs(traj.amplitudes[:, columns]) ** 2, axis=1)


def absolute_phase(traj: Trajectory, state: BasisState) -> np.ndarray:
    """Wrapped phase arg c_state(t), the saw-tooth curve."""
    return np.angle(traj.amplitude_series(state))


def relative_phase(traj: Trajectory, numerator: BasisState, denominator: BasisState) -> PhaseSeries:
    """
    Unwrapped arg c_num(t) - arg c_den(t).

    Samples where either amplitude is below AMPLITUDE_FLOOR are flagged
    undefined (NaN). Each run of defined samples is unwrapped on its own,
    starting from its wrapped value in (-pi, pi].
    """
    num = traj.amplitude_series(numerator)
    den = traj.amplitude_series(denominator)
    defined = (np.abs(num) > AMPLITUDE_FLOOR) & (np.abs(den) > AMPLITUDE_FLOOR)
    phase = np.full(traj.times.shape, np.nan)
    series = PhaseSeries(times=traj.times, unwrapped_phase=phase, defined=defined)
    for start, stop in series.segments():
        raw = wrap_phase(np.angle(num[start:stop]) - np.angle(den[start:stop]))
        phase[start:stop] = np.unwrap(np.atleast_1d(raw))
    return series


def energy_expectation(traj: Trajectory, matrix: np.ndarray) -> np.ndarray:
    """<psi|M|psi> / <psi|psi> at every sample."""
    psi = traj.amplitudes
    numerator = np.einsum("ti,ij,tj->t", psi.conj(), matrix, psi)
    return numerator / np.sum(np.abs(psi) ** 2, axis=1)


def loss_channels(traj: Trajectory, params: ParameterSet) -> Dict[str, float]:
    """
    Split the norm loss into atomic decay and cavity leakage.

    d|psi|^2/dt = -sum_k (Gamma * n_e(k) + 2 kappa * n(k)) |c_k|^2, integrated
    over the sampled trajectory with the trapezoid rule.
    """
    basis = enumerate_basis(traj.n_max) if traj.n_max is not None else list(traj.basis_states or ())
    excited = np.array([(s.atom_a == AtomLevel.E) + (s.atom_b == AtomLevel.E) for s in basis], dtype=float)
    photons = np.array([s.photons for s in basis], dtype=float)
    weights = np.abs(traj.amplitudes) ** 2
    atomic_rate = params.gamma_rad * (weights @ excited)
    cavity_rate = 2.0 * params.kappa_rad * (weights @ photons)
    return {
        'atomic_loss': float(trapezoid(atomic_rate, traj.times)),
        'cavity_loss': float(trapezoid(cavity_rate, traj.times)),
    }


# ============================================================================
# SUBSPACE ORACLES
# ============================================================================

def evolve_gate_chain(
    params: ParameterSet,
    initial: Sequence[complex],
    t_final: float,
    rel_tol: float = DEFAULT_RTOL,
    sample_interval: float = DEFAULT_SAMPLE_INTERVAL_US
) -> Trajectory:
    """Five-state 4-photon chain |1,a,0>, |a,1,0>, |e,a,0>, |a,e,0>, |a,a,1>."""
    vector = np.asarray(initial, dtype=complex)
    if vector.shape != (len(GATE_CHAIN_STATES),):
        raise DimensionMismatchError(f"Gate chain needs {len(GATE_CHAIN_STATES)} amplitudes, got {vector.shape}")
    return evolve(gate_chain_generator(params), vector, t_final, rel_tol, sample_interval,
                  basis_states=GATE_CHAIN_STATES)


def evolve_spectator_chain(
    params: ParameterSet,
    initial: Sequence[complex],
    t_final: float,
    rel_tol: float = DEFAULT_RTOL,
    sample_interval: float = DEFAULT_SAMPLE_INTERVAL_US
) -> Trajectory:
    """Three-state single-atom chain |0,1,0>, |0,e,0>, |0,a,1>."""
    vector = np.asarray(initial, dtype=complex)
    if vector.shape != (len(SPECTATOR_CHAIN_STATES),):
        raise DimensionMismatchError(
            f"Spectator chain needs {len(SPECTATOR_CHAIN_STATES)} amplitudes, got {vector.shape}"
        )
    return evolve(spectator_chain_generator(params), vector, t_final, rel_tol, sample_interval,
                  basis_states=SPECTATOR_CHAIN_STATES)
