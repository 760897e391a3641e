"""
Conditional phase gate protocol: Raman preparation, common-drive evolution,
single-qubit phase compensation and sweeps over parameter grids
"""
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from config.settings import (
    AMPLITUDE_FLOOR,
    DEFAULT_GATE_TIMING,
    DEFAULT_RTOL,
    DEFAULT_SAMPLE_INTERVAL_US,
    SWEEP_BATCH_SIZE,
    SWEEP_GRID_CAP,
    SWEEP_WORKERS,
)
from modules.dynamics import IntegratorStats, evolve, loss_channels, wrap_phase
from modules.errors import CavityGateError, InvalidParameterError
from modules.gate_assessor import GateAssessor
from modules.hamiltonian import effective_generator
from modules.model import (
    AtomLevel,
    BasisState,
    ParameterSet,
    StateVector,
    basis_dimension,
    enumerate_basis,
    index_of,
)
from modules.reduction import adiabaticity_ratios, gate_duration

logger = logging.getLogger(__name__)

LOGICAL_INPUTS = ("00", "01", "10", "11")

# Reference states of the conditional phase: both atoms active vs spectator only
ACTIVE_REFERENCE = BasisState(AtomLevel.A, AtomLevel.ONE, 0)
SPECTATOR_REFERENCE = BasisState(AtomLevel.ZERO, AtomLevel.ONE, 0)

CZ_DIAGONAL = np.array([1.0, 1.0, 1.0, -1.0], dtype=complex)

SUMMARY_COLUMNS = (
    'gate_time_us', 'mean_success', 'residual_phase_rad', 'phase_correction_A_rad',
    'phase_correction_B_rad', 'fidelity', 'atomic_loss', 'cavity_loss', 'leakage', 'verdict',
)


class RamanDirection(str, Enum):
    FORWARD = "forward"
    INVERSE = "inverse"


# ============================================================================
# RAMAN PREPARATION
# ============================================================================

@lru_cache(maxsize=8)
def _raman_permutation(n_max: int) -> np.ndarray:
    permutation = np.arange(basis_dimension(n_max))
    for state in enumerate_basis(n_max):
        if state.atom_a == AtomLevel.ONE:
            k = index_of(state)
            j = index_of(BasisState(AtomLevel.A, state.atom_b, state.photons))
            permutation[k], permutation[j] = j, k
    permutation.setflags(write=False)
    return permutation


def raman_map_A(state: StateVector, direction: RamanDirection = RamanDirection.FORWARD) -> StateVector:
    """
    Ideal pi Raman transfer |1>_A <-> |a>_A on every basis state.

    The swap is an involution, so the inverse applies the same permutation.
    """
    direction = RamanDirection(direction)
    permutation = _raman_permutation(state.n_max)
    return state.with_amplitudes(state.amplitudes[permutation])


def logical_state(label: str, n_max: int) -> StateVector:
    """|x_A, y_B, 0> in the qubit frame (atom A still in {|0>, |1>})."""
    return StateVector.basis(BasisState(AtomLevel(int(label[0])), AtomLevel(int(label[1])), 0), n_max)


def _is_logical_expression(label: str) -> bool:
    terms = [t.strip() for t in label.split("+")]
    return all(len(t) == 2 and set(t) <= {"0", "1"} for t in terms)


def gate_input_state(label: str, n_max: int, require_vacuum: bool = True) -> StateVector:
    """
    Raman-mapped initial state for a gate run.

    Accepts logical labels ('11', '01+11', 'uniform') which are prepared in the
    qubit frame and mapped forward, or basis labels ('a10+010') which are taken
    as already mapped. Gate runs need an empty cavity; plain simulations pass
    require_vacuum=False.
    """
    text = label.strip().lower()
    if text == "uniform":
        text = "+".join(LOGICAL_INPUTS)
    if _is_logical_expression(text):
        amplitudes = sum(logical_state(t.strip(), n_max).amplitudes for t in text.split("+"))
        norm = np.linalg.norm(amplitudes)
        return raman_map_A(StateVector(amplitudes / norm), RamanDirection.FORWARD)

    state = StateVector.from_label(label, n_max)
    if not require_vacuum:
        return state
    occupied = [s for s in enumerate_basis(n_max) if abs(state.amplitude(s)) > 0 and s.photons > 0]
    if occupied:
        raise InvalidParameterError(f"Gate inputs need an empty cavity, '{label}' populates {occupied[0]}")
    return state


# ============================================================================
# SINGLE RUN
# ============================================================================

@dataclass(frozen=True, eq=False)
class GateRun:
    """One evolution over the gate time. States are in the Raman-mapped frame."""

    label: str
    gate_time: float
    initial_state: StateVector
    final_state: StateVector
    success: float
    conditional_phase: float
    leakage: float
    losses: Dict[str, float]
    stats: IntegratorStats

    def logical_final_state(self) -> StateVector:
        """Final state mapped back to the qubit frame."""
        return raman_map_A(self.final_state, RamanDirection.INVERSE)

    def to_dict(self) -> Dict:
        return {
            'input': self.label,
            'gate_time_us': self.gate_time,
            'success': self.success,
            'conditional_phase_rad': self.conditional_phase,
            'leakage': self.leakage,
            'atomic_loss': self.losses.get('atomic_loss', 0.0),
            'cavity_loss': self.losses.get('cavity_loss', 0.0),
        }


def _accumulated_phase(initial: StateVector, final: StateVector, state: BasisState) -> float:
    return float(np.angle(final.amplitude(state)) - np.angle(initial.amplitude(state)))


def _conditional_phase(initial: StateVector, final: StateVector) -> float:
    populated = [
        s for s in (ACTIVE_REFERENCE, SPECTATOR_REFERENCE)
        if abs(initial.amplitude(s)) > AMPLITUDE_FLOOR
    ]
    if len(populated) == 2:
        phase = (_accumulated_phase(initial, final, ACTIVE_REFERENCE)
                 - _accumulated_phase(initial, final, SPECTATOR_REFERENCE))
        return wrap_phase(phase)
    if populated:
        return wrap_phase(_accumulated_phase(initial, final, populated[0]))
    # Neither reference is present: follow the dominant input component
    dominant = enumerate_basis(initial.n_max)[int(np.argmax(np.abs(initial.amplitudes)))]
    return wrap_phase(_accumulated_phase(initial, final, dominant))


def run_gate(
    params: ParameterSet,
    label: str,
    timing: str = DEFAULT_GATE_TIMING,
    rel_tol: float = DEFAULT_RTOL,
    sample_interval: float = DEFAULT_SAMPLE_INTERVAL_US,
    t_final: Optional[float] = None
) -> GateRun:
    """
    Evolve one (Raman-mapped) input over the full truncated basis.

    Args:
        params: Physical parameters
        label: Logical ('11', 'uniform') or basis ('a10+010') input label
        timing: 'reduced' or 'dressed' gate duration
        rel_tol: Integrator relative tolerance
        sample_interval: Sampling used for leakage and loss integrals (us)
        t_final: Override of the gate duration (us)

    Returns:
        GateRun with success, conditional phase, leakage and loss channels
    """
    initial = gate_input_state(label, params.n_max)
    duration = gate_duration(params, timing) if t_final is None else float(t_final)
    traj = evolve(effective_generator(params), initial, duration, rel_tol, sample_interval)
    final = traj.final_state

    multi_photon = [index_of(s) for s in enumerate_basis(params.n_max) if s.photons >= 2]
    leakage = float(np.max(np.sum(np.abs(traj.amplitudes[:, multi_photon]) ** 2, axis=1)))
    leakage = max(leakage, float(np.sum(np.abs(final.amplitudes[multi_photon]) ** 2)))

    run = GateRun(
        label=label,
        gate_time=duration,
        initial_state=initial,
        final_state=final,
        success=final.norm_squared,
        conditional_phase=_conditional_phase(initial, final),
        leakage=leakage,
        losses=loss_channels(traj, params),
        stats=traj.stats,
    )
    logger.debug("Gate input %s: success %.6f, phase %.4f rad", label, run.success, run.conditional_phase)
    return run


# ============================================================================
# COMPENSATION AND SCORING
# ============================================================================

@dataclass(frozen=True, eq=False)
class GateReport:
    """Four logical runs plus the compensated aggregate metrics."""

    runs: Dict[str, GateRun]
    gate_time: float
    mean_success: float
    output_phases: Dict[str, float]
    phase_corrections: Dict[str, float]
    residual_phase: float
    fidelities: Dict[str, float]
    fidelity: float
    losses: Dict[str, float]
    leakage: float
    assessment: Dict = field(default_factory=dict)

    def summary(self) -> Dict:
        """Flat aggregate row."""
        return {
            'gate_time_us': self.gate_time,
            'mean_success': self.mean_success,
            'residual_phase_rad': self.residual_phase,
            'phase_correction_A_rad': self.phase_corrections['atom_A'],
            'phase_correction_B_rad': self.phase_corrections['atom_B'],
            'fidelity': self.fidelity,
            'atomic_loss': self.losses['atomic_loss'],
            'cavity_loss': self.losses['cavity_loss'],
            'leakage': self.leakage,
            'verdict': self.assessment.get('verdict', ''),
        }


def _logical_block(runs: Mapping[str, GateRun]) -> np.ndarray:
    """4x4 amplitudes <out|U|in> restricted to the logical states, qubit frame."""
    n_max = runs[LOGICAL_INPUTS[0]].final_state.n_max
    rows = [index_of(BasisState(AtomLevel(int(o[0])), AtomLevel(int(o[1])), 0)) for o in LOGICAL_INPUTS]
    block = np.zeros((4, 4), dtype=complex)
    for col, label in enumerate(LOGICAL_INPUTS):
        final = runs[label].logical_final_state()
        if final.n_max != n_max:
            raise InvalidParameterError("All gate runs must share one truncation")
        block[:, col] = final.amplitudes[rows]
    return block


def compensate_and_score(
    runs: Mapping[str, GateRun],
    name: str = "gate",
    adiabaticity: Optional[Dict[str, float]] = None
) -> GateReport:
    """
    Zero the |0,1> and |1,0> output phases with single-qubit corrections and score the result.

    The fidelity averages |<CZ psi|U psi>|^2 / <U psi|U psi> over the four
    logical basis inputs and their uniform superposition, whose output follows
    from the basis runs by linearity.

    Raises:
        InvalidParameterError: one of the four logical inputs is missing
    """
    missing = [label for label in LOGICAL_INPUTS if label not in runs]
    if missing:
        raise InvalidParameterError(f"Compensation needs all four logical inputs, missing {', '.join(missing)}")
    gate_times = {round(runs[label].gate_time, 12) for label in LOGICAL_INPUTS}
    if len(gate_times) != 1:
        raise InvalidParameterError("Logical runs were evolved for different gate times")

    block = _logical_block(runs)
    phases = {label: float(np.angle(block[k, k])) for k, label in enumerate(LOGICAL_INPUTS)}
    correction_B = -(phases["01"] - phases["00"])
    correction_A = -(phases["10"] - phases["00"])
    compensation = np.exp(1j * np.array([
        -phases["00"],
        -phases["00"] + correction_B,
        -phases["00"] + correction_A,
        -phases["00"] + correction_A + correction_B,
    ]))
    compensated = compensation[:, None] * block
    residual = wrap_phase(phases["11"] - phases["01"] - phases["10"] + phases["00"])

    finals = np.array([runs[label].logical_final_state().amplitudes for label in LOGICAL_INPUTS])
    probes = {label: np.eye(4, dtype=complex)[k] for k, label in enumerate(LOGICAL_INPUTS)}
    probes['uniform'] = np.full(4, 0.5, dtype=complex)
    fidelities = {}
    for label, probe in probes.items():
        output = compensated @ probe
        # Single-qubit phase gates are unitary, so the norm comes from the uncompensated full states
        norm_squared = float(np.sum(np.abs(probe @ finals) ** 2))
        overlap = np.vdot(CZ_DIAGONAL * probe, output)
        fidelities[label] = float(abs(overlap) ** 2 / norm_squared) if norm_squared > 0 else 0.0

    losses = {
        key: float(np.mean([runs[label].losses[key] for label in LOGICAL_INPUTS]))
        for key in ('atomic_loss', 'cavity_loss')
    }
    mean_success = float(np.mean([runs[label].success for label in LOGICAL_INPUTS]))
    fidelity = float(np.mean(list(fidelities.values())))
    leakage = max(runs[label].leakage for label in LOGICAL_INPUTS)

    assessment = GateAssessor().assess_gate(
        name,
        residual_phase=residual,
        fidelity=fidelity,
        mean_success=mean_success,
        losses=losses,
        leakage=leakage,
        adiabaticity=adiabaticity,
    )
    return GateReport(
        runs=dict(runs),
        gate_time=runs[LOGICAL_INPUTS[0]].gate_time,
        mean_success=mean_success,
        output_phases=phases,
        phase_corrections={'atom_A': wrap_phase(correction_A), 'atom_B': wrap_phase(correction_B)},
        residual_phase=residual,
        fidelities=fidelities,
        fidelity=fidelity,
        losses=losses,
        leakage=leakage,
        assessment=assessment,
    )


def run_protocol(
    params: ParameterSet,
    timing: str = DEFAULT_GATE_TIMING,
    rel_tol: float = DEFAULT_RTOL,
    sample_interval: float = DEFAULT_SAMPLE_INTERVAL_US,
    name: str = "gate"
) -> GateReport:
    """Run the four logical inputs and score the compensated gate."""
    duration = gate_duration(params, timing)
    runs = {
        label: run_gate(params, label, timing, rel_tol, sample_interval, t_final=duration)
        for label in LOGICAL_INPUTS
    }
    return compensate_and_score(runs, name=name, adiabaticity=adiabaticity_ratios(params))


# ============================================================================
# SWEEPS
# ============================================================================

# Axis name -> (ParameterSet fields it sets, emitted column name)
SWEEP_FIELDS: Dict[str, Tuple[Tuple[str, ...], str]] = {
    'omega': (('omega',), 'omega_MHz'),
    'delta_L': (('delta_L',), 'delta_L_MHz'),
    'delta_C': (('delta_C',), 'delta_C_MHz'),
    'g': (('g_A', 'g_B'), 'g_MHz'),
    'g_A': (('g_A',), 'g_A_MHz'),
    'g_B': (('g_B',), 'g_B_MHz'),
    'gamma': (('gamma',), 'gamma_MHz'),
    'kappa': (('kappa',), 'kappa_MHz'),
    'laser_scale': (('omega', 'delta_L'), 'laser_scale'),
}


def sweep_point_parameters(base: ParameterSet, point: Sequence[Tuple[str, float]]) -> ParameterSet:
    """Apply one grid point; 'laser_scale' multiplies Omega and Delta_L of the base."""
    changes: Dict[str, float] = {}
    for axis, value in point:
        if axis == 'laser_scale':
            changes['omega'] = base.omega * value
            changes['delta_L'] = base.delta_L * value
        else:
            for name in SWEEP_FIELDS[axis][0]:
                changes[name] = value
    return base.with_changes(**changes)


def _sweep_row(task: Tuple[ParameterSet, Tuple[Tuple[str, float], ...], str, float, float]) -> Dict:
    base, point, timing, rel_tol, sample_interval = task
    row: Dict = {SWEEP_FIELDS[axis][1]: value for axis, value in point}
    try:
        params = sweep_point_parameters(base, point)
        report = run_protocol(params, timing, rel_tol, sample_interval, name=str(point))
        row.update(report.summary())
        row['error'] = ''
    except CavityGateError as exc:
        row['error'] = f"{type(exc).__name__}: {exc}"
    except Exception as exc:
        logger.warning("Unexpected failure at sweep point %s: %s", point, exc)
        row['error'] = f"{type(exc).__name__}: {exc}"
    return row


def sweep_grid(axes: Sequence[Tuple[str, Sequence[float]]]) -> List[Tuple[Tuple[str, float], ...]]:
    """Cartesian product of the axes in the given order; one empty point when there are no axes."""
    for axis, values in axes:
        if axis not in SWEEP_FIELDS:
            raise InvalidParameterError(f"Unknown sweep axis '{axis}' (expected one of {', '.join(SWEEP_FIELDS)})")
        if len(values) == 0:
            raise InvalidParameterError(f"Sweep axis '{axis}' has no values")
    size = math.prod(len(values) for _, values in axes)
    if size > SWEEP_GRID_CAP:
        raise InvalidParameterError(f"Sweep grid has {size} points, above the cap of {SWEEP_GRID_CAP}")
    names = [axis for axis, _ in axes]
    return [tuple(zip(names, combo)) for combo in itertools.product(*(values for _, values in axes))]


def sweep(
    base: ParameterSet,
    axes: Sequence[Tuple[str, Sequence[float]]],
    timing: str = DEFAULT_GATE_TIMING,
    rel_tol: float = DEFAULT_RTOL,
    sample_interval: float = DEFAULT_SAMPLE_INTERVAL_US,
    workers: int = SWEEP_WORKERS,
    progress: bool = False
) -> List[Dict]:
    """
    One aggregate gate row per grid point, in grid order.

    Rows are independent; with workers > 1 they run on a process pool in
    batches of SWEEP_BATCH_SIZE. Failures of a point are recorded in its
    'error' column instead of aborting the sweep.
    """
    points = sweep_grid(axes)
    tasks = [(base, point, timing, rel_tol, sample_interval) for point in points]
    logger.info("Sweeping %d grid point(s) with %d worker(s)", len(tasks), workers)

    rows: List[Dict] = []
    with tqdm(total=len(tasks), desc="Sweep", unit="point", disable=not progress) as bar:
        if workers <= 1 or len(tasks) == 1:
            for task in tasks:
                rows.append(_sweep_row(task))
                bar.update(1)
        else:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                for start in range(0, len(tasks), SWEEP_BATCH_SIZE):
                    batch = tasks[start:start + SWEEP_BATCH_SIZE]
                    rows.extend(executor.map(_sweep_row, batch))
                    bar.update(len(batch))
    return rows
