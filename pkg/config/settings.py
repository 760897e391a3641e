"""
Cavity Gate Simulator Configuration Settings
Numerical defaults, sweep limits and output formatting, overridable from .env
"""
import os
from pathlib import Path

# Try to load from .env file if present
try:
    from dotenv import load_dotenv
    _env_path = Path(__file__).parent.parent / '.env'
    if _env_path.exists():
        load_dotenv(_env_path)
except ImportError:
    pass


def _env_float(name: str, default: float) -> float:
    value = os.environ.get(name)
    return float(value) if value not in (None, "") else default


def _env_int(name: str, default: int) -> int:
    value = os.environ.get(name)
    return int(value) if value not in (None, "") else default


def _env_bool(name: str, default: bool) -> bool:
    value = os.environ.get(name)
    if value in (None, ""):
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


# ============================================================================
# PROJECT STRUCTURE
# ============================================================================

# Base directories
PROJECT_ROOT = Path(__file__).parent.parent
OUTPUTS_DIR = PROJECT_ROOT / "outputs"

# ============================================================================
# BASIS & TRUNCATION
# ============================================================================

# Photon-number truncation; the gate itself never needs more than one photon
DEFAULT_N_MAX = _env_int("CAVITY_GATE_N_MAX", 2)

# ============================================================================
# INTEGRATOR
# ============================================================================

# Embedded Runge-Kutta pair stepped by modules.dynamics.evolve (DOP853 or RK45)
INTEGRATOR_METHOD = "DOP853"

# Relative tolerance and its admissible open interval
DEFAULT_RTOL = _env_float("CAVITY_GATE_RTOL", 1e-10)
RTOL_BOUNDS = (1e-13, 1e-3)

# The stepper runs tighter than the requested rel_tol so that the global
# norm drift over tens of microseconds stays below 1e-8 at rel_tol = 1e-10
STEPPER_TOLERANCE_FACTOR = 0.1

# Absolute tolerance is tied to the relative one (amplitudes are O(1))
ATOL_RATIO = 1e-4

# Sampling grid for trajectories (microseconds)
DEFAULT_SAMPLE_INTERVAL_US = _env_float("CAVITY_GATE_SAMPLE_US", 0.01)

# Amplitudes below this magnitude have no defined phase
AMPLITUDE_FLOOR = 1e-6

# ============================================================================
# ADIABATIC ELIMINATION
# ============================================================================

# Minimum |1 - 2s| before the elimination is declared invalid
POLE_GUARD = 0.05

# Relative accuracy of the gate-duration solve for ramped envelopes
GATE_AREA_RTOL = 1e-6

# Gate timing source: "reduced" (leading-order Omega_eff) or "dressed"
DEFAULT_GATE_TIMING = "reduced"

# ============================================================================
# GATE ASSESSMENT
# ============================================================================

# Allowed |residual - pi| of the |1,1> channel after compensation (radians)
GATE_PHASE_TOLERANCE = {
    'PASS': 0.2,
    'WARN': 0.5,
}

# Minimum average fidelity after compensation
GATE_FIDELITY_GATES = {
    'PASS': 0.95,
    'WARN': 0.80,
}

# Minimum mean success (norm squared)
GATE_SUCCESS_GATES = {
    'PASS': 0.90,
    'WARN': 0.75,
}

# ============================================================================
# SWEEPS
# ============================================================================

# Maximum number of grid points in one sweep
SWEEP_GRID_CAP = 10_000

# Worker processes for sweep rows (1 = run in-process)
SWEEP_WORKERS = _env_int("CAVITY_GATE_WORKERS", min(4, os.cpu_count() or 1))

# Rows handed to the pool per batch
SWEEP_BATCH_SIZE = 16

# ============================================================================
# OUTPUT
# ============================================================================

SCHEMA_VERSION = "cavity-gate-sim/1"

# Numeric formatting for every emitted value
SIGNIFICANT_DIGITS = 9

# Options: "csv", "json"
DEFAULT_OUTPUT_FORMAT = "csv"
OUTPUT_FORMATS = ("csv", "json")

# ============================================================================
# PERFORMANCE & DEBUGGING
# ============================================================================

# Enable verbose logging
VERBOSE = _env_bool("CAVITY_GATE_VERBOSE", True)
