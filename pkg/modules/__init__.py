"""
Core modules for the cavity gate simulator
"""
from .model import BasisState, ParameterSet, PulseEnvelope, StateVector
from .hamiltonian import build_effective_hamiltonian, build_lab_hamiltonian, frame_rotate
from .dynamics import Trajectory, evolve
from .reduction import effective_parameters, gate_duration, phase_mismatch
from .gate import GateReport, compensate_and_score, raman_map_A, run_gate, run_protocol, sweep
from .gate_assessor import GateAssessor
from .report_writer import ReportWriter
from .run_config import PRESETS, RunConfig, parse_config

__all__ = [
    'BasisState',
    'ParameterSet',
    'PulseEnvelope',
    'StateVector',
    'build_effective_hamiltonian',
    'build_lab_hamiltonian',
    'frame_rotate',
    'Trajectory',
    'evolve',
    'effective_parameters',
    'gate_duration',
    'phase_mismatch',
    'GateReport',
    'compensate_and_score',
    'raman_map_A',
    'run_gate',
    'run_protocol',
    'sweep',
    'GateAssessor',
    'ReportWriter',
    'PRESETS',
    'RunConfig',
    'parse_config'
]
