#!/usr/bin/env python3
"""
Cavity QED Conditional Phase Gate Simulator
Command-line entry point

Commands:
- simulate: time series of populations and phases for one initial state
- reduce:   adiabatic-elimination parameters, gate time and diagnostics
- gate:     four-input gate protocol with compensation and verdict
- sweep:    gate aggregates over a parameter grid
"""
import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

# Add project root to path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from config.settings import OUTPUT_FORMATS, OUTPUTS_DIR, VERBOSE
from modules.dynamics import absolute_phase, evolve, relative_phase
from modules.errors import CavityGateError, ConfigError, ResonanceProximityError
from modules.gate import (
    ACTIVE_REFERENCE,
    LOGICAL_INPUTS,
    SPECTATOR_REFERENCE,
    SUMMARY_COLUMNS,
    SWEEP_FIELDS,
    gate_input_state,
    run_protocol,
    sweep,
)
from modules.hamiltonian import GATE_CHAIN_STATES, SPECTATOR_CHAIN_STATES, effective_generator
from modules.model import enumerate_basis, index_of
from modules.reduction import gate_duration, reduction_summary
from modules.report_writer import ReportWriter, default_target
from modules.run_config import PRESETS, RunConfig, config_from_mapping, decode_config
from utils.console import (
    configure_logging,
    print_error,
    print_header,
    print_info,
    print_section,
    print_success,
    print_warning,
)

GATE_COLUMNS = (
    'input', 'gate_time_us', 'success', 'conditional_phase_rad', 'output_phase_rad',
    'fidelity', 'leakage', 'atomic_loss', 'cavity_loss', 'mean_success',
    'residual_phase_rad', 'phase_correction_A_rad', 'phase_correction_B_rad', 'verdict',
)

# CLI flag destination -> configuration key
_OVERRIDES = {
    'preset': 'preset',
    'omega': 'omega',
    'delta_l': 'delta_L',
    'delta_c': 'delta_C',
    'g': 'g',
    'gamma': 'gamma',
    'kappa': 'kappa',
    'n_max': 'n_max',
    'envelope': 'envelope',
    'ramp': 'ramp_time',
    'initial': 'initial',
    'tmax': 't_final',
    'rtol': 'rel_tol',
    'sample': 'sample_interval',
    'out': 'out',
    'format': 'format',
    'workers': 'workers',
    'timing': 'timing',
}


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command-line arguments."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, default=None, help='JSON configuration file')
    common.add_argument('--preset', choices=sorted(PRESETS), default=None, help='Scenario preset')
    common.add_argument('--out', type=str, default=None, help="Output path ('-' for stdout)")
    common.add_argument('--format', choices=OUTPUT_FORMATS, default=None, help='Output format')
    common.add_argument('--rtol', type=float, default=None, help='Integrator relative tolerance')
    common.add_argument('--tmax', type=float, default=None, help='Final time (us)')
    common.add_argument('--sample', type=float, default=None, help='Sample interval (us)')
    common.add_argument('--omega', type=float, default=None, help='Rabi frequency (MHz)')
    common.add_argument('--delta-l', dest='delta_l', type=float, default=None, help='Laser detuning (MHz)')
    common.add_argument('--delta-c', dest='delta_c', type=float, default=None, help='Cavity detuning (MHz)')
    common.add_argument('--g', type=float, default=None, help='Atom-cavity coupling, both atoms (MHz)')
    common.add_argument('--gamma', type=float, default=None, help='Atomic decay (MHz)')
    common.add_argument('--kappa', type=float, default=None, help='Cavity decay (MHz)')
    common.add_argument('--n-max', dest='n_max', type=int, default=None, help='Photon-number truncation')
    common.add_argument('--envelope', choices=('constant', 'sin2'), default=None, help='Drive envelope')
    common.add_argument('--ramp', type=float, default=None, help='sin2 ramp time (us)')
    common.add_argument('--initial', type=str, default=None, help="Initial state, e.g. 'a10+010' or '11'")
    common.add_argument('--timing', choices=('reduced', 'dressed'), default=None, help='Gate timing source')
    common.add_argument('--workers', type=int, default=None, help='Sweep worker processes')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', dest='verbose', action='store_true', default=VERBOSE)
    verbosity.add_argument('--quiet', dest='verbose', action='store_false')

    parser = argparse.ArgumentParser(
        description='Cavity QED conditional phase gate simulator',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Relative phase dynamics for the adiabatic preset
  python main.py simulate --preset fig2 --initial a10+010

  # Reduced parameters as JSON on stdout
  python main.py reduce --preset fig3 --format json --out -

  # Dissipative gate with verdict
  python main.py gate --preset fig3-dissipative

  # Success versus atomic decay
  python main.py sweep --preset fig3 --axis gamma=0,0.03,0.06 --kappa 0.1
        """
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    subparsers.add_parser('simulate', parents=[common], help='Time series for one initial state')
    subparsers.add_parser('reduce', parents=[common], help='Adiabatic-elimination report')
    subparsers.add_parser('gate', parents=[common], help='Gate protocol report')
    sweep_parser = subparsers.add_parser('sweep', parents=[common], help='Gate aggregates over a grid')
    sweep_parser.add_argument(
        '--axis',
        action='append',
        default=[],
        help=f"field=v1,v2,... (fields: {', '.join(SWEEP_FIELDS)}); repeatable"
    )
    return parser.parse_args(argv)


def _parse_axis(spec: str) -> Dict[str, Any]:
    name, sep, values = spec.partition('=')
    if not sep:
        raise ConfigError(f"Axis '{spec}' must look like field=v1,v2", key='axes')
    try:
        numbers = [float(v) for v in values.split(',') if v.strip()]
    except ValueError:
        raise ConfigError(f"Axis '{spec}' has a non-numeric value", key='axes')
    return {'field': name.strip(), 'values': numbers}


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Configuration file first, then individual CLI flags on top."""
    mapping: Dict[str, Any] = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding='utf-8')
        except UnicodeDecodeError as exc:
            raise ConfigError(f"Configuration file is not valid UTF-8 (byte {exc.start})", key='config')
        mapping.update(decode_config(text))
    for dest, key in _OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            mapping[key] = value
    if getattr(args, 'axis', None):
        mapping['axes'] = [_parse_axis(spec) for spec in args.axis]
    return config_from_mapping(mapping)


def _target(config: RunConfig, command: str):
    if config.out is not None:
        return config.out
    return default_target(command, config.name, config.output_format, OUTPUTS_DIR)


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_simulate(config: RunConfig, verbose: bool = False) -> str:
    """Populations, norm and phases on the sampling grid."""
    params = config.params
    t_final = config.t_final if config.t_final is not None else gate_duration(params, config.timing)
    initial = gate_input_state(config.initial, params.n_max, require_vacuum=False)
    if verbose:
        print_info(f"Integrating {config.initial} to {t_final:.4f} us (n_max={params.n_max})")

    traj = evolve(effective_generator(params), initial, t_final, config.rel_tol, config.sample_interval)

    populated = [s for s in enumerate_basis(params.n_max) if abs(initial.amplitude(s)) > 0]
    tracked = sorted(set(GATE_CHAIN_STATES) | set(SPECTATOR_CHAIN_STATES) | set(populated), key=index_of)
    populations = np.abs(traj.amplitudes[:, [index_of(s) for s in tracked]]) ** 2
    norm = traj.norm_squared()
    abs_phase = absolute_phase(traj, ACTIVE_REFERENCE)
    rel = relative_phase(traj, ACTIVE_REFERENCE, SPECTATOR_REFERENCE)
    rel_wrapped = rel.wrapped()
    active_defined = np.abs(traj.amplitude_series(ACTIVE_REFERENCE)) > 0

    columns = ['t_us'] + [f"pop_{s.label}" for s in tracked]
    columns += ['norm2', 'abs_phase_a10_rad', 'rel_phase_rad', 'rel_phase_wrapped_rad']
    rows = []
    for k, t in enumerate(traj.times):
        row = {'t_us': float(t)}
        row.update({f"pop_{s.label}": float(populations[k, j]) for j, s in enumerate(tracked)})
        row['norm2'] = float(norm[k])
        row['abs_phase_a10_rad'] = float(abs_phase[k]) if active_defined[k] else float('nan')
        row['rel_phase_rad'] = float(rel.unwrapped_phase[k])
        row['rel_phase_wrapped_rad'] = float(rel_wrapped[k])
        rows.append(row)

    written = ReportWriter(config.output_format).write_table(rows, columns, _target(config, 'simulate'))
    if verbose:
        print_success(f"{len(rows)} samples written to {written}")
        if np.isfinite(rel.final_value):
            print_info(f"Final relative phase {rel.final_value:.4f} rad")
    return written


def cmd_reduce(config: RunConfig, verbose: bool = False) -> str:
    """Flat key-value reduction report; pole proximity is written as an error record."""
    writer = ReportWriter(config.output_format)
    target = _target(config, 'reduce')
    try:
        report, notices = reduction_summary(config.params, config.timing)
    except ResonanceProximityError as exc:
        writer.write_document({'error': type(exc).__name__, 'message': str(exc)}, target)
        raise

    document: Dict[str, Any] = dict(config.params.to_dict())
    document.update(report)
    if 'no_gate' in notices:
        document['notice'] = notices['no_gate']
        if verbose:
            print_warning(notices['no_gate'])
    written = writer.write_document(document, target)
    if verbose and 'gate_time_us' in report:
        print_success(f"Gate time {report['gate_time_us']:.4f} us, mismatch {report['phase_mismatch_rad']:.4f} rad")
    return written


def _print_verdict(assessment: Dict):
    verdict = assessment.get('verdict', '')
    message = f"Gate verdict: {verdict}"
    if verdict == 'PASS':
        print_success(message)
    elif verdict == 'WARN':
        print_warning(message)
    else:
        print_error(message)
    for recommendation in assessment.get('recommendations', []):
        print_info(recommendation)


def cmd_gate(config: RunConfig, verbose: bool = False) -> str:
    """Per-input rows, the uniform-superposition fidelity and one aggregate row."""
    if verbose:
        print_section("Gate Protocol")
    report = run_protocol(config.params, config.timing, config.rel_tol, config.sample_interval, name=config.name)

    rows: List[Dict] = []
    for label in LOGICAL_INPUTS:
        row = report.runs[label].to_dict()
        row['output_phase_rad'] = report.output_phases[label]
        row['fidelity'] = report.fidelities[label]
        rows.append(row)
    rows.append({'input': 'uniform', 'fidelity': report.fidelities['uniform']})
    aggregate = {'input': 'aggregate'}
    aggregate.update(report.summary())
    rows.append(aggregate)

    written = ReportWriter(config.output_format).write_table(
        rows, GATE_COLUMNS, _target(config, 'gate'), schema_header=True
    )
    if verbose:
        print_info(f"Mean success {report.mean_success:.4f}, fidelity {report.fidelity:.4f}")
        _print_verdict(report.assessment)
        print_success(f"Gate report written to {written}")
    return written


def cmd_sweep(config: RunConfig, verbose: bool = False) -> str:
    """One aggregate row per grid point."""
    rows = sweep(
        config.params,
        config.axes,
        timing=config.timing,
        rel_tol=config.rel_tol,
        sample_interval=config.sample_interval,
        workers=config.workers,
        progress=verbose,
    )
    columns = [SWEEP_FIELDS[name][1] for name, _ in config.axes] + list(SUMMARY_COLUMNS) + ['error']
    written = ReportWriter(config.output_format).write_table(
        rows, columns, _target(config, 'sweep'), schema_header=True
    )
    failed = sum(1 for row in rows if row.get('error'))
    if verbose:
        if failed:
            print_warning(f"{failed} of {len(rows)} grid point(s) failed; see the error column")
        print_success(f"Sweep table written to {written}")
    return written


COMMANDS = {
    'simulate': cmd_simulate,
    'reduce': cmd_reduce,
    'gate': cmd_gate,
    'sweep': cmd_sweep,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    args = parse_arguments(argv)
    configure_logging(args.verbose)
    if args.verbose:
        print_header()

    try:
        config = build_run_config(args)
        COMMANDS[args.command](config, verbose=args.verbose)
    except CavityGateError as exc:
        print_error(f"{type(exc).__name__}: {exc}")
        return exc.exit_code
    except OSError as exc:
        print_error(f"I/O error: {exc}")
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
