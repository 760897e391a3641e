"""
Scenario presets and run configuration parsing

Configuration documents are JSON objects; every frequency is in MHz and every
time in microseconds.
"""
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

from config.settings import (
    DEFAULT_GATE_TIMING,
    DEFAULT_OUTPUT_FORMAT,
    DEFAULT_RTOL,
    DEFAULT_SAMPLE_INTERVAL_US,
    OUTPUT_FORMATS,
    RTOL_BOUNDS,
    SWEEP_WORKERS,
)
from modules.errors import ConfigError, InvalidParameterError
from modules.gate import SWEEP_FIELDS
from modules.model import EnvelopeShape, ParameterSet, PulseEnvelope


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    params: ParameterSet
    description: str


PRESETS: Dict[str, ScenarioPreset] = {
    preset.name: preset for preset in (
        ScenarioPreset(
            "fig2",
            ParameterSet.symmetric(omega=20.0, delta_L=100.0, delta_C=50.0, g=10.0),
            "Adiabatic regime, Omega << Delta_L",
        ),
        ScenarioPreset(
            "fig3",
            ParameterSet.symmetric(omega=10.0, delta_L=30.0, delta_C=8.75, g=3.0),
            "Beyond the adiabatic limit",
        ),
        ScenarioPreset(
            "fig2-dissipative",
            ParameterSet.symmetric(omega=20.0, delta_L=100.0, delta_C=50.0, g=10.0, gamma=0.05, kappa=0.1),
            "Adiabatic regime with atomic and cavity decay",
        ),
        ScenarioPreset(
            "fig3-dissipative",
            ParameterSet.symmetric(omega=10.0, delta_L=30.0, delta_C=8.75, g=3.0, gamma=0.03, kappa=0.1),
            "Non-adiabatic regime with atomic and cavity decay",
        ),
    )
}

DEFAULT_PRESET = "fig2"
DEFAULT_INITIAL = "a10+010"

# Keys mapped straight onto ParameterSet fields
_FLOAT_PARAMS = ('omega', 'delta_L', 'delta_C', 'g_A', 'g_B', 'gamma', 'kappa')
_NON_NEGATIVE = {'omega', 'g', 'g_A', 'g_B', 'gamma', 'kappa', 'ramp_time'}

ALLOWED_KEYS = (
    'preset', 'omega', 'delta_L', 'delta_C', 'g', 'g_A', 'g_B', 'gamma', 'kappa',
    'n_max', 'envelope', 'ramp_time', 'initial', 't_final', 'rel_tol',
    'sample_interval', 'out', 'format', 'axes', 'workers', 'timing',
)


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs; explicit parameters already override the preset."""

    params: ParameterSet
    preset: Optional[str] = None
    initial: str = DEFAULT_INITIAL
    t_final: Optional[float] = None
    rel_tol: float = DEFAULT_RTOL
    sample_interval: float = DEFAULT_SAMPLE_INTERVAL_US
    out: Optional[str] = None
    output_format: str = DEFAULT_OUTPUT_FORMAT
    axes: Tuple[Tuple[str, Tuple[float, ...]], ...] = field(default_factory=tuple)
    workers: int = SWEEP_WORKERS
    timing: str = DEFAULT_GATE_TIMING

    @property
    def name(self) -> str:
        return self.preset or "custom"


# ============================================================================
# VALIDATION HELPERS
# ============================================================================

def _number(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"Expected a finite number, got {value!r}", key=key)
    if key in _NON_NEGATIVE and value < 0:
        raise ConfigError(f"Must be >= 0, got {value}", key=key)
    return float(value)


def _positive(key: str, value: Any) -> float:
    number = _number(key, value)
    if number <= 0:
        raise ConfigError(f"Must be > 0, got {value}", key=key)
    return number


def _integer(key: str, value: Any, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"Expected an integer >= {minimum}, got {value!r}", key=key)
    return value


def _text(key: str, value: Any, choices: Optional[Tuple[str, ...]] = None) -> str:
    if not isinstance(value, str) or not value.strip():
        raise ConfigError(f"Expected a non-empty string, got {value!r}", key=key)
    if choices is not None and value not in choices:
        raise ConfigError(f"Expected one of {', '.join(choices)}, got '{value}'", key=key)
    return value


def _axes(value: Any) -> Tuple[Tuple[str, Tuple[float, ...]], ...]:
    if not isinstance(value, list):
        raise ConfigError("Expected a list of {\"field\": ..., \"values\": [...]} objects", key="axes")
    axes = []
    for entry in value:
        if not isinstance(entry, dict) or set(entry) != {"field", "values"}:
            raise ConfigError("Each axis needs exactly 'field' and 'values'", key="axes")
        name = _text("axes", entry["field"], tuple(SWEEP_FIELDS))
        values = entry["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError(f"Axis '{name}' needs a non-empty list of values", key="axes")
        axes.append((name, tuple(_number("axes", v) for v in values)))
    return tuple(axes)


def _parameters(mapping: Mapping[str, Any], base: ParameterSet) -> ParameterSet:
    changes: Dict[str, Any] = {}
    if 'g' in mapping:
        g = _number('g', mapping['g'])
        changes['g_A'] = g
        changes['g_B'] = g
    for key in _FLOAT_PARAMS:
        if key in mapping:
            changes[key] = _number(key, mapping[key])
    if 'n_max' in mapping:
        changes['n_max'] = _integer('n_max', mapping['n_max'], 1)

    shape = base.envelope.shape.value
    ramp = base.envelope.ramp_time
    if 'envelope' in mapping:
        shape = _text('envelope', mapping['envelope'], tuple(s.value for s in EnvelopeShape))
    if 'ramp_time' in mapping:
        ramp = _number('ramp_time', mapping['ramp_time'])
    if shape == EnvelopeShape.SIN_SQUARED_RAMP.value and ramp <= 0:
        raise ConfigError("A sin2 envelope needs ramp_time > 0", key='ramp_time')
    changes['envelope'] = PulseEnvelope(EnvelopeShape(shape), ramp if shape != EnvelopeShape.CONSTANT.value else 0.0)

    try:
        return base.with_changes(**changes)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc))


# ============================================================================
# PARSING AND EMISSION
# ============================================================================

def config_from_mapping(mapping: Mapping[str, Any]) -> RunConfig:
    """
    Validate a decoded configuration object.

    Args:
        mapping: Decoded JSON object (or CLI flags merged over one)

    Returns:
        RunConfig with the preset overridden field by field

    Raises:
        ConfigError: unknown key or a value outside its constraint
    """
    for key in mapping:
        if key not in ALLOWED_KEYS:
            raise ConfigError("Unknown configuration key", key=key)

    preset_name = mapping.get('preset')
    if preset_name is not None:
        if not isinstance(preset_name, str) or preset_name not in PRESETS:
            raise ConfigError(
                f"Unknown preset {preset_name!r} (expected one of {', '.join(PRESETS)})", key='preset'
            )
    base = PRESETS[preset_name or DEFAULT_PRESET].params
    params = _parameters(mapping, base)

    settings: Dict[str, Any] = {}
    if 'initial' in mapping:
        settings['initial'] = _text('initial', mapping['initial'])
    if mapping.get('t_final') is not None:
        settings['t_final'] = _positive('t_final', mapping['t_final'])
    if 'rel_tol' in mapping:
        rel_tol = _number('rel_tol', mapping['rel_tol'])
        low, high = RTOL_BOUNDS
        if not low < rel_tol < high:
            raise ConfigError(f"Must lie in ({low:g}, {high:g}), got {rel_tol:g}", key='rel_tol')
        settings['rel_tol'] = rel_tol
    if 'sample_interval' in mapping:
        settings['sample_interval'] = _positive('sample_interval', mapping['sample_interval'])
    if mapping.get('out') is not None:
        settings['out'] = _text('out', mapping['out'])
    if 'format' in mapping:
        settings['output_format'] = _text('format', mapping['format'], OUTPUT_FORMATS)
    if 'axes' in mapping:
        settings['axes'] = _axes(mapping['axes'])
    if 'workers' in mapping:
        settings['workers'] = _integer('workers', mapping['workers'], 1)
    if 'timing' in mapping:
        settings['timing'] = _text('timing', mapping['timing'], ("reduced", "dressed"))

    return RunConfig(params=params, preset=preset_name, **settings)


def decode_config(text: str) -> Dict[str, Any]:
    """JSON text to a mapping, with line/column on syntax errors."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Invalid configuration syntax: {exc.msg}", line=exc.lineno, column=exc.colno)
    if not isinstance(document, dict):
        raise ConfigError("Configuration must be a JSON object", line=1, column=1)
    return document


def parse_config(text: str) -> RunConfig:
    """Parse a UTF-8 JSON configuration document."""
    return config_from_mapping(decode_config(text))


def config_to_mapping(config: RunConfig) -> Dict[str, Any]:
    """Explicit mapping that parses back to an equal RunConfig."""
    params = config.params
    mapping: Dict[str, Any] = {}
    if config.preset is not None:
        mapping['preset'] = config.preset
    mapping.update({
        'omega': params.omega,
        'delta_L': params.delta_L,
        'delta_C': params.delta_C,
        'g_A': params.g_A,
        'g_B': params.g_B,
        'gamma': params.gamma,
        'kappa': params.kappa,
        'n_max': params.n_max,
        'envelope': params.envelope.shape.value,
        'ramp_time': params.envelope.ramp_time,
        'initial': config.initial,
        't_final': config.t_final,
        'rel_tol': config.rel_tol,
        'sample_interval': config.sample_interval,
        'out': config.out,
        'format': config.output_format,
        'axes': [{'field': name, 'values': list(values)} for name, values in config.axes],
        'workers': config.workers,
        'timing': config.timing,
    })
    return mapping


def emit_config(config: RunConfig) -> str:
    """Deterministic JSON rendering of a RunConfig."""
    return json.dumps(config_to_mapping(config), indent=2, sort_keys=True) + "\n"
