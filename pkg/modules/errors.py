"""
Exception hierarchy for the cavity gate simulator
"""
from typing import Optional


class CavityGateError(Exception):
    """Base class for every error raised by the simulator."""

    exit_code = 1


class InvalidParameterError(CavityGateError, ValueError):
    """A physical or numerical parameter is outside its admissible range."""

    exit_code = 2


class DimensionMismatchError(CavityGateError, ValueError):
    """A state vector does not match the basis it is used with."""

    exit_code = 2


class UnsupportedConfigurationError(CavityGateError):
    """The requested computation is not defined for these parameters."""

    exit_code = 2


class ConfigError(CavityGateError):
    """
    Configuration document could not be turned into a RunConfig.

    Syntax errors carry line/column; semantic errors carry the offending key.
    """

    exit_code = 2

    def __init__(
        self,
        message: str,
        key: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None
    ):
        self.key = key
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f" (line {line}, column {column})"
        elif key is not None:
            location = f" (key '{key}')"
        super().__init__(f"{message}{location}")


class ResonanceProximityError(CavityGateError):
    """Adiabatic elimination is invalid close to the 1 - 2s pole."""

    exit_code = 3


class NoGateError(CavityGateError):
    """The effective 4-photon coupling vanishes, so no gate can be timed."""

    exit_code = 3


class IntegrationError(CavityGateError):
    """The ODE integrator gave up; carries the time it reached."""

    exit_code = 3

    def __init__(self, message: str, failure_time: float):
        self.failure_time = failure_time
        super().__init__(f"{message} (t = {failure_time:.6g} us)")
