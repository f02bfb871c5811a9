"""Exception hierarchy shared by the codec, bus, kernels and timing engine."""

from typing import Optional


class SimulatorError(Exception):
    """Base class for every error raised by cifsim."""


class MalformedStreamError(SimulatorError):
    """Word stream length does not match the expected pixel count."""


class MalformedPayloadError(SimulatorError):
    """Framed payload is too short or its trailer is inconsistent."""


class ConfigurationError(SimulatorError):
    """Bus, scenario or timing configuration is invalid or incomplete."""


class FramingError(SimulatorError):
    """Bus event stream violates the vsync/hsync framing rules."""

    def __init__(self, message: str, cycle: Optional[int] = None):
        self.cycle = cycle
        if cycle is not None:
            message = f"{message} (first bad cycle {cycle})"
        super().__init__(message)


class HarnessError(SimulatorError):
    """Error-injection request references something that is not a pixel."""


class AddressingError(SimulatorError):
    """Unknown register name."""


class GeometryError(SimulatorError):
    """Frame dimensions are unsuitable for the requested operation."""


class ParameterError(SimulatorError):
    """Kernel parameter out of its supported range."""


class PartitionError(SimulatorError):
    """Image height cannot be split into the requested bands."""


class ThroughputUndefinedError(SimulatorError):
    """All component times are zero, so throughput is undefined."""


class FileFormatError(SimulatorError):
    """Image, mesh, weight or scenario file could not be parsed."""
