"""
raywave - Error Types
Every failure raised by the numerical core names the module it came from.
"""

from typing import Optional


class RaywaveError(Exception):
    """Base class for raywave failures."""

    module: str = "raywave"

    def __init__(self, message: str, module: Optional[str] = None):
        super().__init__(message)
        if module is not None:
            self.module = module

    def __str__(self) -> str:
        return f"{self.module}: {super().__str__()}"


class ConfigError(RaywaveError):
    """Invalid run configuration, optionally anchored to a source line."""

    module = "cli_runner"

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.path = path
        self.line = line

    def __str__(self) -> str:
        text = Exception.__str__(self)
        if self.path is not None and self.line is not None:
            return f"{self.path}:{self.line}: {text}"
        if self.path is not None:
            return f"{self.path}: {text}"
        return text


class SpecialFunctionDomainError(RaywaveError, ValueError):
    """Argument outside the domain of a special function."""

    module = "special_functions"


class SpecialFunctionOverflowError(RaywaveError, OverflowError):
    """Argument outside the accuracy envelope of a special function."""

    module = "special_functions"


class RayIntegrationError(RaywaveError):
    """Ray integration failed at time ``tau``."""

    module = "ray_tracer"

    def __init__(self, message: str, tau: Optional[float] = None):
        if tau is not None:
            message = f"{message} (tau={tau:.6g})"
        super().__init__(message)
        self.tau = tau


class CFLViolationError(RaywaveError, ValueError):
    """Time step violates dt <= 0.5 h / max c."""

    module = "reference_oracle"


class UnsupportedModeError(RaywaveError, ValueError):
    """Requested evaluation mode is not available for these inputs."""

    module = "field_assembler"


class GridMismatchError(RaywaveError, ValueError):
    """Two FieldGrids do not share geometry or time."""

    module = "field_assembler"
