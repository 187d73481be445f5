"""Core layer: errors and run configuration."""

from __future__ import annotations

from magnopurcell.core.errors import (
    CommandResult,
    CommandStatus,
    ConfigError,
    DegenerateInputError,
    InvalidParameterError,
    MagnoPurcellError,
    PreconditionError,
    SingularityError,
    command_error_handler,
)

__all__ = [
    "CommandResult",
    "CommandStatus",
    "ConfigError",
    "DegenerateInputError",
    "InvalidParameterError",
    "MagnoPurcellError",
    "PreconditionError",
    "SingularityError",
    "command_error_handler",
]
