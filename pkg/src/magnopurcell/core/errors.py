"""Error types and command-level error handling."""

from __future__ import annotations

import logging
import traceback
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum, auto

logger = logging.getLogger(__name__)


class MagnoPurcellError(Exception):
    """Base class for all errors raised by magnopurcell."""


class InvalidParameterError(MagnoPurcellError, ValueError):
    """A model parameter is non-finite, negative or otherwise out of range."""


class PreconditionError(MagnoPurcellError, ValueError):
    """An operation was called outside the regime it is defined for."""


class SingularityError(MagnoPurcellError, ArithmeticError):
    """The transmission denominator vanished (lossless, uncoupled-to-line input)."""

    def __init__(self, message: str, index: int | None = None) -> None:
        super().__init__(message)
        self.index = index


class DegenerateInputError(MagnoPurcellError, ValueError):
    """Input carries no information to work with (e.g. an all-zero spectrum)."""


class ConfigError(MagnoPurcellError):
    """Configuration failed to parse or validate.

    Attributes:
        field: Dotted path of the offending key (``system.alpha``), if known.
    """

    def __init__(self, message: str, field: str | None = None) -> None:
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class CommandStatus(Enum):
    """Outcome of one CLI subcommand."""

    PENDING = auto()
    SUCCESS = auto()
    CONFIG_ERROR = auto()
    NUMERIC_ERROR = auto()
    OUTPUT_ERROR = auto()

    @property
    def exit_code(self) -> int:
        if self in (CommandStatus.CONFIG_ERROR, CommandStatus.OUTPUT_ERROR):
            return 1
        if self is CommandStatus.NUMERIC_ERROR:
            return 2
        return 0


@dataclass
class CommandResult:
    """Result of running one subcommand pipeline."""

    command: str
    status: CommandStatus = CommandStatus.PENDING
    message: str = ""
    outputs: list[str] | None = None
    exception: Exception | None = None

    @property
    def exit_code(self) -> int:
        return self.status.exit_code


@contextmanager
def command_error_handler(
    result: CommandResult,
    context: str = "",
    on_error: Callable[[str], None] | None = None,
) -> Iterator[CommandResult]:
    """Context manager mapping pipeline exceptions onto a CommandResult.

    Args:
        result: The CommandResult to update on errors
        context: Short description of the parameters in play, appended to messages
        on_error: Optional callback invoked with the error message

    Example:
        result = CommandResult("eigen")
        with command_error_handler(result, "alpha=0.028"):
            run_pipeline()
            result.status = CommandStatus.SUCCESS
        sys.exit(result.exit_code)
    """
    suffix = f" ({context})" if context else ""
    try:
        yield result
    except ConfigError as e:
        result.status = CommandStatus.CONFIG_ERROR
        result.exception = e
        result.message = f"{result.command}: configuration error: {e}{suffix}"
    except (MagnoPurcellError, ArithmeticError, ValueError) as e:
        result.status = CommandStatus.NUMERIC_ERROR
        result.exception = e
        result.message = f"{result.command}: numeric error: {e}{suffix}"
        logger.debug("Numeric failure in %s:\n%s", result.command, traceback.format_exc())
    except OSError as e:
        # missing or unwritable output location
        result.status = CommandStatus.OUTPUT_ERROR
        result.exception = e
        result.message = f"{result.command}: output error: {e}{suffix}"
    else:
        return
    if on_error:
        on_error(result.message)
