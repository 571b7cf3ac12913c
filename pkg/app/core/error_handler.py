"""
Error Handling Utilities
Maps toolkit exceptions to CLI exit codes and user-facing messages.
"""

import traceback

import click
from pydantic import ValidationError

from app.core.exceptions import (
    ConfigurationError,
    OscillationToolkitError,
    QuadratureError,
    VerificationFailure,
)
from app.core.logging import get_logger
from config import settings

logger = get_logger("cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2


def exit_code_for(exc: BaseException) -> int:
    """Exit code contract: 2 for failed checks and numerics, 1 for everything else."""
    if isinstance(exc, (VerificationFailure, QuadratureError)):
        return EXIT_FAILED
    return EXIT_USAGE


def handle_cli_exception(exc: BaseException) -> int:
    """
    Report an exception raised under the CLI and return its exit code.

    Args:
        exc: Exception raised by a command

    Returns:
        Process exit code
    """
    if isinstance(exc, ValidationError):
        exc = ConfigurationError(secure_error_message(exc, "Invalid configuration"))

    context = getattr(exc, "context", None) or {}
    try:
        logger.exception(f"Command failed: {exc}", exc, context=context)
    except Exception as log_error:
        print(f"Error logging failed: {log_error} | Original: {exc}")

    click.echo(f"Error: {exc}", err=True)
    if isinstance(exc, QuadratureError):
        click.echo(
            f"  achieved error estimate {exc.error_estimate:.3e} "
            f"(value {exc.value:.17g})",
            err=True,
        )
    if settings.APP_ENV != "production" and settings.LOG_LEVEL.upper() == "DEBUG":
        click.echo(traceback.format_exc(), err=True)
    return exit_code_for(exc)


def secure_error_message(
    error: Exception, default_message: str = "An error occurred"
) -> str:
    """
    Get a message for the user; pydantic errors are flattened to one line.

    Args:
        error: Exception object
        default_message: Message used when the error carries no detail

    Returns:
        Safe error message
    """
    if isinstance(error, ValidationError):
        parts = [
            f"{'.'.join(str(p) for p in e['loc']) or 'value'}: {e['msg']}"
            for e in error.errors()
        ]
        return "; ".join(parts) or default_message
    if isinstance(error, OscillationToolkitError):
        return error.detail
    return str(error) or default_message
