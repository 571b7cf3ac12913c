"""
Console Commands
Command group of the oscillation toolkit: theta, profile, coeffs, identity,
experiment and the log helpers.
"""

from collections.abc import Sequence
from typing import Optional

import click

from app import __version__
from app.console.commands.experiment import experiment, identity
from app.console.commands.logs import clear_logs, view_logs
from app.console.commands.options import apply_config_file
from app.console.commands.oscillation import coeffs, profile, theta
from app.core.error_handler import EXIT_OK, EXIT_USAGE, handle_cli_exception
from app.core.logging import get_logger

logger = get_logger("cli")


@click.group()
@click.version_option(__version__, prog_name="osc")
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="key=value file of defaults for the invoked command",
)
@click.pass_context
def app(ctx: click.Context, config_path: Optional[str]) -> None:
    """Hölder oscillation toolkit"""
    apply_config_file(ctx, config_path)


# Register all commands
app.add_command(theta)
app.add_command(profile)
app.add_command(coeffs)
app.add_command(identity)
app.add_command(experiment)
app.add_command(view_logs)
app.add_command(clear_logs)


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line and map the outcome to an exit code.

    Returns:
        0 on success, 1 on usage or configuration errors, 2 when a check fails
    """
    try:
        result = app.main(
            args=list(argv) if argv is not None else None,
            prog_name="osc",
            standalone_mode=False,
        )
    except click.ClickException as e:
        e.show()
        logger.info("Usage error", context={"error": e.format_message()})
        return EXIT_USAGE
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    except Exception as e:
        return handle_cli_exception(e)
    return result if isinstance(result, int) else EXIT_OK


def main() -> None:
    raise SystemExit(cli_main())


__all__ = ["app", "cli_main", "main"]
