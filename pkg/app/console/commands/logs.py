"""Log commands"""

from typing import Optional

import click

from app.core.logging import log_files


@click.command(name="logs:view")
@click.option("--channel", default=None, help="Only this channel (funcspace, harness, cli, ...)")
@click.option("--tail", type=int, default=None, help="Last lines of each file")
def view_logs(channel: Optional[str], tail: Optional[int]) -> None:
    """View channel logs"""
    files = [p for p in log_files() if channel is None or p.name.startswith(f"{channel}-")]
    if not files:
        click.echo("No logs found!")
        return

    for path in files:
        lines = path.read_text(encoding="utf-8").splitlines()
        click.echo(f"==> {path} <==")
        for line in lines[-tail:] if tail else lines:
            click.echo(line)


@click.command(name="logs:clear")
def clear_logs() -> None:
    """Clear channel logs"""
    files = log_files()
    if not files:
        click.echo("No logs found!")
        return
    for path in files:
        path.write_text("", encoding="utf-8")
    click.echo(f"Cleared {len(files)} log file(s)")
