"""
Shared command options
Function flags, comma-separated grids, key=value config files and the row
printer.
"""

import math
from collections.abc import Callable
from pathlib import Path
from typing import Any, Optional, TypeVar

import click

from app.core.exceptions import ConfigurationError
from app.core.storage import format_value
from app.schemas.function import FunctionKind, HolderFunction
from app.services.experiments.base import prepare_function

F = TypeVar("F", bound=Callable[..., Any])

# sampled functions need a payload and are only built from Python
FLAG_KINDS = [k.value for k in FunctionKind if k is not FunctionKind.SAMPLED]


def function_options(required: bool = True) -> Callable[[F], F]:
    """Attach the flags describing a HolderFunction."""

    def decorator(func: F) -> F:
        options = [
            click.option(
                "--fn", type=click.Choice(FLAG_KINDS), required=required, help="Function kind"
            ),
            click.option(
                "--alpha", type=float, default=0.5, show_default=True, help="Hölder exponent"
            ),
            click.option(
                "--base", type=int, default=2, show_default=True, help="Weierstrass base"
            ),
            click.option(
                "--terms", type=int, default=0, help="Series truncation J, 0 picks one"
            ),
            click.option("--level", type=float, default=None, help="Constant value or slope"),
            click.option("--shift", type=float, default=0.0, help="Translation s"),
        ]
        for option in reversed(options):
            func = option(func)
        return func

    return decorator


def build_function(
    fn: Optional[str],
    alpha: float,
    base: int,
    terms: int,
    level: Optional[float],
    shift: float,
    depth: Optional[int] = None,
) -> Optional[HolderFunction]:
    """HolderFunction from flags; series get enough terms for ``depth`` when terms is 0."""
    if fn is None:
        return None
    data: dict[str, Any] = {"kind": fn, "alpha": alpha, "base": base, "terms": terms}
    if level is not None:
        data["level"] = level
    elif fn == FunctionKind.LINEAR.value:
        data["level"] = 1.0
    f = HolderFunction(**data)
    if shift:
        f = f.model_copy(update={"shift": shift})
    if depth is not None and f.kind.is_series and terms == 0:
        f = prepare_function(f, depth)
    return f


def level_of(eps: float) -> int:
    """Dyadic depth reached by eps."""
    return max(1, math.ceil(-math.log2(eps))) if eps > 0 else 1


def parse_list(raw: Optional[str], cast: Callable[[str], Any], name: str) -> Optional[list[Any]]:
    """'8,16,32' -> [8, 16, 32]; None stays None."""
    if raw is None:
        return None
    try:
        return [cast(part) for part in str(raw).replace(" ", "").split(",") if part]
    except ValueError as e:
        raise click.BadParameter(f"{raw!r} is not a comma-separated list", param_hint=name) from e


def read_config_file(path: str) -> dict[str, str]:
    """
    Flat key=value file: '#' starts a comment, keys are flag names with
    dashes or underscores, case-insensitive.

    Raises:
        ConfigurationError: a line without '=' or an empty key
    """
    values: dict[str, str] = {}
    for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigurationError(
                f"config line {number} is not key=value", path=path, line=number
            )
        key, value = (part.strip() for part in content.split("=", 1))
        if not key:
            raise ConfigurationError(f"config line {number} has no key", path=path, line=number)
        values[key.lstrip("-").replace("-", "_").lower()] = value
    return values


def apply_config_file(ctx: click.Context, path: Optional[str]) -> None:
    """Install the config file as the default map of the invoked command."""
    if not path or ctx.invoked_subcommand is None:
        return
    group = ctx.command
    if not isinstance(group, click.Group):
        return
    command = group.get_command(ctx, ctx.invoked_subcommand)
    if command is None:
        return
    values = read_config_file(path)
    names = {p.name for p in command.params}
    unknown = sorted(set(values) - names)
    if unknown:
        raise ConfigurationError(
            f"unknown config keys for {ctx.invoked_subcommand}: {', '.join(unknown)}",
            path=path,
        )
    ctx.default_map = {ctx.invoked_subcommand: values}


def echo_rows(header: list[str], rows: list[list[Any]]) -> None:
    click.echo(",".join(header))
    for row in rows:
        click.echo(",".join(format_value(v) for v in row))
