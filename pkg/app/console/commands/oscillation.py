"""Oscillation commands"""

from typing import Optional

import click
import numpy as np

from app.console.commands.options import (
    build_function,
    echo_rows,
    function_options,
    level_of,
)
from app.core.exceptions import VerificationFailure
from app.core.logging import get_logger
from app.core.logging_decorator import log_exceptions
from app.core.storage import format_value, storage
from app.services.coefficients import coefficient_service
from app.services.oscillation import oscillation_service
from config.experiments import cancellation

logger = get_logger("cli")


@click.command(name="theta")
@function_options()
@click.option("--x", "x", type=float, required=True, help="Point")
@click.option("--eps", type=float, required=True, help="Lower limit in (0, 1/2)")
@click.option("--abs", "absolute", is_flag=True, help="Integrate |f(x+h) - f(x-h)| instead")
@click.option("--bridged", is_flag=True, help="Also print Theta at the dyadic scale and 2H")
@log_exceptions("cli")
def theta(
    fn: str,
    alpha: float,
    base: int,
    terms: int,
    level: Optional[float],
    shift: float,
    x: float,
    eps: float,
    absolute: bool,
    bridged: bool,
) -> None:
    """Print the oscillation integral Theta_eps(f)(x)"""
    f = build_function(fn, alpha, base, terms, level, shift, depth=level_of(eps))
    assert f is not None
    if absolute:
        tol = cancellation["band_rel_tol"] if f.kind.is_series else None
        click.echo(format_value(oscillation_service.abs_theta(f, x, eps, band_rel_tol=tol)))
        return
    if not bridged:
        click.echo(format_value(float(oscillation_service.theta_fast(f, x, eps))))
        return
    result = oscillation_service.theta_bridged(f, x, eps)
    click.echo(format_value(result.theta_eps))
    click.echo(f"dyadic 2^-{result.level}: {format_value(result.theta_dyadic)}")
    click.echo(f"band 2H: {format_value(result.band)}")
    if not result.within_band:
        raise VerificationFailure(
            "theta at eps leaves the 2H band around the dyadic scale",
            failures=[result.model_dump()],
        )


@click.command(name="profile")
@function_options()
@click.option("--x", "x", type=float, required=True, help="Point")
@click.option("--N", "n", type=int, required=True, help="Deepest level")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV output path")
@log_exceptions("cli")
def profile(
    fn: str,
    alpha: float,
    base: int,
    terms: int,
    level: Optional[float],
    shift: float,
    x: float,
    n: int,
    out: Optional[str],
) -> None:
    """Print Theta_{2^-k} and its running maximum for k = 1..N"""
    f = build_function(fn, alpha, base, terms, level, shift, depth=n)
    assert f is not None
    theta_k = oscillation_service.profile_matrix(f, [x], n)[:, 0]
    star = np.maximum.accumulate(np.abs(theta_k))
    header = ["k", "eps", "theta", "theta_star"]
    rows = [[k, 2.0**-k, float(theta_k[k - 1]), float(star[k - 1])] for k in range(1, n + 1)]
    echo_rows(header, rows)
    if out:
        path = storage().put_csv(out, header, rows)
        logger.info("Profile written", context={"path": str(path), "N": n})


@click.command(name="coeffs")
@click.option("--alpha", type=float, default=0.5, show_default=True, help="Hölder exponent")
@click.option("--N", "n", type=int, required=True, help="Level N of c_{j,N}")
@click.option("--J", "j_max", type=int, default=None, help="Last index j (default 2N)")
@click.option("--limit", is_flag=True, help="Also print A(alpha) and its closed form")
@log_exceptions("cli")
def coeffs(alpha: float, n: int, j_max: Optional[int], limit: bool) -> None:
    """Print the lacunary coefficients c_{j,N}"""
    table = coefficient_service.coefficient_table(alpha, n, 2 * n if j_max is None else j_max)
    echo_rows(["j", "N", "c"], [[row.j, row.N, row.value] for row in table])
    if limit:
        click.echo(f"A: {format_value(coefficient_service.limit_A(alpha))}")
        closed = coefficient_service.limit_A_closed_form(alpha)
        click.echo(f"A closed form: {format_value(closed)}")
