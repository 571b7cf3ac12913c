"""
Pytest configuration and fixtures
"""

import os

# before any toolkit import: settings are read once
os.environ.setdefault("LOG_TO_FILE", "false")
os.environ.setdefault("OSC_THREADS", "1")

import pytest  # noqa: E402

from app.core.storage import Storage, storage  # noqa: E402
from app.schemas.function import FunctionKind, HolderFunction  # noqa: E402
from app.schemas.quadrature import QuadratureSpec  # noqa: E402


@pytest.fixture
def quad() -> QuadratureSpec:
    """Default quadrature policy from config."""
    return QuadratureSpec.default()


@pytest.fixture
def tight_quad() -> QuadratureSpec:
    """Tolerances two orders below the default."""
    return QuadratureSpec.default().tightened(1e-2)


@pytest.fixture
def sign_power() -> HolderFunction:
    return HolderFunction(kind=FunctionKind.SIGN_POWER, alpha=0.5)


@pytest.fixture
def constant() -> HolderFunction:
    return HolderFunction(kind=FunctionKind.CONSTANT, alpha=0.5, level=1.0)


@pytest.fixture
def linear() -> HolderFunction:
    return HolderFunction(kind=FunctionKind.LINEAR, alpha=0.5, level=1.0)


@pytest.fixture
def lacunary() -> HolderFunction:
    """Short lacunary series, cheap enough for direct quadrature."""
    return HolderFunction(kind=FunctionKind.LACUNARY_SINE, alpha=0.5, terms=10)


@pytest.fixture
def weierstrass() -> HolderFunction:
    return HolderFunction(kind=FunctionKind.WEIERSTRASS_COS, alpha=0.5, base=4, terms=8)


@pytest.fixture
def output_dir(tmp_path) -> Storage:
    """Storage rooted at a temporary directory."""
    return storage(str(tmp_path))


@pytest.fixture
def run_cli(capsys, output_dir):
    """Run the command line in-process: returns (exit code, stdout, stderr)."""
    from app.console.commands import cli_main

    def run(*argv: str) -> tuple[int, str, str]:
        code = cli_main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return run
