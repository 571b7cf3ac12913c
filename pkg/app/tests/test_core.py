"""
Unit tests for settings, storage, error mapping and the parallel runner
"""

import numpy as np
import pytest
from pydantic import BaseModel, ValidationError

from app.console.commands.options import parse_list, read_config_file
from app.core.error_handler import (
    EXIT_FAILED,
    EXIT_USAGE,
    exit_code_for,
    secure_error_message,
)
from app.core.exceptions import (
    ConfigurationError,
    PreconditionError,
    QuadratureError,
    StorageError,
    VerificationFailure,
)
from app.core.logging import get_logger
from app.core.parallel import run_indexed, task_rng, worker_count
from app.core.storage import Storage, format_value
from config import Settings


def _square(x: int) -> int:
    return x * x


def test_settings_reject_bad_numerics():
    with pytest.raises(ValidationError):
        Settings(QUAD_ABS_TOL=0.0)
    with pytest.raises(ValidationError):
        Settings(OSC_THREADS=0)
    with pytest.raises(ValidationError):
        Settings(DENSE_MAX_LEVEL=40)


def test_format_value():
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(None) == ""
    assert format_value(True) == "true"
    assert format_value(np.float64(0.5)) == "0.5"
    assert format_value(np.int64(3)) == "3"
    assert format_value(float("nan")) == "nan"
    assert format_value("lacunary") == "lacunary"


def test_storage_csv_and_json(output_dir: Storage):
    class Point(BaseModel):
        x: float

    path = output_dir.put_csv("tables/t.csv", ["x", "ok"], [[0.25, True], [None, False]])
    assert path.read_text() == "x,ok\n0.25,true\n,false\n"
    assert output_dir.get("tables/t.csv") == path.read_bytes()
    json_path = output_dir.put_json("tables/p.json", Point(x=1.5))
    assert '"x": 1.5' in json_path.read_text()
    assert output_dir.delete("tables/p.json")
    assert not output_dir.exists("tables/p.json")
    assert output_dir.get("missing.csv") is None


def test_storage_keeps_absolute_paths(output_dir: Storage, tmp_path):
    target = tmp_path / "elsewhere" / "a.csv"
    assert output_dir.path(target) == target
    written = output_dir.put_csv(target, ["x"], [[1.0]])
    assert written.read_text() == "x\n1\n"
    assert output_dir.exists(target)
    assert output_dir.delete(target)


def test_storage_is_backed_by_osfs(output_dir: Storage):
    output_dir.put("nested/deeper/a.txt", "abc")
    assert output_dir.filesystem.isdir("nested/deeper")
    assert output_dir.filesystem.readtext("nested/deeper/a.txt") == "abc"


def test_storage_put_onto_directory_raises(output_dir: Storage):
    output_dir.put("taken/a.txt", "abc")
    with pytest.raises(StorageError):
        output_dir.put("taken", "abc")


def test_exit_codes():
    assert exit_code_for(VerificationFailure("check failed")) == EXIT_FAILED
    assert exit_code_for(QuadratureError("no convergence", value=1.0, error_estimate=1e-3)) == 2
    assert exit_code_for(PreconditionError("bad eps")) == EXIT_USAGE
    assert exit_code_for(ConfigurationError("bad key")) == EXIT_USAGE


def test_secure_error_message():
    with pytest.raises(ValidationError) as info:
        Settings(QUAD_MAX_SUBDIV=0)
    assert "QUAD_MAX_SUBDIV" in secure_error_message(info.value)
    assert secure_error_message(PreconditionError("eps out of range", eps=2.0)) == (
        "eps out of range"
    )
    assert PreconditionError("x", eps=2.0).context == {"eps": 2.0}


def test_run_indexed_keeps_order():
    assert run_indexed(_square, [3, 1, 2]) == [9, 1, 4]
    assert run_indexed(_square, [4, 5], workers=2) == [16, 25]
    assert worker_count(8) >= 1


def test_task_streams_are_independent_and_reproducible():
    a = task_rng(7, 0).uniform(size=4)
    assert np.array_equal(a, task_rng(7, 0).uniform(size=4))
    assert not np.array_equal(a, task_rng(7, 1).uniform(size=4))


def test_parse_list():
    assert parse_list("8, 16,32", int, "--N") == [8, 16, 32]
    assert parse_list(None, int, "--N") is None


def test_read_config_file(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("# defaults\nT-Grid = 0.5,1.0  # thresholds\n\n--seed=3\n")
    assert read_config_file(str(path)) == {"t_grid": "0.5,1.0", "seed": "3"}
    path.write_text("= 3\n")
    with pytest.raises(ConfigurationError):
        read_config_file(str(path))


def test_logger_is_shared_per_channel():
    assert get_logger("harness") is get_logger("harness")
    assert get_logger("harness").logger.name == "osc.harness"
