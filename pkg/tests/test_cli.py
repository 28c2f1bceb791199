import json

import pytest

from app import cli
from app.experiments.report import Criterion, SimulationReport

SMALL_SIMULATE = "eps_list = 0.1\nT0 = 0.1\ndt = 0.05\nobserver_interval = 0.5\nworkers = 1\n"


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "simulate.conf"
    path.write_text(SMALL_SIMULATE, encoding="utf-8")
    return path


def test_parser_knows_every_command():
    parser = cli.build_parser()
    for command in cli.COMMANDS:
        args = parser.parse_args([command, "--eps", "0.1"])
        assert args.command == command and args.eps == "0.1"
    with pytest.raises(SystemExit):
        parser.parse_args(["unknown"])


def test_missing_config_is_an_error(tmp_path):
    assert cli.main(["simulate", "--config", str(tmp_path / "absent.conf")]) == cli.EXIT_ERROR


def test_bad_eps_is_an_error(small_config):
    assert cli.main(["simulate", "--config", str(small_config), "--eps", "0.1,0.2"]) == cli.EXIT_ERROR
    assert cli.main(["simulate", "--config", str(small_config), "--eps", "abc"]) == cli.EXIT_ERROR


def test_simulate_writes_its_runlog(small_config, tmp_path):
    out = tmp_path / "results"
    assert cli.main(["simulate", "--config", str(small_config), "--out", str(out)]) == cli.EXIT_OK
    data = json.loads((out / "runlog.json").read_text(encoding="utf-8"))
    assert data["experiment"] == "simulate"
    assert data["passed"] is True
    assert data["metadata"]["config"]["output_dir"] == str(out)


def test_failed_criterion_exits_with_one(small_config, tmp_path, monkeypatch):
    class _Failing:
        def run(self):
            return SimulationReport("simulate", {}, [Criterion("always", False, 1.0, "< 0")])

    monkeypatch.setattr(cli, "create_experiment", lambda config: _Failing())
    code = cli.main(["simulate", "--config", str(small_config), "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_FAILED
    assert (tmp_path / "out" / "runlog.json").exists()


def test_validate_nls_is_deterministic(tmp_path):
    config = tmp_path / "validity.conf"
    config.write_text("eps_list = 0.2,0.1\nT0 = 0.02\ndt = 0.05\nworkers = 1\nseed = 7\n", encoding="utf-8")
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        cli.main(["validate-nls", "--config", str(config), "--out", str(out)])
        outputs.append(out)
    first, second = outputs
    assert (first / "nls_validity.csv").read_bytes() == (second / "nls_validity.csv").read_bytes()

    def stable(path):
        data = json.loads(path.read_text(encoding="utf-8"))
        data["metadata"].pop("wall_time")
        data["metadata"]["config"].pop("output_dir")
        return data

    assert stable(first / "nls_validity.json") == stable(second / "nls_validity.json")
