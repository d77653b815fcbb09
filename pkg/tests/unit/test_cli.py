"""
Unit tests for the command line interface
"""

import json

import pytest

from star_secrecy.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from star_secrecy.models.experiment import ExperimentKind, ExperimentRecord
from star_secrecy.models.system import SecrecyReport
from star_secrecy.sca.two_layer import InfeasibleError

pytestmark = pytest.mark.unit


def sample_records():
    return [
        ExperimentRecord(scheme="star-noma", x=10.0, metric="secrecy_capacity", mean=2.5, std=0.25,
                         trials=3, infeasible=0, seed=5),
        ExperimentRecord(scheme="random-phase", x=10.0, metric="secrecy_capacity", mean=1.0, std=0.5,
                         trials=3, infeasible=1, seed=5),
    ]


class TestExperimentCommands:
    """Test cases for the experiment subcommands"""

    def test_writes_records(self, config_file, tmp_path, mocker, capsys):
        run = mocker.patch("star_secrecy.cli.run_experiment", return_value=sample_records())
        out_dir = tmp_path / "results"
        code = main(["--config", str(config_file), "sweep-power", "--seed", "11", "--out", str(out_dir)])

        assert code == EXIT_OK
        spec = run.call_args.args[0]
        assert spec.experiment is ExperimentKind.SWEEP_POWER
        assert spec.seed == 11
        assert spec.trials == 3
        assert (out_dir / "sweep-power.csv").exists()
        assert (out_dir / "sweep-power.json").exists()
        output = capsys.readouterr().out
        assert "x=10 secrecy_capacity:" in output
        assert "random-phase=1±0.5 (1 infeasible)" in output

    def test_overrides_reach_spec(self, config_file, tmp_path, mocker):
        run = mocker.patch("star_secrecy.cli.run_experiment", return_value=[])
        code = main(["--config", str(config_file), "sweep-elements", "--out", str(tmp_path),
                     "--override", "radio.num_bs_antennas=3", "--trials", "2", "--workers", "1"])
        assert code == EXIT_OK
        spec = run.call_args.args[0]
        assert spec.radio.num_bs_antennas == 3
        assert spec.trials == 2
        assert spec.workers == 1

    def test_missing_config(self, tmp_path, capsys):
        path = tmp_path / "absent.yaml"
        code = main(["--config", str(path), "sweep-power"])
        assert code == EXIT_CONFIG
        assert str(path) in capsys.readouterr().err

    def test_unknown_override(self, config_file, tmp_path, mocker):
        run = mocker.patch("star_secrecy.cli.run_experiment")
        code = main(["--config", str(config_file), "placement", "--out", str(tmp_path),
                     "--override", "radio.colour=red"])
        assert code == EXIT_CONFIG
        run.assert_not_called()

    def test_unknown_command(self):
        assert main(["sweep-everything"]) == 2

    def test_invalid_option_value(self):
        assert main(["sweep-power", "--trials", "0"]) == 2

    def test_runtime_error(self, config_file, tmp_path, mocker, capsys):
        mocker.patch("star_secrecy.cli.run_experiment", side_effect=InfeasibleError("no feasible point"))
        code = main(["--config", str(config_file), "sweep-power", "--out", str(tmp_path)])
        assert code == EXIT_RUNTIME
        assert "no feasible point" in capsys.readouterr().err


class TestSolveOne:
    """Test cases for the solve-one subcommand"""

    def test_prints_report(self, config_file, mocker, capsys):
        report = SecrecyReport(sinr_iu=3.0, sinr_ou=1.0, eve_snr_iu=0.5, eve_snr_ou=0.25,
                               secrecy_iu=1.0, secrecy_ou=0.5, p_iu=0.01, p_ou=0.02, order="iu-first")
        solve = mocker.patch("star_secrecy.cli.solve_one", return_value=report)
        code = main(["--config", str(config_file), "solve-one", "--trial", "4", "--seed", "2"])

        assert code == EXIT_OK
        spec, trial = solve.call_args.args
        assert trial == 4
        assert spec.seed == 2
        assert spec.experiment is ExperimentKind.SOLVE_ONE
        printed = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert printed["order"] == "iu-first"
        assert printed["secrecy_ou"] == 0.5
