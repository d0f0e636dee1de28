"""Tests for the command-line entry point."""

from pathlib import Path
from unittest.mock import patch

import pytest

from horseshoe_thermo.config import RunConfig, generate_default_config
from horseshoe_thermo.errors import EscapeError
from horseshoe_thermo.main import main, parse_args


def _exit_code(argv: list[str]) -> int:
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    return excinfo.value.code


class TestParseArgs:
    """Test argument parsing."""

    def test_run_flags(self) -> None:
        args = parse_args(["run", "--seed", "3", "--threads", "2", "--log-level", "DEBUG"])
        assert args.command == "run"
        assert args.seed == 3
        assert args.threads == 2
        assert args.config is None

    def test_command_required(self) -> None:
        with pytest.raises(SystemExit):
            parse_args([])

    def test_rejects_unknown_level(self) -> None:
        with pytest.raises(SystemExit):
            parse_args(["run", "--log-level", "LOUD"])


class TestCommands:
    """Test the non-run subcommands."""

    def test_list_experiments(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert _exit_code(["list-experiments"]) == 0
        out = capsys.readouterr().out
        assert "pressure-curve" in out
        assert "kac-abramov" in out

    def test_generate_config(self, tmp_path: Path) -> None:
        target = tmp_path / "hs.toml"
        assert _exit_code(["generate-config", str(target)]) == 0
        assert target.exists()


class TestRunCommand:
    """Test overrides and exit codes of `run`."""

    @pytest.fixture
    def config_file(self, tmp_path: Path) -> Path:
        return generate_default_config(tmp_path / "hs.toml")

    def test_overrides_reach_runner(self, config_file: Path, tmp_path: Path) -> None:
        out = tmp_path / "out"
        argv = ["run", "--config", str(config_file), "--out", str(out), "--seed", "9"]
        with patch("horseshoe_thermo.main.run", return_value=0) as mock_run:
            assert _exit_code(argv) == 0
        config: RunConfig = mock_run.call_args.args[0]
        assert config.seed == 9
        assert config.output_dir == out
        assert config.threads == 1

    def test_runner_code_is_exit_code(self, config_file: Path) -> None:
        with patch("horseshoe_thermo.main.run", return_value=2):
            assert _exit_code(["run", "--config", str(config_file)]) == 2

    def test_numerical_error_exits_one(self, config_file: Path) -> None:
        with patch("horseshoe_thermo.main.run", side_effect=EscapeError("left", index=4)):
            assert _exit_code(["run", "--config", str(config_file)]) == 1

    def test_missing_config_exits_three(self, tmp_path: Path) -> None:
        with patch("horseshoe_thermo.main.run") as mock_run:
            assert _exit_code(["run", "--config", str(tmp_path / "absent.toml")]) == 3
        mock_run.assert_not_called()

    def test_bad_override_exits_three(self, config_file: Path) -> None:
        with patch("horseshoe_thermo.main.run") as mock_run:
            assert _exit_code(["run", "--config", str(config_file), "--threads", "0"]) == 3
        mock_run.assert_not_called()
