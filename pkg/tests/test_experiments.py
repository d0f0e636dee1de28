"""Tests for the experiment registry and the batch runner."""

import json
from pathlib import Path
from unittest.mock import patch

import pytest

from horseshoe_thermo.config import ExperimentKind, RunConfig
from horseshoe_thermo.countable import Verdict
from horseshoe_thermo.errors import ConfigError, NotFoundError
from horseshoe_thermo.experiments import (
    EXIT_CONFIG,
    EXIT_ERROR,
    EXIT_INCONCLUSIVE,
    EXIT_OK,
    EXPERIMENTS,
    MANIFEST,
    Experiment,
    RunContext,
    run,
)


def _make_config(tmp_path: Path, **fields) -> RunConfig:
    return RunConfig(output_dir=tmp_path / "results", **fields)


def _read_manifest(config: RunConfig) -> dict:
    return json.loads((Path(config.output_dir) / MANIFEST).read_text())


def _patched(runner) -> dict:
    kind = ExperimentKind.ENTROPY
    return {kind: Experiment(kind, "patched", runner)}


class TestRegistry:
    """Test that every experiment kind has a runner."""

    def test_all_kinds_registered(self) -> None:
        assert set(EXPERIMENTS) == set(ExperimentKind)
        assert all(e.description for e in EXPERIMENTS.values())


class TestRun:
    """Test exit codes and the manifest."""

    def test_entropy_experiment(self, tmp_path: Path) -> None:
        config = _make_config(tmp_path, experiment=ExperimentKind.ENTROPY)
        assert run(config) == EXIT_OK
        manifest = _read_manifest(config)
        assert manifest["exit_status"] == EXIT_OK
        assert manifest["error"] is None
        assert manifest["verdicts"] == {
            "count_growth": "HOLDS",
            "fixed_point_exponents": "HOLDS",
            "negative_exponents": "HOLDS",
        }
        assert "entropy.json" in manifest["artifacts"]
        assert manifest["config"]["seed"] == 12345
        for name in manifest["artifacts"]:
            assert (tmp_path / "results" / name).exists()

    def test_entropy_artifacts_are_reproducible(self, tmp_path: Path) -> None:
        first = _make_config(tmp_path / "a")
        second = _make_config(tmp_path / "b")
        run(first)
        run(second)
        for name in ("word_counts.csv", "central_exponents.svg", "entropy.json"):
            a = (Path(first.output_dir) / name).read_bytes()
            b = (Path(second.output_dir) / name).read_bytes()
            assert a == b, name

    def test_inconclusive_exit(self, tmp_path: Path) -> None:
        def runner(ctx: RunContext) -> None:
            ctx.verdict("gap", Verdict.HOLDS)
            ctx.verdict("tail", Verdict.INCONCLUSIVE)

        config = _make_config(tmp_path)
        with patch.dict(EXPERIMENTS, _patched(runner)):
            assert run(config) == EXIT_INCONCLUSIVE
        assert _read_manifest(config)["verdicts"]["tail"] == "INCONCLUSIVE"

    def test_failed_verdict_still_exits_ok(self, tmp_path: Path) -> None:
        def runner(ctx: RunContext) -> None:
            ctx.verdict("gap", Verdict.FAILS)

        with patch.dict(EXPERIMENTS, _patched(runner)):
            assert run(_make_config(tmp_path)) == EXIT_OK

    def test_numerical_error(self, tmp_path: Path) -> None:
        def runner(ctx: RunContext) -> None:
            raise NotFoundError("no crossing")

        config = _make_config(tmp_path)
        with patch.dict(EXPERIMENTS, _patched(runner)):
            assert run(config) == EXIT_ERROR
        manifest = _read_manifest(config)
        assert manifest["error"] == "NotFoundError: no crossing"
        assert manifest["artifacts"] == []

    def test_config_error(self, tmp_path: Path) -> None:
        def runner(ctx: RunContext) -> None:
            raise ConfigError("bad potential")

        config = _make_config(tmp_path)
        with patch.dict(EXPERIMENTS, _patched(runner)):
            assert run(config) == EXIT_CONFIG
        assert _read_manifest(config)["exit_status"] == EXIT_CONFIG

    def test_manifest_unwritable(self, tmp_path: Path) -> None:
        blocker = tmp_path / "blocker"
        blocker.write_text("x")
        config = RunConfig(output_dir=blocker / "results")
        with patch.dict(EXPERIMENTS, _patched(lambda ctx: None)):
            assert run(config) == EXIT_ERROR


class TestEveryExperiment:
    """Run each registered experiment on the default configuration."""

    @pytest.mark.parametrize("kind", list(ExperimentKind), ids=lambda kind: kind.value)
    def test_default_run(self, kind: ExperimentKind, tmp_path: Path) -> None:
        config = _make_config(tmp_path, experiment=kind)
        code = run(config)
        manifest = _read_manifest(config)
        assert set(manifest) == {
            "experiment",
            "config",
            "artifacts",
            "verdicts",
            "summary",
            "exit_status",
            "error",
        }
        assert manifest["experiment"] == kind.value
        assert manifest["error"] is None
        assert manifest["exit_status"] == code
        assert manifest["artifacts"]
        for name in manifest["artifacts"]:
            assert (tmp_path / "results" / name).exists()
        verdicts = set(manifest["verdicts"].values())
        assert verdicts <= {"HOLDS", "FAILS", "INCONCLUSIVE"}
        expected = EXIT_INCONCLUSIVE if "INCONCLUSIVE" in verdicts else EXIT_OK
        assert code == expected
