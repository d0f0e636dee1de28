"""Tests for configuration loading and validation."""

import json
from pathlib import Path
from unittest.mock import patch

import pytest
from pydantic import ValidationError

from horseshoe_thermo.config import (
    ExperimentKind,
    InducingParams,
    MapParams,
    RunConfig,
    ScanConfig,
    generate_default_config,
    load_config,
)
from horseshoe_thermo.errors import ConfigError


class TestModels:
    """Test field ranges and cross-field validators."""

    def test_defaults(self) -> None:
        config = RunConfig()
        assert config.map_params.alpha == pytest.approx(1.0 / 0.3)
        assert config.experiment is ExperimentKind.ENTROPY
        assert config.seed == 12345

    def test_map_params_ranges(self) -> None:
        with pytest.raises(ValidationError):
            MapParams(lambda0=0.5)
        with pytest.raises(ValidationError):
            MapParams(beta1=4.0)

    def test_tau_below_alpha(self) -> None:
        with pytest.raises(ValidationError):
            InducingParams(alpha=0.4, tau=0.4)

    def test_short_block_cutoff(self, inducing: InducingParams) -> None:
        assert inducing.N == 5
        assert InducingParams(alpha=0.5, tau=0.3).N == 5

    @pytest.mark.parametrize(
        "fields",
        [{"t_min": 1.0, "t_max": 1.0}, {"peak": 0.0, "floor": 0.0}, {"block_lengths": [13]}],
    )
    def test_scan_validators(self, fields: dict) -> None:
        with pytest.raises(ValidationError):
            ScanConfig(**fields)

    def test_map_params_are_hashable(self, params: MapParams) -> None:
        assert hash(params) == hash(MapParams())


class TestLoadConfig:
    """Test file discovery and error reporting."""

    def test_defaults_without_file(self) -> None:
        with patch("horseshoe_thermo.config._find_config_file", return_value=None):
            assert load_config() == RunConfig()

    def test_missing_explicit_path(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.toml")

    def test_json(self, tmp_path: Path) -> None:
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"experiment": "gibbs", "truncations": {"K": 12}}))
        config = load_config(path)
        assert config.experiment is ExperimentKind.GIBBS
        assert config.truncations.K == 12

    def test_nested_potential(self, tmp_path: Path) -> None:
        path = tmp_path / "c.toml"
        path.write_text(
            '[potential]\nkind = "scaled"\nt = 2.0\n[potential.base]\nkind = "central"\n'
        )
        config = load_config(path)
        assert config.potential.base is not None
        assert config.potential.base.kind == "central"

    def test_pyproject_section(self, tmp_path: Path) -> None:
        path = tmp_path / "pyproject.toml"
        path.write_text('[project]\nname = "x"\n[tool.horseshoe-thermo]\nseed = 7\n')
        assert load_config(path).seed == 7

    def test_invalid_json(self, tmp_path: Path) -> None:
        path = tmp_path / "c.json"
        path.write_text("{seed: 1}")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_config(path)

    def test_invalid_toml(self, tmp_path: Path) -> None:
        path = tmp_path / "c.toml"
        path.write_text("seed = = 1")
        with pytest.raises(ConfigError, match="invalid TOML"):
            load_config(path)

    def test_out_of_range_names_field(self, tmp_path: Path) -> None:
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"map_params": {"lambda0": 0.5}}))
        with pytest.raises(ConfigError, match="map_params.lambda0"):
            load_config(path)

    def test_unknown_key(self, tmp_path: Path) -> None:
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"sede": 1}))
        with pytest.raises(ConfigError):
            load_config(path)

    def test_top_level_must_be_object(self, tmp_path: Path) -> None:
        path = tmp_path / "c.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            load_config(path)


class TestGenerateConfig:
    """Test the documented default files."""

    @pytest.mark.parametrize("name", ["config.toml", "config.json"])
    def test_generated_file_loads_back(self, tmp_path: Path, name: str) -> None:
        path = generate_default_config(tmp_path / "sub" / name)
        assert path.exists()
        assert load_config(path) == RunConfig()
