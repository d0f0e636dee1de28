"""Configuration management using Pydantic models.

All tunable parameters of the horseshoe family, the inducing scheme and the
numerical truncations live here. Supports loading from a JSON or TOML file
and generating a documented default config.
"""

import json
import logging
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from horseshoe_thermo.errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
    from enum import StrEnum
else:  # pragma: no cover - backports for Python 3.10
    from enum import Enum

    import tomli as tomllib

    class StrEnum(str, Enum):
        def __str__(self) -> str:
            return str.__str__(self)

        __format__ = str.__format__

logger = logging.getLogger(__name__)

# XDG config directory
_XDG_CONFIG_HOME = Path(os.environ.get("XDG_CONFIG_HOME", Path.home() / ".config"))
CONFIG_DIR = _XDG_CONFIG_HOME / "horseshoe-thermo"
CONFIG_FILENAME = "config.toml"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MapParams(_Section):
    """The four constants of the horseshoe F.

    Frozen so a parameter set can key the block-model caches.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    lambda0: float = Field(default=0.3, gt=0.0, lt=1.0 / 3.0, description="Stable contraction")
    beta0: float = Field(default=7.0, gt=6.0, description="Unstable expansion on R0")
    sigma: float = Field(default=0.25, gt=0.0, lt=1.0 / 3.0, description="Central slope on R1")
    beta1: float = Field(default=3.5, gt=3.0, lt=4.0, description="Unstable expansion on R1")

    @property
    def alpha(self) -> float:
        """Horizontal expansion of G, 1/lambda0."""
        return 1.0 / self.lambda0


class InducingParams(_Section):
    """Frequency threshold of the α-return inducing scheme."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    alpha: float = Field(
        default=0.4, gt=0.0, lt=2.0 / 3.0, description="1-frequency threshold of the return time"
    )
    tau: float = Field(default=0.2, gt=0.0, description="Short-block frequency bound, below alpha")

    @model_validator(mode="after")
    def _tau_below_alpha(self) -> "InducingParams":
        if self.tau >= self.alpha:
            raise ValueError(f"tau ({self.tau}) must be smaller than alpha ({self.alpha})")
        return self

    @property
    def N(self) -> int:
        """Short-block cutoff ⌊1/(alpha − tau)⌋, computed on exact decimal rationals."""
        gap = Fraction(repr(self.alpha)) - Fraction(repr(self.tau))
        return math.floor(1 / gap)


class HypTimeParams(_Section):
    """Hyperbolic-time detection settings for G."""

    sigma_h: float = Field(
        default=1.0 / 3.0, gt=0.0, lt=1.0, description="Required backward contraction rate"
    )
    eps_ball: float = Field(
        default=1e-3, gt=0.0, description="Reference ball radius, used for boundary exclusion"
    )


class Truncations(_Section):
    """Alphabet, block and orbit truncations."""

    K: int = Field(default=8, ge=2, le=24, description="Highest inducing level kept in S_K")
    L: int = Field(default=8, ge=2, le=12, description="Block length of Markov approximations")
    n_max: int = Field(default=200, ge=1, description="Orbit length for periodic sums")
    depth: int = Field(default=8, ge=1, description="Tail padding in inducing symbols")
    samples: int = Field(default=200, ge=1, description="Monte-Carlo / tail samples")
    enumeration_cap: int = Field(default=24, ge=3, le=30, description="Largest level enumerated")


class ScanConfig(_Section):
    """Parameter sweeps and the admissible-family constants."""

    t_min: float = Field(default=0.0, description="Left end of the t grid")
    t_max: float = Field(default=2.0, description="Right end of the t grid")
    t_steps: int = Field(default=41, ge=2, description="Number of grid points")
    block_lengths: list[int] = Field(
        default=[6, 8, 10], description="Block lengths compared by the phase scan"
    )
    c0: float = Field(default=0.84, gt=5.0 / 6.0, lt=1.0, description="Plateau edge in z")
    peak: float = Field(default=1.0, description="Value of the family on the plateau")
    floor: float = Field(default=0.0, description="Value of the family at z = 1")
    xi: float = Field(default=0.5, gt=0.0, le=1.0, description="Hölder exponent of the family")
    family_t: float = Field(default=0.5, gt=0.0, description="t at which the family is checked")

    @model_validator(mode="after")
    def _ordered(self) -> "ScanConfig":
        if self.t_max <= self.t_min:
            raise ValueError("t_max must exceed t_min")
        if self.peak <= self.floor:
            raise ValueError("peak must exceed floor")
        if any(not 2 <= L <= 12 for L in self.block_lengths):
            raise ValueError("block_lengths must lie in [2, 12]")
        return self


class PotentialConfig(_Section):
    """Declarative potential description, composed recursively through base/u/v."""

    kind: Literal[
        "constant",
        "central",
        "example",
        "scaled",
        "projective",
        "coboundary-shift",
        "distance-weight",
    ] = "central"
    value: float = Field(default=0.0, description="Constant value (kind=constant)")
    t: float = Field(default=1.0, description="Scale, shift or weight parameter")
    c0: float = Field(default=0.84, gt=5.0 / 6.0, lt=1.0, description="kind=example")
    peak: float = Field(default=1.0, description="kind=example")
    floor: float = Field(default=0.0, description="kind=example")
    xi: float = Field(default=0.5, gt=0.0, le=1.0, description="kind=example")
    dynamics: Literal["F_inv", "G"] = Field(default="F_inv", description="kind=coboundary-shift")
    cloud_period: int = Field(
        default=6, ge=1, le=12, description="kind=distance-weight: periodic points up to period"
    )
    base: "PotentialConfig | None" = None
    u: "PotentialConfig | None" = None
    v: "PotentialConfig | None" = None


class ExperimentKind(StrEnum):
    """Experiments runnable from the CLI."""

    PRESSURE_CURVE = "pressure-curve"
    PHASE_SCAN = "phase-scan"
    INDUCE_STATS = "induce-stats"
    GIBBS = "gibbs"
    ADMISSIBLE_CHECK = "admissible-check"
    PROJECTIVE_CHECK = "projective-check"
    HYP_TIMES = "hyp-times"
    ENTROPY = "entropy"
    SEMICONJUGACY_TEST = "semiconjugacy-test"
    KAC_ABRAMOV = "kac-abramov"


class RunConfig(_Section):
    """Top-level run configuration."""

    map_params: MapParams = Field(default_factory=MapParams)
    inducing: InducingParams = Field(default_factory=InducingParams)
    hyperbolic_times: HypTimeParams = Field(default_factory=HypTimeParams)
    potential: PotentialConfig = Field(default_factory=PotentialConfig)
    experiment: ExperimentKind = ExperimentKind.ENTROPY
    truncations: Truncations = Field(default_factory=Truncations)
    scan: ScanConfig = Field(default_factory=ScanConfig)
    seed: int = Field(default=12345, ge=0, description="Master seed for all sampling")
    output_dir: Path = Field(default=Path("results"), description="Artifact directory")
    threads: int = Field(default=1, ge=1, le=64, description="Worker threads for sweeps")
    log_level: str = Field(default="INFO", description="Logging level")


def _find_config_file() -> Path | None:
    """Search for a config file in standard locations.

    Search order:
        1. ./horseshoe-thermo.json
        2. ./horseshoe-thermo.toml
        3. $XDG_CONFIG_HOME/horseshoe-thermo/config.toml

    Returns:
        Path to the first config file found, or None.
    """
    candidates = [
        Path.cwd() / "horseshoe-thermo.json",
        Path.cwd() / "horseshoe-thermo.toml",
        CONFIG_DIR / CONFIG_FILENAME,
    ]
    for path in candidates:
        if path.is_file():
            return path
    return None


def _read_raw(config_path: Path) -> dict:
    """Parse a JSON or TOML file into a plain dict, raising ConfigError on syntax errors."""
    try:
        text = config_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{config_path}: cannot read config ({exc})") from exc

    if config_path.suffix.lower() == ".toml":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{config_path}: invalid TOML: {exc}") from exc
        # Support [tool.horseshoe-thermo] section in pyproject.toml
        if "tool" in data and "horseshoe-thermo" in data["tool"]:
            data = data["tool"]["horseshoe-thermo"]
        return data

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{config_path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{config_path}: top-level JSON value must be an object")
    return data


def _describe_validation(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        field = ".".join(str(loc) for loc in err["loc"]) or "<root>"
        parts.append(f"{field}: {err['msg']}")
    return "; ".join(parts)


def load_config(config_path: Path | None = None) -> RunConfig:
    """Load configuration from a JSON/TOML file or use defaults.

    If no explicit path is given, searches standard locations automatically.

    Args:
        config_path: Optional path to a config file. The suffix selects the parser.

    Returns:
        Validated RunConfig instance.

    Raises:
        ConfigError: If the file is missing, malformed, or fails validation.
    """
    explicit = config_path is not None
    if config_path is None:
        config_path = _find_config_file()

    if config_path is None:
        logger.info("Using default configuration")
        return RunConfig()

    if explicit and not config_path.exists():
        raise ConfigError(f"{config_path}: config file not found")

    data = _read_raw(config_path)
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{config_path}: {_describe_validation(exc)}") from exc

    logger.info("Loaded config from %s", config_path)
    return config


# ── Default config TOML template ──

_DEFAULT_CONFIG_TOML = '''\
# ============================================================================
# horseshoe-thermo configuration file
# ============================================================================
#
# Searched in order when no --config is given:
#
#   1. ./horseshoe-thermo.json
#   2. ./horseshoe-thermo.toml
#   3. ~/.config/horseshoe-thermo/config.toml
#
# JSON files with the same keys are accepted as well. Unknown keys are errors.
# ============================================================================

# Which experiment `horseshoe-thermo run` executes. One of:
#   pressure-curve, phase-scan, induce-stats, gibbs, admissible-check,
#   projective-check, hyp-times, entropy, semiconjugacy-test, kac-abramov
experiment = "entropy"

# Master seed. Every Monte-Carlo stream is derived from it deterministically.
seed = 12345

# Where CSV/JSON/SVG artifacts and manifest.json are written.
output_dir = "results"

# Worker threads for parameter sweeps (results are merged in grid order).
threads = 1

# Logging level: DEBUG, INFO, WARNING, ERROR
log_level = "INFO"


# ── Horseshoe constants ────────────────────────────────────────────────────
[map_params]
# 0 < lambda0 < 1/3, beta0 > 6, 0 < sigma < 1/3, 3 < beta1 < 4
lambda0 = 0.3
beta0 = 7.0
sigma = 0.25
beta1 = 3.5


# ── Inducing scheme ────────────────────────────────────────────────────────
[inducing]
# Return when the 1-frequency strictly exceeds alpha. 0 < tau < alpha < 2/3.
alpha = 0.4
tau = 0.2


# ── Hyperbolic times of G ──────────────────────────────────────────────────
[hyperbolic_times]
sigma_h = 0.3333333333333333
eps_ball = 0.001


# ── Truncations ────────────────────────────────────────────────────────────
[truncations]
# Highest inducing level kept in the countable alphabet (2..24)
K = 8
# Block length of the Markov approximations (2..12)
L = 8
# Orbit length for periodic sums
n_max = 200
# Tail padding (in inducing symbols) for induced potentials
depth = 8
# Monte-Carlo and tail samples
samples = 200
enumeration_cap = 24


# ── Sweeps and the admissible family ───────────────────────────────────────
[scan]
t_min = 0.0
t_max = 2.0
t_steps = 41
block_lengths = [6, 8, 10]
c0 = 0.84
peak = 1.0
floor = 0.0
xi = 0.5
family_t = 0.5


# ── Potential ──────────────────────────────────────────────────────────────
# kind: constant | central | example | scaled | projective |
#       coboundary-shift | distance-weight
# Composite kinds take nested [potential.base] / [potential.u] / [potential.v].
[potential]
kind = "central"
t = 1.0
'''


def generate_default_config(output_path: Path | None = None) -> Path:
    """Write the default config file.

    A ``.json`` path receives the JSON dump of the defaults; anything else gets
    the documented TOML template.

    Args:
        output_path: Where to write. Defaults to the XDG config dir.

    Returns:
        Path where the file was written.
    """
    if output_path is None:
        output_path = CONFIG_DIR / CONFIG_FILENAME

    output_path.parent.mkdir(parents=True, exist_ok=True)
    if output_path.suffix.lower() == ".json":
        payload = RunConfig().model_dump(mode="json")
        output_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8")
    else:
        output_path.write_text(_DEFAULT_CONFIG_TOML, encoding="utf-8")
    return output_path
