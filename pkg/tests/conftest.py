"""Shared fixtures: the standard horseshoe constants and inducing thresholds."""

import pytest

from horseshoe_thermo.config import HypTimeParams, InducingParams, MapParams


@pytest.fixture
def params() -> MapParams:
    return MapParams(lambda0=0.3, beta0=7.0, sigma=0.25, beta1=3.5)


@pytest.fixture
def inducing() -> InducingParams:
    return InducingParams(alpha=0.4, tau=0.2)


@pytest.fixture
def hyp() -> HypTimeParams:
    return HypTimeParams()
