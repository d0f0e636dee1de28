"""Tests for potential constructors and their transforms."""

import math
from dataclasses import replace
from unittest.mock import patch

import numpy as np
import pytest

from horseshoe_thermo.config import MapParams, PotentialConfig
from horseshoe_thermo.errors import PreconditionError, RangeError
from horseshoe_thermo.maps import P, Q, Point3, flow_map, in_planar_domain
from horseshoe_thermo.potentials import (
    PLANAR,
    PotentialSpec,
    add,
    add_constant,
    birkhoff_average_potential,
    build_potential,
    central_potential,
    cohomology_shift,
    constant_potential,
    coordinate_potential,
    distance_weight,
    example_potential,
    holder_pad,
    holder_spot_check,
    planar_grid,
    projective_example,
    scaled,
    step_potential,
    verify_holder,
)
from horseshoe_thermo.symbolic import periodic_cycles, periodic_orbit

PARAMS = MapParams()


def _make_cloud(max_period: int = 4) -> np.ndarray:
    return np.vstack([periodic_orbit(c, PARAMS) for c in periodic_cycles(max_period)])


class TestBasicPotentials:
    """Test constant, central, coordinate and step potentials."""

    def test_constant(self) -> None:
        phi = constant_potential(2.5)
        assert phi(Q) == 2.5
        assert phi.bounds == (2.5, 2.5)
        assert phi.depends_on == (False, False, False)

    def test_central_at_fixed_points(self) -> None:
        phi = central_potential(PARAMS)
        assert phi(Q) == pytest.approx(1.0)
        assert phi(P) == pytest.approx(-1.0)
        assert phi(Point3(0.3, 0.3, 0.9)) == pytest.approx(math.log(0.25))
        assert phi.bounds == pytest.approx((math.log(0.25), 1.0))

    def test_negative_scale_swaps_bounds(self) -> None:
        phi = scaled(central_potential(PARAMS), -2.0)
        assert phi.bounds == pytest.approx((-2.0, -2.0 * math.log(0.25)))
        assert phi(Q) == pytest.approx(-2.0)

    def test_add_and_shift(self) -> None:
        phi = add(coordinate_potential((1.0, 0.0, 0.0)), constant_potential(1.0))
        assert phi(Point3(0.25, 0.5, 0.0)) == pytest.approx(1.25)
        assert phi.bounds == (1.0, 2.0)
        assert add_constant(phi, -1.0).bounds == (0.0, 1.0)

    def test_step_is_not_holder(self) -> None:
        phi = step_potential()
        assert not phi.is_holder
        assert holder_pad(phi, np.ones((1, 3))) == math.inf

    def test_holder_pad(self) -> None:
        phi = coordinate_potential((1.0, 0.0, 0.0))
        assert holder_pad(phi, np.array([[0.1, 0.2, 0.3]])) == pytest.approx(0.1)
        assert holder_pad(constant_potential(1.0), np.ones((2, 3))) == 0.0


class TestPlateau:
    """Test the plateau family that peaks at Q."""

    def test_shape(self) -> None:
        phi = example_potential(0.84, 1.0, 0.0, 0.5)
        assert phi(Q) == 1.0
        assert phi(Point3(0.4, 0.4, 0.84)) == 1.0
        assert phi(Point3(0.4, 0.4, 1.0)) == pytest.approx(0.0)
        assert 0.0 < phi(Point3(0.4, 0.4, 0.92)) < 1.0
        assert phi.bounds == (0.0, 1.0)

    def test_holder_constant(self) -> None:
        phi = example_potential(0.84, 1.0, 0.0, 0.5)
        assert phi.holder_constant == pytest.approx(1.0 / math.sqrt(0.16))

    @pytest.mark.parametrize(
        ("c0", "peak", "floor", "xi"),
        [(0.8, 1.0, 0.0, 0.5), (0.9, 0.0, 1.0, 0.5), (0.9, 1.0, 0.0, 1.5)],
    )
    def test_rejects(self, c0: float, peak: float, floor: float, xi: float) -> None:
        with pytest.raises(RangeError):
            example_potential(c0, peak, floor, xi)


class TestProjective:
    """Test v − u∘G on the planar rectangles."""

    def test_grid_lies_in_planar_domain(self) -> None:
        pts = planar_grid(PARAMS, 5)
        assert pts.shape == (75, 3)
        assert in_planar_domain(pts, PARAMS).all()

    def test_value_and_notes(self) -> None:
        u = coordinate_potential((0.0, 0.8, 0.0))
        v = add_constant(u, 0.1)
        phi = projective_example(u, v, PARAMS)
        assert phi.domain == PLANAR
        assert phi(Q) == pytest.approx(0.1)
        assert phi.notes["min_v_minus_u"] == pytest.approx(0.1)
        assert phi.notes["oscillation_u"] == pytest.approx(0.8)

    def test_read_through_projection(self) -> None:
        u = coordinate_potential((0.0, 0.8, 0.0))
        phi = projective_example(u, add_constant(u, 0.1), PARAMS)
        # π collapses z, so both points see the same planar value
        a = phi.on_horseshoe(np.array([[0.1, 0.5, 0.05]]))
        b = phi.on_horseshoe(np.array([[0.1, 0.5, 0.0]]))
        assert a == pytest.approx(b)

    def test_v_must_dominate_u(self) -> None:
        u = coordinate_potential((0.0, 0.8, 0.0))
        with pytest.raises(PreconditionError):
            projective_example(u, add_constant(u, -0.1), PARAMS)


class TestTransforms:
    """Test coboundary shifts, Birkhoff averages and distance weights."""

    @pytest.mark.parametrize("cycle", ["0", "01", "001", "00101"])
    def test_shift_preserves_periodic_sums(self, cycle: str) -> None:
        phi = coordinate_potential((0.3, 0.7, 0.2))
        shifted = cohomology_shift(phi, 0.6, "F_inv", PARAMS)
        orbit = periodic_orbit(cycle, PARAMS)
        assert shifted.values(orbit).sum() == pytest.approx(phi.values(orbit).sum(), abs=1e-9)

    def test_shift_identity_and_rejects(self) -> None:
        phi = constant_potential(1.0)
        assert cohomology_shift(phi, 0.0, "G", PARAMS) is phi
        with pytest.raises(RangeError):
            cohomology_shift(phi, 0.5, "H", PARAMS)

    def test_birkhoff_average(self) -> None:
        phi = coordinate_potential((0.0, 1.0, 0.0))
        avg = birkhoff_average_potential(phi, 2, PARAMS)
        p = Point3(0.5, 0.5, 0.1)
        assert avg(p) == pytest.approx((0.5 + flow_map(0.5, 1)) / 2.0)
        assert birkhoff_average_potential(phi, 1, PARAMS) is phi
        with pytest.raises(RangeError):
            birkhoff_average_potential(phi, 0, PARAMS)

    def test_distance_weight_agrees_on_cloud(self) -> None:
        cloud = _make_cloud()
        phi = coordinate_potential((0.0, 1.0, 0.0))
        weighted = distance_weight(phi, cloud, 2.0)
        assert np.allclose(weighted.values(cloud), phi.values(cloud))
        assert weighted.notes["cloud_size"] == len(cloud)

    def test_distance_weight_rejects(self) -> None:
        cloud = _make_cloud()
        with pytest.raises(PreconditionError):
            distance_weight(constant_potential(1.0), cloud, 0.5)
        with pytest.raises(PreconditionError):
            distance_weight(constant_potential(1.0), np.empty((0, 3)), 0.5)


class TestBuildPotential:
    """Test the config factory."""

    def test_central(self) -> None:
        phi = build_potential(PotentialConfig(kind="central", t=0.5), PARAMS)
        assert phi(Q) == pytest.approx(0.5)

    def test_nested_scaled(self) -> None:
        config = PotentialConfig(kind="scaled", t=2.0, base=PotentialConfig(kind="central"))
        assert build_potential(config, PARAMS)(Q) == pytest.approx(2.0)

    def test_missing_parts(self) -> None:
        with pytest.raises(PreconditionError):
            build_potential(PotentialConfig(kind="projective"), PARAMS)
        with pytest.raises(PreconditionError):
            build_potential(PotentialConfig(kind="scaled"), PARAMS)


def _make_weighted(bounded: bool = True) -> PotentialSpec:
    phi = add_constant(coordinate_potential((0.0, 0.0, 1.0)), 100.0)
    if not bounded:
        phi = replace(phi, bounds=None)
    return distance_weight(phi, _make_cloud(6), -0.5)


def _make_projective() -> PotentialSpec:
    u = coordinate_potential((0.0, 1.0, 0.0))
    return projective_example(u, add_constant(u, 0.1), PARAMS)


SPOT_CHECKED = [
    pytest.param(lambda: central_potential(PARAMS), id="central"),
    pytest.param(lambda: coordinate_potential((0.2, -0.5, 1.0)), id="linear"),
    pytest.param(lambda: example_potential(0.84, 1.0, 0.0, 0.5), id="plateau"),
    pytest.param(_make_weighted, id="weighted"),
    pytest.param(lambda: _make_weighted(bounded=False), id="weighted-unbounded"),
    pytest.param(_make_projective, id="projective"),
    pytest.param(
        lambda: cohomology_shift(coordinate_potential((0.3, 0.7, 0.2)), 0.6, "F_inv", PARAMS),
        id="shift-F_inv",
    ),
    pytest.param(
        lambda: cohomology_shift(coordinate_potential((0.3, 0.7, 0.2)), 0.6, "G", PARAMS),
        id="shift-G",
    ),
    pytest.param(
        lambda: birkhoff_average_potential(coordinate_potential((0.0, 1.0, 1.0)), 3, PARAMS),
        id="average",
    ),
]


class TestHolderConstants:
    """Test declared Hölder constants against sampled quotients."""

    @pytest.mark.parametrize("build", SPOT_CHECKED)
    def test_declared_constant_covers_samples(self, build) -> None:
        phi = build()
        check = holder_spot_check(phi, np.random.default_rng(7), pairs=2000)
        assert check.within_tolerance, (phi.label, check.max_quotient, check.declared)
        assert check.pairs > 0

    def test_weight_counts_potential_size(self) -> None:
        # C·(1 + |t|·3) + |t|·sup|φ| with C = 1, t = −0.5, sup|φ| = 101
        assert _make_weighted().holder_constant == pytest.approx(53.0)

    def test_projective_uses_height_stretch(self) -> None:
        phi = _make_projective()
        assert phi.holder_constant == pytest.approx(1.0 + 1.0 / PARAMS.sigma)
        check = holder_spot_check(phi, np.random.default_rng(1), pairs=3000)
        assert check.max_quotient > 4.5
        assert check.within_tolerance

    def test_planar_samples_stay_planar(self) -> None:
        phi = _make_projective()
        assert phi.boxes.shape == (3, 2, 3)
        assert in_planar_domain(phi.boxes[:, 0], PARAMS).all()

    def test_under_declared_constant_is_rejected(self) -> None:
        phi = replace(coordinate_potential((0.0, 1.0, 0.0)), holder_constant=0.1)
        assert not holder_spot_check(phi, np.random.default_rng(0)).within_tolerance
        with pytest.raises(PreconditionError):
            verify_holder(phi)

    def test_non_holder_passes_through(self) -> None:
        phi = step_potential()
        assert verify_holder(phi) is phi

    def test_build_checks_every_level(self) -> None:
        config = PotentialConfig(kind="scaled", t=2.0, base=PotentialConfig(kind="central"))
        with patch("horseshoe_thermo.potentials.verify_holder", wraps=verify_holder) as mock_verify:
            build_potential(config, PARAMS)
        assert mock_verify.call_count == 2
