"""Tests for the tower, induced potentials, liftability and Kač–Abramov."""

import math

import numpy as np
import pytest

from horseshoe_thermo.config import MapParams
from horseshoe_thermo.errors import DegenerateError, PreconditionError, RangeError
from horseshoe_thermo.inducing import (
    FiniteShiftMeasure,
    block_entropy_rate,
    build_induced_table,
    build_tower,
    e_of,
    induced_potential,
    kac_abramov_check,
    lift_measure,
    liftability_check,
    liftability_scan,
    one_position_bound,
    periodic_induced_sum,
)
from horseshoe_thermo.potentials import (
    PotentialSpec,
    central_potential,
    constant_potential,
    coordinate_potential,
)
from horseshoe_thermo.symbolic import CylinderId, alphabet, enumerate_level, level_counts

PARAMS = MapParams()
ALPHA = 0.4
D3 = CylinderId(3, "101")
D4 = CylinderId(4, "1001")


class TestShiftMeasure:
    """Test Bernoulli measures on the induced alphabet."""

    def test_point_mass_lifts_to_two_floors(self) -> None:
        lifted = lift_measure(FiniteShiftMeasure.point_mass(D3))
        assert [mass for _, _, mass in lifted.floors] == [0.5, 0.5]
        assert lifted.integral_tau == 2.0
        assert lifted.total_mass == pytest.approx(1.0)

    def test_uniform_on_two_levels(self) -> None:
        nu = FiniteShiftMeasure.uniform([D3, D4])
        assert nu.integral_tau() == pytest.approx(2.5)
        assert nu.entropy() == pytest.approx(math.log(2.0))
        lifted = lift_measure(nu)
        assert len(lifted.floors) == 5
        assert lifted.total_mass == pytest.approx(1.0)

    def test_bernoulli_normalizes(self) -> None:
        nu = FiniteShiftMeasure.bernoulli([D3, D4], [3.0, 1.0])
        assert nu.weights[D3] == pytest.approx(0.75)
        assert math.fsum(nu.weights.values()) == 1.0

    def test_rejects(self) -> None:
        with pytest.raises(DegenerateError):
            FiniteShiftMeasure({})
        with pytest.raises(RangeError):
            FiniteShiftMeasure({D3: 1.5, D4: -0.5})
        with pytest.raises(PreconditionError):
            FiniteShiftMeasure({D3: 0.5})
        with pytest.raises(PreconditionError):
            FiniteShiftMeasure.bernoulli([D3], [0.5, 0.5])


class TestTower:
    """Test the tower layout over S_K."""

    def test_floor_count(self) -> None:
        tower = build_tower(8, ALPHA)
        expected = sum(r * (i - 1) for i, r in level_counts(8, ALPHA).items())
        assert len(tower.floors()) == expected
        assert tower.levels[2] == []


class TestInducedPotential:
    """Test φ_ρ estimates per cylinder."""

    def test_constant_is_exact(self) -> None:
        value = induced_potential(D4, constant_potential(0.5), 3, PARAMS)
        assert value.point == pytest.approx(1.5)
        assert value.inf == pytest.approx(1.5)
        assert value.sup == pytest.approx(1.5)
        assert value.pad == 0.0

    def test_point_inside_bracket(self) -> None:
        phi = coordinate_potential((0.0, 1.0, 0.5))
        value = induced_potential(D4, phi, 3, PARAMS, tail_alphabet=alphabet(7, ALPHA), seed=5)
        assert value.inf <= value.point <= value.sup
        assert value.pad >= 0.0

    def test_periodic_sum_of_shortest_cycle(self) -> None:
        # the cycle 10 adds log σ to a single log f′ ≤ 1
        phi = central_potential(PARAMS)
        total = periodic_induced_sum(D3, phi, PARAMS)
        assert total < 0.0

    def test_table_shift_and_restrict(self) -> None:
        table = build_induced_table(constant_potential(0.0), 7, ALPHA, PARAMS, depth=2, samples=2)
        assert table.K == 7
        shifted = table.shifted(0.5)
        assert np.allclose(shifted.point, 0.5 * table.induced_times)
        assert shifted.shift_per_step == 0.5
        restricted = table.restricted(4)
        assert restricted.symbols == [D3, D4]

    def test_table_rejects_inverted_bracket(self) -> None:
        table = build_induced_table(constant_potential(0.0), 4, ALPHA, PARAMS, depth=1, samples=1)
        with pytest.raises(PreconditionError):
            type(table)(
                symbols=table.symbols,
                inf=table.inf + 1.0,
                sup=table.sup,
                point=table.point,
                tail_pad=0.0,
                depth=1,
                phi=table.phi,
                params=PARAMS,
                alpha=ALPHA,
            )


class TestLiftability:
    """Test e(i, A) and the liftability comparison."""

    def test_one_position_bound_dominates(self) -> None:
        for i in range(3, 14):
            assert e_of(i, "1", ALPHA) <= one_position_bound(i, ALPHA) + 1e-12

    def test_empty_level(self) -> None:
        assert enumerate_level(5, ALPHA) == []
        assert e_of(5, "1", ALPHA) == 0.0

    def test_check_fields(self) -> None:
        report = liftability_check(0.9, "1", ALPHA, N=4, cap=12)
        assert report.margin == pytest.approx(report.mu_A - report.sup_e)
        assert report.passes_truncated == (report.mu_A > report.sup_e)
        assert not report.certified
        assert 0.0 < report.tail_bound < 1.0

    def test_scan_picks_best_margin(self) -> None:
        best, reports = liftability_scan(0.9, "1", ALPHA, cap=12, Ns=(2, 4, 8))
        assert len(reports) == 3
        assert best.margin == max(r.margin for r in reports)

    def test_scan_rejects_large_N(self) -> None:
        with pytest.raises(RangeError):
            liftability_scan(0.9, "1", ALPHA, cap=6, Ns=(8,))


class TestKacAbramov:
    """Test the lift identity and the entropy relation."""

    def test_block_entropy_rate(self) -> None:
        assert block_entropy_rate("01" * 500, 4) == pytest.approx(0.0, abs=1e-5)
        bits = "".join(np.random.default_rng(0).choice(["0", "1"], size=50_000))
        assert block_entropy_rate(bits, 6) == pytest.approx(math.log(2.0), abs=0.01)

    def test_block_entropy_rejects(self) -> None:
        with pytest.raises(RangeError):
            block_entropy_rate("0101", 0)
        with pytest.raises(RangeError):
            block_entropy_rate("01", 3)

    @pytest.mark.parametrize(
        "phi",
        [central_potential(PARAMS), coordinate_potential((0.2, 0.5, -0.3))],
        ids=["central", "linear"],
    )
    def test_integral_identity(self, phi: PotentialSpec) -> None:
        nu = FiniteShiftMeasure.bernoulli(alphabet(8, ALPHA), [0.5, 0.3, 0.2])
        report = kac_abramov_check(nu, phi, PARAMS)
        assert report.abs_err <= 1e-12 * max(1.0, abs(report.rhs))
        assert report.estimated_entropy is None

    def test_entropy_relation(self) -> None:
        nu = FiniteShiftMeasure.uniform(alphabet(8, ALPHA)[:3])
        report = kac_abramov_check(
            nu, constant_potential(0.0), PARAMS, rng=np.random.default_rng(1), n_symbols=100_000
        )
        assert report.predicted_entropy == pytest.approx(math.log(3.0) / nu.integral_tau())
        assert report.entropy_rel_err < 0.05
