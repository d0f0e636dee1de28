"""Tests for hyperbolic times, Birkhoff sums and the phase-transition scan."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horseshoe_thermo.config import HypTimeParams, MapParams
from horseshoe_thermo.errors import EscapeError, KindError, NotFoundError, PreconditionError
from horseshoe_thermo.expansion import (
    OrbitRecord,
    PressureCurve,
    birkhoff_sum,
    boundary_mask,
    central_lyapunov,
    detect_phase_transition,
    dynamical_orbit,
    frequency_d,
    hyperbolic_times,
    log_min_expansion_values,
    planar_orbit,
    pliss_lower_bound,
    pressure_curve,
    random_admissible_word,
    sensitivity_scan,
    sup_over_ball,
)
from horseshoe_thermo.maps import P, Q, Point3
from horseshoe_thermo.measures import LOG_OMEGA, delta_P, delta_Q, pushforward_pi
from horseshoe_thermo.potentials import constant_potential, coordinate_potential

PARAMS = MapParams()
HYP = HypTimeParams()


def _make_record(steps: list[float]) -> OrbitRecord:
    """Synthetic record: only the step values matter, no point is near a boundary."""
    m = len(steps)
    return OrbitRecord(
        points=np.zeros((m + 1, 3)),
        log_min_expansion=np.array(steps, dtype=float),
        boundary_flags=np.zeros(m + 1, dtype=bool),
    )


class TestExpansionRates:
    """Test the weakest expansion of DG and the boundary mask."""

    def test_values_at_reference_points(self) -> None:
        pts = np.array([Q.as_array(), P.as_array(), [0.5, 0.1, 0.0]])
        values = log_min_expansion_values(pts, PARAMS)
        assert values[0] == pytest.approx(-1.0)
        assert values[1] == pytest.approx(1.0)
        # on S2 the horizontal rate log α is weaker than log(1/σ)
        assert values[2] == pytest.approx(math.log(PARAMS.alpha))

    def test_boundary_mask(self) -> None:
        pts = np.array([[0.3, 0.5, 0.0], [0.1, 0.5, 0.0], [0.1, 0.25, 0.0]])
        assert boundary_mask(pts, PARAMS, 1e-3).tolist() == [True, False, True]


class TestOrbits:
    """Test planar and itinerary-driven G-orbits."""

    def test_fixed_points(self) -> None:
        record = planar_orbit(Q, 10, PARAMS, HYP)
        assert len(record) == 10
        assert np.allclose(record.points, 0.0)
        assert np.allclose(planar_orbit(P, 5, PARAMS, HYP).points[-1], P.as_array())

    def test_truncates_on_escape(self) -> None:
        # G(0.2, 0.5) lands right of S1 but above S2
        record = planar_orbit(Point3(0.2, 0.5, 0.0), 10, PARAMS, HYP)
        assert len(record) == 0
        with pytest.raises(PreconditionError):
            hyperbolic_times(record, HYP)

    def test_start_outside(self) -> None:
        with pytest.raises(EscapeError) as excinfo:
            planar_orbit(Point3(0.5, 0.5, 0.0), 10, PARAMS, HYP)
        assert excinfo.value.index == 0

    def test_dynamical_orbit_steps(self) -> None:
        word = random_admissible_word(np.random.default_rng(0), 60)
        record = dynamical_orbit(word, PARAMS, HYP)
        assert len(record) == 59
        assert len(record.boundary_flags) == 60

    def test_random_word_is_admissible(self) -> None:
        word = random_admissible_word(np.random.default_rng(1), 500)
        assert len(word) == 500
        assert "11" not in word
        assert 0.2 < word.count("1") / 500 < 0.35


class TestHyperbolicTimes:
    """Test hyperbolic times, their frequency and the Pliss bound."""

    def test_fixed_points_have_none(self) -> None:
        assert hyperbolic_times(planar_orbit(Q, 20, PARAMS, HYP), HYP) == []
        assert hyperbolic_times(planar_orbit(P, 20, PARAMS, HYP), HYP) == []

    def test_constant_expansion(self) -> None:
        record = _make_record([2.0] * 10)
        assert hyperbolic_times(record, HYP) == list(range(1, 11))
        assert pliss_lower_bound(record, HYP) == pytest.approx(1.0)

    def test_record_times(self) -> None:
        c = math.log(3.0)
        record = _make_record([c + 1.0, c - 2.0, c + 0.5, c + 2.0])
        assert hyperbolic_times(record, HYP) == [1, 4]

    def test_boundary_exclusion(self) -> None:
        record = _make_record([2.0] * 4)
        record.boundary_flags[2] = True
        assert hyperbolic_times(record, HYP) == [1, 3, 4]
        assert hyperbolic_times(record, HYP, exclude_boundary=False) == [1, 2, 3, 4]

    def test_pliss_below_threshold(self) -> None:
        assert pliss_lower_bound(_make_record([-1.0, 0.5]), HYP) == 0.0

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(min_value=-3.0, max_value=3.0), min_size=1, max_size=200))
    def test_pliss_frequency_bound(self, steps: list[float]) -> None:
        record = _make_record(steps)
        count = len(hyperbolic_times(record, HYP, exclude_boundary=False))
        assert count / len(steps) >= pliss_lower_bound(record, HYP) - 1e-9

    def test_frequency_needs_long_orbit(self) -> None:
        with pytest.raises(PreconditionError):
            frequency_d(_make_record([2.0] * 99), HYP)
        assert frequency_d(_make_record([2.0] * 100), HYP) == 1.0

    def test_sensitivity_is_monotone(self) -> None:
        rows = sensitivity_scan([0.2, 0.5], PARAMS, orbits=3, length=150, seed=4)
        assert [row.sigma_h for row in rows] == [0.2, 0.5]
        assert rows[0].mean_frequency <= rows[1].mean_frequency
        assert all(0.0 <= row.mean_frequency <= 1.0 for row in rows)
        assert rows[0].orbits == 3


class TestLyapunov:
    """Test central exponents of measures."""

    def test_fixed_points(self) -> None:
        assert central_lyapunov(delta_Q(), PARAMS) == pytest.approx(1.0)
        assert central_lyapunov(delta_P(), PARAMS) == pytest.approx(-1.0)

    def test_rejects_planar(self) -> None:
        with pytest.raises(KindError):
            central_lyapunov(pushforward_pi(delta_Q(), PARAMS), PARAMS)


class TestBirkhoff:
    """Test Birkhoff sums and their dynamical-ball suprema."""

    @pytest.mark.parametrize("dynamics", ["F", "G"])
    def test_constant_at_Q(self, dynamics: str) -> None:
        assert birkhoff_sum(constant_potential(1.0), Q, 5, PARAMS, dynamics) == pytest.approx(5.0)

    def test_empty_sum(self) -> None:
        assert birkhoff_sum(constant_potential(1.0), Point3(0.5, 0.5, 0.5), 0, PARAMS) == 0.0

    def test_escape_index(self) -> None:
        with pytest.raises(EscapeError) as excinfo:
            birkhoff_sum(constant_potential(1.0), Point3(0.5, 0.5, 0.1), 3, PARAMS)
        assert excinfo.value.index == 1

    def test_unknown_dynamics(self) -> None:
        with pytest.raises(PreconditionError):
            birkhoff_sum(constant_potential(1.0), Q, 3, PARAMS, dynamics="H")

    def test_sup_over_ball(self) -> None:
        phi = coordinate_potential((0.0, 1.0, 0.0))
        p = Point3(0.2, 0.3, 0.0)
        centre = birkhoff_sum(phi, p, 3, PARAMS)
        small = sup_over_ball(phi, p, 3, 0.01, PARAMS)
        large = sup_over_ball(phi, p, 3, 0.1, PARAMS)
        assert centre <= small <= large
        assert large > centre
        assert sup_over_ball(phi, p, 3, 1e-12, PARAMS) == centre


class TestPhaseTransition:
    """Test the pressure curve and the crossing detector."""

    def test_synthetic_crossing(self) -> None:
        curve = PressureCurve(
            t=np.array([0.0, 1.0, 2.0]),
            branch_Q=np.array([0.0, 1.0, 2.0]),
            branch_hyp=np.array([0.5, 0.7, 0.9]),
        )
        found = detect_phase_transition(curve)
        assert found.t0_hat == pytest.approx(0.625)
        assert found.hyp_slope == pytest.approx(0.2)
        assert found.slope_jump == pytest.approx(0.8)
        assert curve.p_hat.tolist() == [0.5, 1.0, 2.0]
        assert curve.rows()[0]["P_hat"] == 0.5

    def test_refines_with_branch(self) -> None:
        curve = PressureCurve(
            t=np.array([0.0, 1.0, 2.0]),
            branch_Q=np.array([0.0, 1.0, 2.0]),
            branch_hyp=np.array([0.5, 0.7, 0.9]),
            hyp_branch=lambda t: 0.5 + 0.2 * t,
        )
        found = detect_phase_transition(curve)
        assert found.t0_hat == pytest.approx(0.625, abs=1e-9)
        assert found.hyp_slope == pytest.approx(0.2, abs=1e-6)

    def test_no_crossing(self) -> None:
        curve = PressureCurve(
            t=np.array([0.0, 1.0]),
            branch_Q=np.array([0.0, 1.0]),
            branch_hyp=np.array([2.0, 3.0]),
        )
        with pytest.raises(NotFoundError):
            detect_phase_transition(curve)

    def test_curve_at_zero_is_entropy(self) -> None:
        curve = pressure_curve([0.0, 0.5], 6, PARAMS)
        assert curve.branch_hyp[0] == pytest.approx(LOG_OMEGA, abs=1e-9)
        assert curve.L == 6
        threaded = pressure_curve([0.0, 0.5], 6, PARAMS, threads=2)
        assert np.array_equal(curve.branch_hyp, threaded.branch_hyp)

    def test_reads_the_Q_branch(self) -> None:
        curve = PressureCurve(
            t=np.array([0.0, 1.0, 2.0]),
            branch_Q=np.array([0.0, 2.0, 4.0]),
            branch_hyp=np.array([0.5, 0.7, 0.9]),
            hyp_branch=lambda t: 0.5 + 0.2 * t,
        )
        found = detect_phase_transition(curve)
        # 0.5 + 0.2 t = 2 t
        assert found.t0_hat == pytest.approx(0.5 / 1.8, abs=1e-9)
        assert found.q_slope == pytest.approx(2.0)
        assert found.slope_jump == pytest.approx(1.8, abs=1e-6)

    def test_reads_the_Q_branch_on_grid(self) -> None:
        curve = PressureCurve(
            t=np.array([0.0, 1.0, 2.0]),
            branch_Q=np.array([0.0, 2.0, 4.0]),
            branch_hyp=np.array([0.5, 0.7, 0.9]),
        )
        found = detect_phase_transition(curve)
        assert found.t0_hat == pytest.approx(0.5 / 1.8)
        assert found.slope_jump == pytest.approx(1.8)

    def test_phase_scan_across_block_lengths(self) -> None:
        grid = np.linspace(0.0, 2.0, 21).tolist()
        crossings = []
        for L in (6, 8, 10):
            curve = pressure_curve(grid, L, PARAMS)
            p_hat = curve.p_hat
            assert (p_hat >= curve.t - 1e-12).all()
            assert (np.diff(p_hat, 2) >= -1e-9).all()
            found = detect_phase_transition(curve)
            assert found.t0_hat > 0.0
            assert found.slope_jump > 0.5
            crossings.append(found.t0_hat)
        spread = (max(crossings) - min(crossings)) / float(np.mean(crossings))
        assert spread < 0.2
