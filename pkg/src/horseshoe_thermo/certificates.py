"""Numerical certificates for admissible and projective-admissible potentials.

Every check brackets the quantity it compares and returns a three-valued
verdict; INCONCLUSIVE is a legal outcome whenever the brackets overlap.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from horseshoe_thermo.config import MapParams
from horseshoe_thermo.countable import VariationProfile, Verdict, variation_profile
from horseshoe_thermo.errors import DegenerateError, PreconditionError, RangeError
from horseshoe_thermo.inducing import build_induced_table
from horseshoe_thermo.maps import P, Q, Z_R0_TOP, Z_R1_BOTTOM, apply_G
from horseshoe_thermo.measures import (
    LOG_OMEGA,
    MeasureApprox,
    convex_combination,
    delta_P,
    delta_Q,
    markov_equilibrium,
    max_entropy_integral,
)
from horseshoe_thermo.potentials import (
    PotentialSpec,
    example_potential,
    planar_grid,
    scaled,
)
from horseshoe_thermo.symbolic import periodic_cycles, periodic_orbit

logger = logging.getLogger(__name__)

# periodic orbits up to this period bound sup φ_n/n from below
_C2_MAX_PERIOD = 12


# ── The plateau family ──


@dataclass(frozen=True)
class AdmissibleFamily:
    """The family t·φ for the plateau potential φ peaking at Q.

    Attributes:
        c0: Height below which φ is constant, in (5/6, 1).
        peak: φ(Q) = sup φ.
        floor: inf φ.
        xi: Hölder exponent.
        t: Scale of the family member.
    """

    c0: float = 0.84
    peak: float = 1.0
    floor: float = 0.0
    xi: float = 0.5
    t: float = 1.0

    @property
    def base(self) -> PotentialSpec:
        return example_potential(self.c0, self.peak, self.floor, self.xi)

    @property
    def potential(self) -> PotentialSpec:
        return scaled(self.base, self.t)


@dataclass
class TInterval:
    """Admissible t-range (t0, t1_lower) of the plateau family.

    Attributes:
        t0: log ω / (2·(φ(Q) − inf φ)), below which Var(tφ) < h_top/2.
        t1_lower: log ω / (φ(Q) − ∫φ dμ̂_max).
        nonempty: t0 < t1_lower.
        max_entropy_integral: ∫φ dμ̂_max at the block length used.
        h_top: The entropy used, log ω.
    """

    t0: float
    t1_lower: float
    nonempty: bool
    max_entropy_integral: float
    h_top: float = LOG_OMEGA


def t_interval(family: AdmissibleFamily, params: MapParams, L: int = 8) -> TInterval:
    """Closed-form t0 and the maximal-entropy estimate of t1.

    Raises:
        DegenerateError: If φ(Q) equals ∫φ dμ̂_max.
    """
    phi = family.base
    peak = phi(Q)
    integral = max_entropy_integral(phi, L, params)
    if abs(peak - integral) <= 1e-15:
        raise DegenerateError("φ(Q) equals the maximal-entropy integral; t1 is unbounded")
    t0 = LOG_OMEGA / (2.0 * (peak - family.floor))
    t1 = LOG_OMEGA / (peak - integral)
    logger.info("Admissible interval: t0=%.6g, t1_lower=%.6g", t0, t1)
    return TInterval(t0=t0, t1_lower=t1, nonempty=t0 < t1, max_entropy_integral=integral)


# ── (C1) and (C2) ──


def markov_pressure_bracket(phi: PotentialSpec, L: int, params: MapParams) -> tuple[float, float]:
    """Block-model pressure widened by the Hölder pad of its representatives."""
    measure, _ = markov_equilibrium(phi, L, params)
    return measure.diagnostics["pressure_lower"], measure.diagnostics["pressure_upper"]


def check_C1(
    phi: PotentialSpec,
    alpha: float,
    K: int,
    params: MapParams,
    depth: int = 8,
    samples: int = 40,
    k_max: int = 10,
    seed: int = 0,
) -> VariationProfile:
    """Fit Var_k of the induced potential over k = 1..k_max.

    The profile is certified iff the fitted ratio a < 1 and φ is Hölder.
    """
    table = build_induced_table(phi, K, alpha, params, depth=depth, seed=seed)
    logger.info("C1 variation fit for %s (seed %d)", phi.label, seed)
    rng = np.random.default_rng(seed)
    profile = variation_profile(table, list(range(1, k_max + 1)), samples, rng)
    if not profile.certified:
        logger.warning("C1 not certified for %s: a=%.4g", phi.label, profile.a)
    return profile


def _grid_points(grid: int) -> np.ndarray:
    s = np.linspace(0.0, 1.0, grid)
    zl = np.linspace(0.0, Z_R0_TOP, grid)
    zu = np.linspace(Z_R1_BOTTOM, 1.0, grid)
    x, y, z = np.meshgrid(s, s, np.concatenate([zl, zu]), indexing="ij")
    return np.column_stack([x.ravel(), y.ravel(), z.ravel()])


def sup_bracket(
    phi: PotentialSpec, n: int, params: MapParams, grid: int = 21
) -> tuple[float, float]:
    """Lower and upper bounds for sup over Λ of φ_n/n.

    Below: the best Birkhoff average over periodic orbits up to period 12 and
    the fixed points Q and P. Above: the declared sup, or the grid maximum plus
    C·(1.5h)^ξ with h the grid spacing.
    """
    lower = max(phi(Q), phi(P))
    for cycle in periodic_cycles(_C2_MAX_PERIOD):
        values = phi.on_horseshoe(periodic_orbit(cycle, params))
        period = len(values)
        # φ_n/n at every point of the orbit, reading the cycle n steps ahead
        windows = np.array([values[(np.arange(n) + j) % period].sum() for j in range(period)])
        lower = max(lower, float(windows.max()) / n)

    if phi.bounds is not None:
        upper = phi.bounds[1]
    elif phi.is_holder:
        spacing = 1.0 / (grid - 1)
        upper = float(phi.values(_grid_points(grid)).max())
        upper += phi.holder_constant * (1.5 * spacing) ** phi.holder_exponent
    else:
        upper = math.inf
    return lower, max(lower, upper)


@dataclass
class C2Report:
    """Comparison of the pressure with sup φ_n/n.

    Attributes:
        n: Averaging length.
        sup_lower: Lower bound of sup φ_n/n.
        sup_upper: Upper bound of sup φ_n/n.
        pressure_lower: Lower end of the pressure bracket.
        pressure_upper: Upper end of the pressure bracket.
        verdict: HOLDS if pressure_lower > sup_upper, FAILS if
            pressure_upper ≤ sup_lower, INCONCLUSIVE otherwise.
    """

    n: int
    sup_lower: float
    sup_upper: float
    pressure_lower: float
    pressure_upper: float
    verdict: Verdict


def check_C2(
    phi: PotentialSpec,
    n: int,
    params: MapParams,
    pressure_estimate: Callable[[PotentialSpec], tuple[float, float]] | None = None,
    L: int = 8,
) -> C2Report:
    """Check P_top(φ) > sup φ_n/n.

    Args:
        phi: Potential on Λ.
        n: Averaging length.
        params: Map constants.
        pressure_estimate: Returns (lower, upper) pressure bounds for φ; the
            block-model bracket at length L when omitted.
        L: Block length of the default bracket.

    Raises:
        RangeError: If n < 1.
    """
    if n < 1:
        raise RangeError(f"n must be at least 1, got {n}")
    if pressure_estimate is None:
        p_lo, p_hi = markov_pressure_bracket(phi, L, params)
    else:
        p_lo, p_hi = pressure_estimate(phi)
    s_lo, s_hi = sup_bracket(phi, n, params)
    if p_lo > s_hi:
        verdict = Verdict.HOLDS
    elif p_hi <= s_lo:
        verdict = Verdict.FAILS
    else:
        verdict = Verdict.INCONCLUSIVE
        logger.warning("C2 inconclusive for %s at n=%d", phi.label, n)
    return C2Report(
        n=n,
        sup_lower=s_lo,
        sup_upper=s_hi,
        pressure_lower=p_lo,
        pressure_upper=p_hi,
        verdict=verdict,
    )


# ── (D1), (D2) and the sup-at-Q hypotheses ──


@dataclass
class D1Report:
    """min over the grid of φ − (u − u∘G)."""

    min_slack: float
    points: int
    holds: bool


def check_D1(phi: PotentialSpec, u: PotentialSpec, params: MapParams, grid: int = 25) -> D1Report:
    """Check φ ≥ u − u∘G on grid² points of each of S1, S2, S3."""
    pts = planar_grid(params, grid)
    slack = phi.values(pts) - (u.values(pts) - u.values(apply_G(pts, params)))
    min_slack = float(slack.min())
    return D1Report(min_slack=min_slack, points=len(pts), holds=min_slack >= -1e-12)


@dataclass
class D2Report:
    """Non-expanding inequality over an explicit measure family.

    Attributes:
        sup_integral: max over the family of ∫φ dν.
        sup_entropy: max over the family of h_ν.
        h_G: Entropy of G used on the right-hand side.
        margin: h_G − sup_entropy − sup_integral.
        verdict: HOLDS when the margin is positive, FAILS otherwise. Passing is
            a necessary condition only, since the family is a stand-in for all
            non-expanding measures.
        worst: Label of the measure attaining ``sup_integral``.
        surrogate: Always True; the family is finite.
    """

    sup_integral: float
    sup_entropy: float
    h_G: float
    margin: float
    verdict: Verdict
    worst: str
    surrogate: bool = True


def default_nonexpanding_family() -> list[MeasureApprox]:
    """δ_Q, δ_P and three of their convex combinations."""
    q, p = delta_Q(), delta_P()
    return [q, p, *(convex_combination([q, p], [w, 1.0 - w]) for w in (0.25, 0.5, 0.75))]


def check_D2(
    phi: PotentialSpec,
    family: list[MeasureApprox] | None = None,
    h_G: float = LOG_OMEGA,
) -> D2Report:
    """Check sup ∫φ dν < h(G) − sup h_ν over the family.

    Raises:
        PreconditionError: If an explicit family is empty.
    """
    family = default_nonexpanding_family() if family is None else family
    if not family:
        raise PreconditionError("check_D2 needs at least one measure")
    integrals = [mu.integral(phi) for mu in family]
    j = int(np.argmax(integrals))
    sup_entropy = max(mu.entropy for mu in family)
    margin = h_G - sup_entropy - integrals[j]
    return D2Report(
        sup_integral=integrals[j],
        sup_entropy=sup_entropy,
        h_G=h_G,
        margin=margin,
        verdict=Verdict.HOLDS if margin > 0.0 else Verdict.FAILS,
        worst=family[j].label,
    )


@dataclass
class SupAtQReport:
    """Whether sup φ|Ω sits at Q and stays below the pressure.

    Attributes:
        sup_grid: Grid maximum of φ on Ω.
        phi_Q: φ(Q).
        sup_at_Q: sup_grid ≤ φ(Q) + tol.
        below_pressure: φ(Q) < pressure_lower.
        entropy_margin: pressure_lower − h_η − φ(Q) with h_η = log ω.
        stronger_holds: entropy_margin > 0.
    """

    sup_grid: float
    phi_Q: float
    sup_at_Q: bool
    below_pressure: bool
    entropy_margin: float
    stronger_holds: bool
    notes: dict = field(default_factory=dict)


def sup_at_Q_check(
    phi: PotentialSpec,
    pressure_lower: float,
    params: MapParams,
    grid: int = 25,
    tol: float = 1e-9,
    h_eta: float = LOG_OMEGA,
) -> SupAtQReport:
    """Check sup φ|Ω = φ(Q) < P(φ|Ω) on a grid of Ω."""
    pts = planar_grid(params, grid)
    sup_grid = float(phi.values(pts).max())
    phi_q = phi(Q)
    margin = pressure_lower - h_eta - phi_q
    return SupAtQReport(
        sup_grid=sup_grid,
        phi_Q=phi_q,
        sup_at_Q=sup_grid <= phi_q + tol,
        below_pressure=phi_q < pressure_lower,
        entropy_margin=margin,
        stronger_holds=margin > 0.0,
    )
