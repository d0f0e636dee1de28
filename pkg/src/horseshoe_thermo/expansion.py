"""Non-uniform expansion of G, Birkhoff sums and the phase-transition scan.

Hyperbolic times are read off the derivative cocycle: DG is diagonal, so the
weakest expansion at a point is min(log α, log |g′(y)|) with g the central
component of G (g = f⁻¹ on S1 ∪ S3, y ↦ 1 − y/σ on S2).
"""

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from horseshoe_thermo.config import HypTimeParams, MapParams
from horseshoe_thermo.errors import EscapeError, KindError, NotFoundError, PreconditionError
from horseshoe_thermo.maps import (
    X_SPLIT,
    Point3,
    apply_F,
    apply_F_inv,
    apply_G,
    central_log_derivative_values,
    flow_log_derivative,
    in_horseshoe_domain,
    in_planar_domain,
    preimage_branches,
    split_distance,
)
from horseshoe_thermo.measures import MeasureApprox, markov_equilibrium
from horseshoe_thermo.potentials import PLANAR, PotentialSpec, central_potential
from horseshoe_thermo.symbolic import planar_orbit_from_itinerary

logger = logging.getLogger(__name__)

DYNAMICS = ("F", "F_inv", "G")

# fewest steps a frequency estimate accepts
_MIN_ORBIT = 100
# radii 2^-k, k = 0.._MAX_HALVINGS, of the dynamical-ball candidates
_MAX_HALVINGS = 30


# ── Orbit records ──


@dataclass
class OrbitRecord:
    """A G-orbit with its per-step weakest expansion.

    Attributes:
        points: G^j(x) for j = 0..m, shape (m + 1, 3).
        log_min_expansion: Weakest log-expansion of DG at points[j], j < m.
        boundary_flags: Whether points[j] lies within the reference ball of a
            rectangle boundary.
    """

    points: np.ndarray
    log_min_expansion: np.ndarray
    boundary_flags: np.ndarray

    def __len__(self) -> int:
        return len(self.log_min_expansion)


def log_min_expansion_values(points: np.ndarray, params: MapParams) -> np.ndarray:
    """min(log α, log |g′(y)|) at planar points; S2 rows use g′ = −1/σ."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    x = pts[:, 0]
    on_right = (x >= X_SPLIT - params.lambda0 - 1e-12) & (pts[:, 2] < 0.5)
    central = np.asarray(flow_log_derivative(pts[:, 1], -1), dtype=float).copy()
    central[on_right] = math.log(1.0 / params.sigma)
    return np.minimum(math.log(params.alpha), central)


def boundary_mask(points: np.ndarray, params: MapParams, eps: float) -> np.ndarray:
    """Points within ``eps`` of x = λ0, x = 3/4 − λ0, x = 3/4 or y = σ."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    x, y = pts[:, 0], pts[:, 1]
    edges = (params.lambda0, X_SPLIT - params.lambda0, X_SPLIT)
    near = np.zeros(len(pts), dtype=bool)
    for edge in edges:
        near |= np.abs(x - edge) <= eps
    return near | (np.abs(y - params.sigma) <= eps)


def orbit_record(points: np.ndarray, params: MapParams, hyp: HypTimeParams) -> OrbitRecord:
    """Wrap a G-orbit (rows G^j(x)) with its expansion data."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    return OrbitRecord(
        points=pts,
        log_min_expansion=log_min_expansion_values(pts[:-1], params),
        boundary_flags=boundary_mask(pts, params, hyp.eps_ball),
    )


def planar_orbit(p: Point3, n: int, params: MapParams, hyp: HypTimeParams) -> OrbitRecord:
    """Forward G-orbit of ``p`` of up to n steps, truncated where it leaves S1 ∪ S2 ∪ S3."""
    rows = [np.asarray(p, dtype=float)]
    for _ in range(n):
        current = rows[-1].reshape(1, 3)
        if not in_planar_domain(current, params)[0]:
            break
        rows.append(apply_G(current, params)[0])
    if not in_planar_domain(rows[-1].reshape(1, 3), params)[0]:
        rows.pop()
    if not rows:
        raise EscapeError(f"{tuple(p)} is not in S1 ∪ S2 ∪ S3", index=0)
    return orbit_record(np.array(rows), params, hyp)


def dynamical_orbit(word: str, params: MapParams, hyp: HypTimeParams) -> OrbitRecord:
    """G-orbit projected from the backward F-orbit with itinerary ``word``."""
    return orbit_record(planar_orbit_from_itinerary(word, params), params, hyp)


def random_admissible_word(rng: np.random.Generator, n: int) -> str:
    """A sample of length n from the maximal-entropy (Parry) chain of the golden-mean shift."""
    p_one = 1.0 / ((1.0 + math.sqrt(5.0)) / 2.0) ** 2
    u = rng.random(n)
    symbols = []
    previous = "0"
    for value in u:
        s = "1" if previous == "0" and value < p_one else "0"
        symbols.append(s)
        previous = s
    return "".join(symbols)


# ── Hyperbolic times ──


def hyperbolic_times(
    orbit: OrbitRecord, hyp: HypTimeParams, exclude_boundary: bool = True
) -> list[int]:
    """Times n ≥ 1 with Σ_{j=i}^{n−1} ℓ_j ≥ (n − i)·log(1/σ_h) for every i < n.

    With A_n = Σ_{j<n} (ℓ_j − log(1/σ_h)), n qualifies iff A_n ≥ max_{i<n} A_i.

    Raises:
        PreconditionError: If the orbit has no steps.
    """
    if len(orbit) == 0:
        raise PreconditionError("hyperbolic times need at least one step")
    excess = orbit.log_min_expansion - math.log(1.0 / hyp.sigma_h)
    partial = np.concatenate([[0.0], np.cumsum(excess)])
    running_max = np.maximum.accumulate(partial)[:-1]
    flagged = partial[1:] >= running_max - 1e-12
    if exclude_boundary:
        flagged &= ~orbit.boundary_flags[1 : len(orbit) + 1]
    return [int(n) for n in np.nonzero(flagged)[0] + 1]


def frequency_d(orbit: OrbitRecord, hyp: HypTimeParams, exclude_boundary: bool = True) -> float:
    """Fraction of hyperbolic times among 1..m.

    Raises:
        PreconditionError: If the orbit has fewer than 100 steps.
    """
    if len(orbit) < _MIN_ORBIT:
        raise PreconditionError(f"need at least {_MIN_ORBIT} steps, got {len(orbit)}")
    return len(hyperbolic_times(orbit, hyp, exclude_boundary)) / len(orbit)


def pliss_lower_bound(orbit: OrbitRecord, hyp: HypTimeParams) -> float:
    """Pliss bound (c̄ − c)/(A − c): c̄ mean step, A largest step, c = log(1/σ_h).

    Returns 0 when c̄ ≤ c.
    """
    c = math.log(1.0 / hyp.sigma_h)
    mean = float(orbit.log_min_expansion.mean())
    top = float(orbit.log_min_expansion.max())
    if mean <= c or top <= c:
        return 0.0
    return (mean - c) / (top - c)


@dataclass
class SensitivityRow:
    sigma_h: float
    mean_frequency: float
    mean_pliss_bound: float
    orbits: int


def sensitivity_scan(
    sigma_values: list[float],
    params: MapParams,
    eps_ball: float = 1e-3,
    orbits: int = 20,
    length: int = 400,
    seed: int = 0,
) -> list[SensitivityRow]:
    """Hyperbolic-time frequencies over σ_h on orbits with random admissible itineraries."""
    rng = np.random.default_rng(seed)
    logger.info("Sensitivity scan over %d sigma_h values (seed %d)", len(sigma_values), seed)
    reference = HypTimeParams(eps_ball=eps_ball)
    records = [
        dynamical_orbit(random_admissible_word(rng, length + 1), params, reference)
        for _ in range(orbits)
    ]
    rows = []
    for sigma_h in sigma_values:
        hyp = HypTimeParams(sigma_h=sigma_h, eps_ball=eps_ball)
        freqs = [frequency_d(r, hyp) for r in records]
        bounds = [pliss_lower_bound(r, hyp) for r in records]
        rows.append(
            SensitivityRow(
                sigma_h=sigma_h,
                mean_frequency=float(np.mean(freqs)),
                mean_pliss_bound=float(np.mean(bounds)),
                orbits=orbits,
            )
        )
    return rows


# ── Lyapunov exponents ──


def central_lyapunov(mu: MeasureApprox, params: MapParams) -> float:
    """∫ log |DF|_{E^c}| dμ.

    Raises:
        KindError: If μ lives on the planar set.
    """
    if mu.domain == PLANAR:
        raise KindError("central exponents are defined for measures on the horseshoe")
    return float(mu.weights @ central_log_derivative_values(mu.atoms, params))


# ── Birkhoff sums ──


def _in_domain(points: np.ndarray, dynamics: str, params: MapParams) -> np.ndarray:
    if dynamics == "G":
        return in_planar_domain(points, params)
    return in_horseshoe_domain(points)


def _advance(points: np.ndarray, dynamics: str, params: MapParams) -> np.ndarray:
    # rows that cannot be mapped come back as NaN
    out = np.full_like(points, np.nan)
    if dynamics == "F":
        ok = in_horseshoe_domain(points)
        if ok.any():
            out[ok] = apply_F(points[ok], params)
    elif dynamics == "F_inv":
        branches = preimage_branches(points, params)
        ok = branches >= 0
        if ok.any():
            out[ok] = apply_F_inv(points[ok], params, branches[ok])
    else:
        ok = in_planar_domain(points, params)
        if ok.any():
            out[ok] = apply_G(points[ok], params)
    return out


def _orbits(
    starts: np.ndarray, n: int, dynamics: str, params: MapParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orbits of shape (s, n, 3), survival mask, and first escape index (n if none)."""
    if dynamics not in DYNAMICS:
        raise PreconditionError(f"dynamics must be one of {DYNAMICS}, got {dynamics!r}")
    current = np.asarray(starts, dtype=float).reshape(-1, 3)
    orbits = np.full((len(current), n, 3), np.nan)
    escape = np.full(len(current), n)
    for k in range(n):
        inside = _in_domain(current, dynamics, params)
        newly_out = ~inside & (escape == n)
        escape[newly_out] = k
        orbits[:, k] = current
        if k < n - 1:
            current = _advance(np.where(inside[:, None], current, np.nan), dynamics, params)
    return orbits, escape == n, escape


def _values_along(phi: PotentialSpec, points: np.ndarray, dynamics: str) -> np.ndarray:
    if dynamics == "G":
        return phi.values(points)
    return phi.on_horseshoe(points)


def birkhoff_sum(
    phi: PotentialSpec, p: Point3, n: int, params: MapParams, dynamics: str = "F"
) -> float:
    """S_nφ(p) = Σ_{k<n} φ(T^k p) for T = F, F⁻¹ or G.

    Raises:
        EscapeError: If some T^k p, k < n, leaves the domain.
    """
    if n <= 0:
        return 0.0
    orbits, alive, escape = _orbits(np.asarray(p, dtype=float), n, dynamics, params)
    if not alive[0]:
        step = int(escape[0])
        raise EscapeError(f"orbit of {tuple(p)} leaves the domain at step {step}", index=step)
    return float(_values_along(phi, orbits[0], dynamics).sum())


def sup_over_ball(
    phi: PotentialSpec,
    p: Point3,
    n: int,
    delta: float,
    params: MapParams,
    samples: int = 310,
    seed: int = 0,
    dynamics: str = "F",
) -> float:
    """Sampled lower bound for R_{n,δ}φ(p) = sup over the dynamical ball of S_nφ.

    Candidates sit at radii 2^{-k} around p along seeded directions; those with
    radius ≤ δ that stay δ-close to the orbit of p for n steps are kept, so the
    estimate is monotone in δ and never below S_nφ(p).

    Raises:
        EscapeError: If the orbit of p itself escapes.
    """
    centre = birkhoff_sum(phi, p, n, params, dynamics)
    rng = np.random.default_rng(seed)
    per_radius = max(1, samples // (_MAX_HALVINGS + 1))
    directions = rng.uniform(-1.0, 1.0, size=(_MAX_HALVINGS + 1, per_radius, 3))
    norms = np.abs(directions).sum(axis=2, keepdims=True)
    directions /= np.where(norms > 0.0, norms, 1.0)
    radii = 2.0 ** -np.arange(_MAX_HALVINGS + 1)
    keep = radii <= delta
    if not keep.any():
        return centre
    base = np.asarray(p, dtype=float)
    candidates = (base + radii[keep, None, None] * directions[keep]).reshape(-1, 3)

    reference, _, _ = _orbits(base, n, dynamics, params)
    orbits, alive, _ = _orbits(candidates, n, dynamics, params)
    gaps = split_distance(orbits, reference[0][None, :, :])
    within = alive & np.all(np.nan_to_num(gaps, nan=np.inf) <= delta, axis=1)
    if not within.any():
        return centre
    sums = _values_along(phi, orbits[within].reshape(-1, 3), dynamics).reshape(-1, n).sum(axis=1)
    return max(centre, float(sums.max()))


# ── Phase transition ──


@dataclass
class PressureCurve:
    """Two branches of P̂(t) on a grid.

    Attributes:
        t: Grid values.
        branch_Q: t, the free energy of δ_Q (its central exponent is 1).
        branch_hyp: Block-model pressure of t·log |DF|_{E^c}|.
        L: Block length of the hyperbolic branch.
        hyp_branch: The hyperbolic branch as a callable, used to refine crossings.
    """

    t: np.ndarray
    branch_Q: np.ndarray
    branch_hyp: np.ndarray
    L: int | None = None
    hyp_branch: Callable[[float], float] | None = None

    @property
    def p_hat(self) -> np.ndarray:
        return np.maximum(self.branch_Q, self.branch_hyp)

    def rows(self) -> list[dict]:
        return [
            {"t": t, "branch_Q": q, "branch_hyp": h, "P_hat": max(q, h)}
            for t, q, h in zip(
                self.t.tolist(), self.branch_Q.tolist(), self.branch_hyp.tolist(), strict=True
            )
        ]


def hyperbolic_branch(t: float, L: int, params: MapParams) -> float:
    """Block-model pressure of φ_t = t·log |DF|_{E^c}| at block length L."""
    return markov_equilibrium(central_potential(params, t), L, params)[1]


def pressure_curve(
    t_grid: list[float], L: int, params: MapParams, threads: int = 1
) -> PressureCurve:
    """P̂(t) = max(t, hyperbolic branch) on a grid, the grid evaluated on ``threads`` workers."""
    grid = [float(t) for t in t_grid]

    def branch(t: float) -> float:
        return hyperbolic_branch(t, L, params)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        hyp_values = list(pool.map(branch, grid))
    logger.info("Pressure curve: %d grid points at L=%d on %d threads", len(grid), L, threads)
    return PressureCurve(
        t=np.array(grid),
        branch_Q=np.array(grid),
        branch_hyp=np.array(hyp_values),
        L=L,
        hyp_branch=branch,
    )


@dataclass
class PhaseTransition:
    """Crossing of the two branches.

    Attributes:
        t0_hat: Crossing point.
        slope_jump: |slope of the δ_Q branch − slope of the hyperbolic branch| at t0_hat.
        hyp_slope: Slope of the hyperbolic branch at t0_hat.
        q_slope: Slope of the δ_Q branch on the grid cell holding t0_hat.
    """

    t0_hat: float
    slope_jump: float
    hyp_slope: float
    q_slope: float


def detect_phase_transition(curve: PressureCurve, h: float = 1e-4) -> PhaseTransition:
    """Locate where the hyperbolic branch and the δ_Q branch cross.

    The δ_Q branch is read from ``curve.branch_Q`` and interpolated linearly.
    Refines with brentq on the hyperbolic callable when the curve carries one,
    and interpolates linearly between grid points otherwise.

    Raises:
        NotFoundError: If the branch difference never changes sign on the grid.
    """
    diff = curve.branch_hyp - curve.branch_Q
    signs = np.sign(diff)
    changes = np.nonzero(signs[:-1] * signs[1:] <= 0)[0]
    changes = [j for j in changes if not (diff[j] == 0.0 and diff[j + 1] == 0.0)]
    if not changes:
        raise NotFoundError("the branches do not cross on the grid")
    j = int(changes[0])
    t_lo, t_hi = float(curve.t[j]), float(curve.t[j + 1])
    q_slope = float((curve.branch_Q[j + 1] - curve.branch_Q[j]) / (t_hi - t_lo))

    if curve.hyp_branch is not None and diff[j] != 0.0 and diff[j + 1] != 0.0:
        fn = curve.hyp_branch
        q_lo = float(curve.branch_Q[j])
        t0 = brentq(lambda t: fn(t) - (q_lo + q_slope * (t - t_lo)), t_lo, t_hi, xtol=1e-10)
        hyp_slope = (fn(t0 + h) - fn(t0 - h)) / (2.0 * h)
    else:
        d_lo, d_hi = float(diff[j]), float(diff[j + 1])
        t0 = t_lo if d_lo == 0.0 else t_lo + (t_hi - t_lo) * d_lo / (d_lo - d_hi)
        hyp_slope = float((curve.branch_hyp[j + 1] - curve.branch_hyp[j]) / (t_hi - t_lo))
    jump = abs(q_slope - hyp_slope)
    logger.info("Branches cross at t0=%.6g with slope jump %.4g", t0, jump)
    return PhaseTransition(t0_hat=float(t0), slope_jump=jump, hyp_slope=hyp_slope, q_slope=q_slope)
