"""Thermodynamics of the induced full shift over the truncated alphabet S_K.

Induced potentials are tables of (inf, sup, point) values per cylinder, so the
truncated shift is a full shift with state-dependent weights. Its weight
matrix M_ab = e^{v_b} has rank one, which turns periodic partition functions
into closed forms: Z_n([a]) = e^{v_a}·S^{n−1} with S = Σ_b e^{v_b}.
"""

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp
from scipy.stats import linregress

from horseshoe_thermo.errors import DegenerateError, PreconditionError, RangeError
from horseshoe_thermo.inducing import InducedPotentialTable
from horseshoe_thermo.spectral import EigenTriple, leading_eigen
from horseshoe_thermo.symbolic import CylinderId, amalgamate, orbit_from_itinerary

logger = logging.getLogger(__name__)

# context symbols on each side of a variation window
_VARIATION_TAIL = 8


class Verdict(enum.Enum):
    """Three-valued outcome of a numerical certificate."""

    HOLDS = "HOLDS"
    FAILS = "FAILS"
    INCONCLUSIVE = "INCONCLUSIVE"


# ── Variations ──


@dataclass
class VariationProfile:
    """Var_k lower estimates with a geometric fit Var_k ≤ C·a^k.

    Attributes:
        k_values: The k at which Var_k was estimated.
        var_lower: Sampled lower bounds, reported as-is.
        C: Fitted prefactor.
        a: Fitted ratio.
        r_squared: Goodness of the log-linear fit (1 when nothing was fitted).
        holder: Whether the base potential has a finite Hölder constant.
    """

    k_values: np.ndarray
    var_lower: np.ndarray
    C: float
    a: float
    r_squared: float = 1.0
    holder: bool = True

    @property
    def certified(self) -> bool:
        """Locally Hölder numerically: a < 1 and φ itself Hölder."""
        return self.holder and self.a < 1.0

    def bound(self, k: int) -> float:
        return self.C * self.a**k


def _central_sum(table: InducedPotentialTable, symbols: list[CylinderId], centre: int) -> float:
    # φ_ρ at the symbol in position ``centre`` of the amalgamated window
    offset = len(amalgamate(symbols[:centre])) - 1 if centre else 0
    orbit = orbit_from_itinerary(amalgamate(symbols), table.params)
    steps = symbols[centre].induced_time
    return float(table.phi.on_horseshoe(orbit.points[offset : offset + steps]).sum())


def variation_estimate(
    table: InducedPotentialTable,
    k: int,
    samples: int,
    rng: np.random.Generator,
) -> float:
    """Sampled lower bound for Var_k of the induced potential.

    Each pair shares the 2k − 1 central symbols and draws independent tails of
    ``_VARIATION_TAIL`` symbols on each side, uniformly from the table's alphabet.

    Raises:
        RangeError: If k < 1.
    """
    if k < 1:
        raise RangeError(f"k must be at least 1, got {k}")
    symbols = table.symbols
    if not symbols:
        return 0.0
    n = len(symbols)
    centre = _VARIATION_TAIL + k - 1
    best = 0.0
    for _ in range(samples):
        core = [symbols[j] for j in rng.integers(n, size=2 * k - 1)]
        values = []
        for _side in range(2):
            left = [symbols[j] for j in rng.integers(n, size=_VARIATION_TAIL)]
            right = [symbols[j] for j in rng.integers(n, size=_VARIATION_TAIL)]
            values.append(_central_sum(table, [*left, *core, *right], centre))
        best = max(best, abs(values[0] - values[1]))
    return best


def variation_profile(
    table: InducedPotentialTable,
    k_values: list[int],
    samples: int,
    rng: np.random.Generator,
) -> VariationProfile:
    """Estimate Var_k over ``k_values`` and fit log Var_k linearly in k.

    Zero estimates are left out of the fit. All-zero profiles fit (C, a) = (0, 0).
    """
    ks = np.asarray(k_values, dtype=int)
    var = np.array([variation_estimate(table, int(k), samples, rng) for k in ks])
    positive = var > 0.0
    holder = table.phi.is_holder
    if positive.sum() == 0:
        return VariationProfile(ks, var, C=0.0, a=0.0, holder=holder)
    if positive.sum() == 1:
        # one nonzero value bounds nothing about decay
        return VariationProfile(
            ks, var, C=float(var[positive][0]), a=1.0, r_squared=0.0, holder=holder
        )

    fit = linregress(ks[positive], np.log(var[positive]))
    a = math.exp(fit.slope)
    # lift the prefactor so the fit dominates every sample
    C = float(np.max(var[positive] / a ** ks[positive]))
    logger.debug("Variation fit: C=%.4g a=%.4g r^2=%.3f", C, a, fit.rvalue**2)
    return VariationProfile(ks, var, C=C, a=a, r_squared=float(fit.rvalue**2), holder=holder)


@dataclass
class SummabilityReport:
    """Σ k·Var_k split into a computed part and a geometric tail.

    Attributes:
        partial_sum: Σ_{k≤k_max} k·Var_k, sampled values where present, fit elsewhere.
        tail_bound: C·Σ_{k>k_max} k·a^k, infinite when a ≥ 1.
        total: partial_sum + tail_bound.
        verdict: HOLDS with a finite bound, INCONCLUSIVE otherwise.
    """

    partial_sum: float
    tail_bound: float
    total: float
    verdict: Verdict


def geometric_moment_tail(a: float, start: int) -> float:
    """Σ_{k≥start} k·a^k = a^start·(start − (start − 1)·a)/(1 − a)² for 0 ≤ a < 1."""
    if a >= 1.0:
        return math.inf
    if a == 0.0:
        return 0.0
    return a**start * (start - (start - 1) * a) / (1.0 - a) ** 2


def strong_summability_check(profile: VariationProfile, k_max: int) -> SummabilityReport:
    """Bound Σ_{k≥1} k·Var_k from a variation profile."""
    sampled = dict(zip(profile.k_values.tolist(), profile.var_lower.tolist(), strict=True))
    partial = math.fsum(k * sampled.get(k, profile.bound(k)) for k in range(1, k_max + 1))
    tail = profile.C * geometric_moment_tail(profile.a, k_max + 1) if profile.C > 0.0 else 0.0
    finite = math.isfinite(tail) and profile.holder
    return SummabilityReport(
        partial_sum=partial,
        tail_bound=tail,
        total=partial + tail,
        verdict=Verdict.HOLDS if finite else Verdict.INCONCLUSIVE,
    )


# ── Gurevich pressure ──


@dataclass
class PressureBracket:
    """Bracket [lower, upper] for the Gurevich pressure of a truncated table.

    Attributes:
        lower: (1/n) log Z_n([base]) from inf-values at n = n_max.
        upper: Trace bound log Σ e^{sup}, valid for every n.
        lower_limit: n → ∞ limit of the lower sequence, log Σ e^{inf}.
        upper_limit: Same as ``upper`` (the trace bound does not move with n).
        point: log Σ e^{point}, the point-value growth rate.
        K: Highest level of the alphabet.
        n_max: Orbit-length truncation.
        base: Base symbol of the cylinder sums.
        lower_sequence: The lower values for n = 1..n_max.
    """

    lower: float
    upper: float
    lower_limit: float
    upper_limit: float
    point: float
    K: int
    n_max: int
    base: CylinderId | None
    lower_sequence: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def overlaps(self, other: "PressureBracket") -> bool:
        return self.lower <= other.upper and other.lower <= self.upper


def gurevich_pressure(
    table: InducedPotentialTable,
    K: int,
    base: CylinderId | None = None,
    n_max: int = 200,
) -> PressureBracket:
    """Gurevich pressure bracket of the table restricted to levels ≤ K.

    Args:
        table: Induced potential table.
        K: Alphabet truncation.
        base: Base symbol; defaults to the first symbol of S_K.
        n_max: Orbit length at which the lower bracket is read.

    Raises:
        DegenerateError: If S_K is empty.
        PreconditionError: If ``base`` is not in S_K.
    """
    sub = table.restricted(K)
    if not sub.symbols:
        raise DegenerateError(f"alphabet S_{K} is empty")
    base = base if base is not None else sub.symbols[0]
    if base not in sub.symbols:
        raise PreconditionError(f"base symbol {base} is not in S_{K}")
    j = sub.symbols.index(base)

    log_s_inf = float(logsumexp(sub.inf))
    log_s_sup = float(logsumexp(sub.sup))
    n = np.arange(1, n_max + 1)
    lower_sequence = (sub.inf[j] + (n - 1) * log_s_inf) / n
    bracket = PressureBracket(
        lower=float(lower_sequence[-1]),
        upper=log_s_sup,
        lower_limit=log_s_inf,
        upper_limit=log_s_sup,
        point=float(logsumexp(sub.point)),
        K=K,
        n_max=n_max,
        base=base,
        lower_sequence=lower_sequence,
    )
    logger.debug(
        "Gurevich bracket K=%d n=%d base=%s: [%.6g, %.6g]",
        K,
        n_max,
        base,
        bracket.lower,
        bracket.upper,
    )
    return bracket


# ── Gibbs measure ──


@dataclass
class GibbsApprox:
    """Gibbs measure of the truncated table.

    Attributes:
        pressure: Bracket of the same table.
        symbols: Alphabet, aligned with ``masses``.
        masses: Cylinder masses, positive and summing to 1.
        eigen: Leading eigen-triple of the shifted weight matrix.
        log_pressure: log λ with the shift added back, equal to ``pressure.point``.
        gibbs_constant: Smallest K_g with ν(D)/e^{Ψ − P} ∈ [1/K_g, K_g] on S_K.
    """

    pressure: PressureBracket
    symbols: list[CylinderId]
    masses: np.ndarray
    eigen: EigenTriple
    log_pressure: float
    gibbs_constant: float

    @property
    def cylinder_measure(self) -> dict[CylinderId, float]:
        return dict(zip(self.symbols, self.masses.tolist(), strict=True))

    def level_masses(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for cyl, mass in zip(self.symbols, self.masses.tolist(), strict=True):
            out[cyl.level] = out.get(cyl.level, 0.0) + mass
        return out

    def rows(self) -> list[dict]:
        return [
            {"level": cyl.level, "word": cyl.word, "mass": mass}
            for cyl, mass in zip(self.symbols, self.masses.tolist(), strict=True)
        ]


def gibbs_approx(table: InducedPotentialTable, K: int, n_max: int = 200) -> GibbsApprox:
    """Leading eigen-data of the point-value weight matrix and its Gibbs masses.

    Raises:
        DegenerateError: If S_K is empty.
        ConvergenceError: If power iteration does not settle.
    """
    sub = table.restricted(K)
    bracket = gurevich_pressure(table, K, n_max=n_max)
    v = sub.point
    vmax = float(v.max())
    weights = np.exp(v - vmax)
    matrix = np.tile(weights, (len(v), 1))
    eigen = leading_eigen(matrix, tol=1e-12)

    masses = eigen.left * eigen.right
    masses = masses / masses.sum()
    log_pressure = math.log(eigen.value) + vmax
    gibbs_constant = float(np.max(np.maximum(np.exp(sub.sup - v), np.exp(v - sub.inf))))
    logger.info(
        "Gibbs measure on S_%d: %d symbols, P=%.8g, K_g=%.4g, gap=%.3g",
        K,
        len(sub.symbols),
        log_pressure,
        gibbs_constant,
        eigen.gap,
    )
    return GibbsApprox(
        pressure=bracket,
        symbols=list(sub.symbols),
        masses=masses,
        eigen=eigen,
        log_pressure=log_pressure,
        gibbs_constant=gibbs_constant,
    )


def gibbs_ratio_bounds(g: GibbsApprox, table: InducedPotentialTable) -> tuple[float, float]:
    """min and max over S_K of ν(D)/e^{Ψ(D) − P}, with Ψ read at the point value."""
    sub = table.restricted(g.pressure.K)
    ratios = g.masses / np.exp(sub.point - g.log_pressure)
    return float(ratios.min()), float(ratios.max())


# ── Summability and recurrence ──


@dataclass
class Eq8Report:
    """Truncated sum of Σ τ·sup e^{φ_ρ − τP + τε} and its geometric tail.

    Attributes:
        partial_sum: Sum over levels ≤ K.
        ratio: e^{sup φ − P + ε}; the tail converges when it is below 1.
        tail_bound: Σ_{τ≥K} τ·ratio^τ, infinite when ratio ≥ 1.
        sup_phi: The sup of φ used for the ratio.
        sup_declared: Whether ``sup_phi`` is a declared bound or a table estimate.
        verdict: HOLDS with a finite bound, INCONCLUSIVE otherwise.
    """

    partial_sum: float
    ratio: float
    tail_bound: float
    sup_phi: float
    sup_declared: bool
    verdict: Verdict


def _sup_phi(table: InducedPotentialTable) -> tuple[float, bool]:
    phi = table.phi
    if phi.bounds is not None:
        return phi.bounds[1] + table.shift_per_step, True
    return float(np.max(table.sup / table.induced_times)), False


def summability_eq8(
    table: InducedPotentialTable, eps: float, K: int, P_shift: float
) -> Eq8Report:
    """Summability of τ·e^{(φ − P)_ρ + τε} over levels, with a certified tail.

    Raises:
        RangeError: If eps ≤ 0.
    """
    if eps <= 0.0:
        raise RangeError(f"eps must be positive, got {eps}")
    sub = table.restricted(K)
    partial = 0.0
    if sub.symbols:
        tau = sub.induced_times
        exponents = sub.sup - tau * P_shift + tau * eps
        for level in np.unique(sub.levels):
            at = sub.levels == level
            partial += float(level - 1) * math.exp(float(exponents[at].max()))

    sup_phi, declared = _sup_phi(table)
    exponent = sup_phi - P_shift + eps
    ratio = math.exp(exponent) if exponent < 700 else math.inf
    tail = geometric_moment_tail(ratio, max(K, 1))
    verdict = Verdict.HOLDS if math.isfinite(tail) and declared else Verdict.INCONCLUSIVE
    return Eq8Report(
        partial_sum=partial,
        ratio=ratio,
        tail_bound=tail,
        sup_phi=sup_phi,
        sup_declared=declared,
        verdict=verdict,
    )


@dataclass
class RecurrenceReport:
    """Growth of the shifted pressure bracket as the alphabet grows.

    Attributes:
        delta: The shift δ added per induced step.
        K_values: Truncation levels that have symbols.
        uppers: Upper bracket ends per K.
        lowers: Lower bracket ends (limit values) per K.
        growth_rate: Fitted per-level ratio of the upper-end increments, 0 when they vanish.
        verdict: HOLDS when increments decay geometrically, INCONCLUSIVE otherwise.
    """

    delta: float
    K_values: list[int]
    uppers: list[float]
    lowers: list[float]
    growth_rate: float
    verdict: Verdict


def positive_recurrence_check(
    table: InducedPotentialTable, delta: float, K: int, p_shift: float = 0.0
) -> RecurrenceReport:
    """Bracket of (φ − p_shift)_ρ + δ·τ for every truncation up to K.

    Raises:
        RangeError: If delta < 0.
    """
    if delta < 0.0:
        raise RangeError(f"delta must be nonnegative, got {delta}")
    shifted = table.shifted(delta - p_shift)
    K_values, uppers, lowers = [], [], []
    for k in range(2, K + 1):
        if not shifted.restricted(k).symbols:
            continue
        bracket = gurevich_pressure(shifted, k, n_max=1)
        K_values.append(k)
        uppers.append(bracket.upper)
        lowers.append(bracket.lower_limit)

    increments = np.diff(np.array(uppers))
    positive = increments > 1e-15
    if positive.sum() == 0:
        growth, verdict = 0.0, Verdict.HOLDS
    elif positive.sum() == 1:
        growth, verdict = 1.0, Verdict.INCONCLUSIVE
    else:
        ks = np.array(K_values[1:])[positive]
        fit = linregress(ks, np.log(increments[positive]))
        growth = math.exp(fit.slope)
        verdict = Verdict.HOLDS if growth < 1.0 else Verdict.INCONCLUSIVE
    logger.debug("Recurrence at delta=%.4g: growth %.4g over K=%s", delta, growth, K_values)
    return RecurrenceReport(
        delta=delta,
        K_values=K_values,
        uppers=uppers,
        lowers=lowers,
        growth_rate=growth,
        verdict=verdict,
    )


# ── Counting and tails ──


def c_alpha(alpha: float, n_max: int = 2000) -> float:
    """(1/n)·log Σ_{k≤αn} C(n, k) at n = n_max, accumulated in the log domain.

    Raises:
        RangeError: If alpha is outside (0, 1) or n_max < 100.
    """
    if not 0.0 < alpha < 1.0:
        raise RangeError(f"alpha must lie in (0, 1), got {alpha}")
    if n_max < 100:
        raise RangeError(f"n_max must be at least 100, got {n_max}")
    k = np.arange(0, math.floor(alpha * n_max) + 1)
    log_binom = gammaln(n_max + 1) - gammaln(k + 1) - gammaln(n_max - k + 1)
    return float(logsumexp(log_binom)) / n_max


@dataclass
class TailFit:
    """Fit of ν({τ + 1 ≥ m}) ≈ C·θ^m.

    Attributes:
        C: Prefactor.
        theta: Ratio; 0 when fewer than two tail masses are positive.
        levels: m values.
        tails: Tail masses ν({level ≥ m}).
        residuals: Relative residual per level (NaN where the tail vanishes).
    """

    C: float
    theta: float
    levels: np.ndarray
    tails: np.ndarray
    residuals: np.ndarray


def exponential_tail_check(g: GibbsApprox) -> TailFit:
    """Fit the level tail masses of a Gibbs approximation to a geometric law."""
    per_level = g.level_masses()
    K = g.pressure.K
    levels = np.arange(2, K + 1)
    masses = np.array([per_level.get(int(m), 0.0) for m in levels])
    tails = np.cumsum(masses[::-1])[::-1]
    positive = tails > 0.0
    residuals = np.full(len(levels), np.nan)
    if positive.sum() < 2:
        C = float(tails[0]) if len(tails) else 0.0
        return TailFit(C=C, theta=0.0, levels=levels, tails=tails, residuals=residuals)

    fit = linregress(levels[positive], np.log(tails[positive]))
    C, theta = math.exp(fit.intercept), math.exp(fit.slope)
    model = C * theta ** levels[positive]
    residuals[positive] = np.abs(tails[positive] - model) / tails[positive]
    return TailFit(C=C, theta=theta, levels=levels, tails=tails, residuals=residuals)
