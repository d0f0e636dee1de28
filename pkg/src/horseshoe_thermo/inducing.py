"""Inducing scheme: tower, induced potentials, lifted measures and their checks.

An inducing symbol D of level i advances the base shift by τ(D) = i − 1 steps,
because consecutive level words share their boundary 1. Everything below that
mentions a return time (tower floors, lifts, Kač–Abramov, summability) uses τ.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from horseshoe_thermo.config import MapParams
from horseshoe_thermo.errors import DegenerateError, PreconditionError, RangeError
from horseshoe_thermo.potentials import PotentialSpec
from horseshoe_thermo.symbolic import (
    DEFAULT_ENUMERATION_CAP,
    CylinderId,
    alphabet,
    amalgamate,
    enumerate_level,
    orbit_from_itinerary,
    periodic_orbit,
)

logger = logging.getLogger(__name__)


# ── Measures on the induced shift ──


@dataclass
class FiniteShiftMeasure:
    """A Bernoulli measure on the truncated induced alphabet.

    Symbols are drawn independently with the given weights, which makes the
    measure T-invariant for the induced map T = σ^τ.

    Attributes:
        weights: Mass of each cylinder; sums to 1.
    """

    weights: dict[CylinderId, float]

    def __post_init__(self) -> None:
        if not self.weights:
            raise DegenerateError("a shift measure needs at least one cylinder")
        if any(w < 0.0 for w in self.weights.values()):
            raise RangeError("cylinder weights must be nonnegative")
        total = math.fsum(self.weights.values())
        if abs(total - 1.0) > 1e-12:
            raise PreconditionError(f"cylinder weights sum to {total!r}, not 1")

    @classmethod
    def point_mass(cls, cyl: CylinderId) -> "FiniteShiftMeasure":
        return cls({cyl: 1.0})

    @classmethod
    def uniform(cls, cylinders: list[CylinderId]) -> "FiniteShiftMeasure":
        return cls.bernoulli(cylinders, [1.0] * len(cylinders))

    @classmethod
    def bernoulli(cls, cylinders: list[CylinderId], probs: list[float]) -> "FiniteShiftMeasure":
        """Normalize ``probs`` and attach them to ``cylinders``."""
        if len(cylinders) != len(probs):
            raise PreconditionError("one probability per cylinder is required")
        p = np.asarray(probs, dtype=float)
        if p.sum() <= 0.0:
            raise DegenerateError("probabilities sum to zero")
        p = p / p.sum()
        # absorb rounding so the fsum check passes exactly
        p[-1] = 1.0 - math.fsum(p[:-1])
        return cls(dict(zip(cylinders, (float(v) for v in p), strict=True)))

    @property
    def cylinders(self) -> list[CylinderId]:
        return list(self.weights)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array(list(self.weights.values()))

    def integral_tau(self) -> float:
        """∫τ dν = Σ ν(D)·(level(D) − 1)."""
        return math.fsum(w * cyl.induced_time for cyl, w in self.weights.items())

    def entropy(self) -> float:
        """h_ν(T) = −Σ p log p for the Bernoulli measure."""
        p = self.probabilities
        p = p[p > 0.0]
        return float(-(p * np.log(p)).sum())


# ── Tower ──


@dataclass
class TowerDescriptor:
    """The tower over the truncated alphabet.

    Attributes:
        K: Highest level kept.
        levels: Level → its cylinders (empty levels included).
    """

    K: int
    levels: dict[int, list[CylinderId]]

    @staticmethod
    def floor_count(level: int) -> int:
        return level - 1

    def floors(self) -> list[tuple[CylinderId, int]]:
        """Every (cylinder, floor) pair, floors k = 0..τ(D)−1."""
        return [
            (cyl, k)
            for cylinders in self.levels.values()
            for cyl in cylinders
            for k in range(self.floor_count(cyl.level))
        ]


def build_tower(K: int, alpha: float, cap: int = DEFAULT_ENUMERATION_CAP) -> TowerDescriptor:
    """Enumerate levels 2..K and lay out their floors."""
    return TowerDescriptor(K=K, levels={i: enumerate_level(i, alpha, cap) for i in range(2, K + 1)})


@dataclass
class TowerMeasure:
    """A measure on tower floors.

    Attributes:
        floors: (cylinder, floor index, mass) triples.
        integral_tau: The normalizer ∫τ dν used by the lift.
    """

    floors: list[tuple[CylinderId, int, float]]
    integral_tau: float

    @property
    def total_mass(self) -> float:
        return math.fsum(mass for _, _, mass in self.floors)


def lift_measure(nu: FiniteShiftMeasure) -> TowerMeasure:
    """Spread ν over the tower: each floor of D gets ν(D)/∫τ dν.

    Raises:
        DegenerateError: If ∫τ dν = 0.
    """
    norm = nu.integral_tau()
    if norm <= 0.0:
        raise DegenerateError("∫τ dν vanishes; nothing to lift")
    floors = [
        (cyl, k, w / norm)
        for cyl, w in nu.weights.items()
        for k in range(TowerDescriptor.floor_count(cyl.level))
    ]
    return TowerMeasure(floors=floors, integral_tau=norm)


# ── Induced potentials ──


@dataclass
class InducedValue:
    """inf/sup/point of φ_ρ over one cylinder.

    Attributes:
        inf: Lower estimate, padded by ``pad``.
        sup: Upper estimate, padded by ``pad``.
        point: Value at the T-periodic point D D D ….
        pad: Hölder allowance for the unsampled tails.
    """

    inf: float
    sup: float
    point: float
    pad: float = 0.0


def _tail_uniforms(seed: int, cyl: CylinderId, sample: int, side: int, depth: int) -> np.ndarray:
    # one stream per (sample, side) keeps shallow tails a prefix of deep ones
    rng = np.random.default_rng([seed, cyl.level, int(cyl.word, 2), sample, side])
    return rng.random(depth)


def periodic_induced_sum(cyl: CylinderId, phi: PotentialSpec, params: MapParams) -> float:
    """φ_ρ at the T-periodic point of D: Σ φ over one period of the cycle D[:-1]."""
    points = periodic_orbit(cyl.word[:-1], params)
    return float(phi.on_horseshoe(points).sum())


def induced_potential(
    cyl: CylinderId,
    phi: PotentialSpec,
    depth: int,
    params: MapParams,
    tail_alphabet: list[CylinderId] | None = None,
    samples: int | None = None,
    seed: int = 0,
) -> InducedValue:
    """Estimate inf, sup and a point value of φ_ρ on the cylinder D.

    φ_ρ sums φ over the τ(D) = i − 1 base positions of D. Tails of ``depth``
    inducing symbols on both sides are sampled from ``tail_alphabet``; the pad
    C·Σ_k d_k^ξ bounds how far unsampled tails can move each summand, with d_k
    the reconstruction width in the coordinates φ depends on.

    Args:
        cyl: The cylinder.
        phi: Potential on Λ (planar potentials are read through π).
        depth: Inducing symbols of context on each side.
        params: Map constants.
        tail_alphabet: Symbols tails are drawn from; defaults to ``[cyl]``.
        samples: Number of sampled tail pairs; defaults to 2·depth.
        seed: Base seed of the tail streams.
    """
    tails = tail_alphabet or [cyl]
    samples = samples if samples is not None else 2 * depth
    point = periodic_induced_sum(cyl, phi, params)
    steps = cyl.induced_time
    dependent = np.array(phi.depends_on, dtype=bool)

    chunks = []
    pads = []
    for s in range(samples):
        left = [tails[int(u * len(tails))] for u in _tail_uniforms(seed, cyl, s, 0, depth)]
        right = [tails[int(u * len(tails))] for u in _tail_uniforms(seed, cyl, s, 1, depth)]
        left.reverse()
        offset = len(amalgamate(left)) - 1 if left else 0
        orbit = orbit_from_itinerary(amalgamate([*left, cyl, *right]), params)
        chunks.append(orbit.points[offset : offset + steps])
        spread = orbit.widths[offset : offset + steps][:, dependent].sum(axis=1)
        if phi.is_holder and phi.holder_constant > 0.0:
            pads.append(phi.holder_constant * float((spread**phi.holder_exponent).sum()))

    if chunks:
        sums = phi.on_horseshoe(np.vstack(chunks)).reshape(samples, steps).sum(axis=1)
        lo, hi = min(float(sums.min()), point), max(float(sums.max()), point)
    else:
        lo = hi = point
    pad = max(pads) if pads else 0.0
    return InducedValue(inf=lo - pad, sup=hi + pad, point=point, pad=pad)


@dataclass
class InducedPotentialTable:
    """Per-cylinder (inf, sup, point) values of φ_ρ over S_K.

    Attributes:
        symbols: The truncated alphabet, in level then lexicographic order.
        inf: Lower values, aligned with ``symbols``.
        sup: Upper values.
        point: Point values.
        tail_pad: Largest Hölder pad used.
        depth: Tail depth in inducing symbols.
        phi: The base potential.
        params: Map constants.
        alpha: Frequency threshold of the scheme.
        pad_certified: False when φ has no finite Hölder constant.
    """

    symbols: list[CylinderId]
    inf: np.ndarray
    sup: np.ndarray
    point: np.ndarray
    tail_pad: float
    depth: int
    phi: PotentialSpec
    params: MapParams
    alpha: float
    pad_certified: bool = True
    shift_per_step: float = field(default=0.0)

    def __post_init__(self) -> None:
        if not (np.all(self.inf <= self.point + 1e-12) and np.all(self.point <= self.sup + 1e-12)):
            raise PreconditionError("induced table violates inf <= point <= sup")

    @property
    def K(self) -> int:
        return max((cyl.level for cyl in self.symbols), default=0)

    @property
    def induced_times(self) -> np.ndarray:
        return np.array([cyl.induced_time for cyl in self.symbols], dtype=float)

    @property
    def levels(self) -> np.ndarray:
        return np.array([cyl.level for cyl in self.symbols], dtype=int)

    def entry(self, cyl: CylinderId) -> InducedValue:
        j = self.symbols.index(cyl)
        return InducedValue(float(self.inf[j]), float(self.sup[j]), float(self.point[j]))

    def shifted(self, per_step: float) -> "InducedPotentialTable":
        """Table of (φ + c)_ρ = φ_ρ + c·τ."""
        add = per_step * self.induced_times
        return InducedPotentialTable(
            symbols=list(self.symbols),
            inf=self.inf + add,
            sup=self.sup + add,
            point=self.point + add,
            tail_pad=self.tail_pad,
            depth=self.depth,
            phi=self.phi,
            params=self.params,
            alpha=self.alpha,
            pad_certified=self.pad_certified,
            shift_per_step=self.shift_per_step + per_step,
        )

    def restricted(self, K: int) -> "InducedPotentialTable":
        """The sub-table of levels ≤ K."""
        keep = self.levels <= K
        return InducedPotentialTable(
            symbols=[s for s, k in zip(self.symbols, keep, strict=True) if k],
            inf=self.inf[keep],
            sup=self.sup[keep],
            point=self.point[keep],
            tail_pad=self.tail_pad,
            depth=self.depth,
            phi=self.phi,
            params=self.params,
            alpha=self.alpha,
            pad_certified=self.pad_certified,
            shift_per_step=self.shift_per_step,
        )


def build_induced_table(
    phi: PotentialSpec,
    K: int,
    alpha: float,
    params: MapParams,
    depth: int = 8,
    samples: int | None = None,
    seed: int = 0,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> InducedPotentialTable:
    """Induced potential table over S_K, tails drawn uniformly from S_K."""
    symbols = alphabet(K, alpha, cap)
    values = [
        induced_potential(
            cyl, phi, depth, params, tail_alphabet=symbols, samples=samples, seed=seed
        )
        for cyl in symbols
    ]
    logger.info(
        "Induced table for %s: %d symbols up to level %d (depth %d)",
        phi.label,
        len(symbols),
        K,
        depth,
    )
    return InducedPotentialTable(
        symbols=symbols,
        inf=np.array([v.inf for v in values]),
        sup=np.array([v.sup for v in values]),
        point=np.array([v.point for v in values]),
        tail_pad=max((v.pad for v in values), default=0.0),
        depth=depth,
        phi=phi,
        params=params,
        alpha=alpha,
        pad_certified=phi.is_holder,
    )


# ── e(i, A) and liftability ──


def _meets(word: str, k: int, pattern: str) -> bool:
    # beyond the level word the sequence is free except that position i follows a 1
    i = len(word)
    for j, symbol in enumerate(pattern):
        pos = k + j
        if pos < i:
            if word[pos] != symbol:
                return False
        elif pos == i and symbol == "1":
            return False
    return "11" not in pattern


def e_of(i: int, pattern: str, alpha: float, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """e(i, A) for the cylinder A = [pattern] at offset 0.

    Counts positions 0 ≤ k ≤ i − 1 at which some element of Σ_i, shifted by k,
    lands in A, divided by i. An empty level gives 0.
    """
    words = [cyl.word for cyl in enumerate_level(i, alpha, cap)]
    if not words:
        return 0.0
    hits = sum(1 for k in range(i) if any(_meets(w, k, pattern) for w in words))
    return hits / i


def one_position_bound(i: int, alpha: float) -> float:
    """Provable bound on e(i, [1]): interior position p carries a 1 only if p + 1 ≥ 2/α."""
    blocked = sum(1 for p in range(1, i - 1) if (p + 1) * alpha < 2.0)
    return (i - blocked) / i


@dataclass
class LiftabilityReport:
    """Outcome of comparing μ(A) with sup_{i>N} e(i, A).

    Attributes:
        mu_A: The mass μ(A).
        pattern: Defining word of A.
        alpha: Frequency threshold.
        N: Levels above N are compared.
        cap: Largest level enumerated.
        sup_e: max of e(i, A) over N < i ≤ cap.
        argmax_level: Level attaining ``sup_e``.
        tail_bound: Bound on e(i, A) at level cap + 1; beyond it the bound tends to 1.
        max_one_frequency: Largest 1-frequency of a single level word, per level.
        passes_truncated: μ(A) > sup_e.
        certified: μ(A) exceeds both ``sup_e`` and every level beyond the cap.
        margin: μ(A) − sup_e.
    """

    mu_A: float
    pattern: str
    alpha: float
    N: int
    cap: int
    sup_e: float
    argmax_level: int | None
    tail_bound: float
    max_one_frequency: dict[int, float]
    passes_truncated: bool
    certified: bool
    margin: float


def liftability_check(
    mu_A: float, pattern: str, alpha: float, N: int, cap: int = 16
) -> LiftabilityReport:
    """Evaluate μ(A) > sup_{i>N} e(i, A) by brute force up to ``cap``."""
    e_values = {i: e_of(i, pattern, alpha, cap) for i in range(N + 1, cap + 1)}
    argmax = max(e_values, key=e_values.get) if e_values else None
    sup_e = e_values[argmax] if argmax is not None else 0.0

    # e(i, [1]) ≤ one_position_bound(i), which increases to 1 without reaching it;
    # for other patterns only the trivial e ≤ 1 is available, and it can be attained
    if pattern == "1":
        tail_bound = one_position_bound(cap + 1, alpha)
        tail_attained = False
    else:
        tail_bound = 1.0
        tail_attained = True
    max_freq = {}
    for i in range(N + 1, cap + 1):
        words = [c.word for c in enumerate_level(i, alpha, cap)]
        max_freq[i] = max((w.count("1") / i for w in words), default=0.0)

    passes = mu_A > sup_e
    certified = passes and (mu_A > 1.0 or (mu_A >= 1.0 and not tail_attained))
    logger.debug("Liftability of [%s] at N=%d: sup e=%.4f, mu=%.4f", pattern, N, sup_e, mu_A)
    return LiftabilityReport(
        mu_A=mu_A,
        pattern=pattern,
        alpha=alpha,
        N=N,
        cap=cap,
        sup_e=sup_e,
        argmax_level=argmax,
        tail_bound=tail_bound,
        max_one_frequency=max_freq,
        passes_truncated=passes,
        certified=certified,
        margin=mu_A - sup_e,
    )


def liftability_scan(
    mu_A: float,
    pattern: str,
    alpha: float,
    cap: int = 16,
    Ns: tuple[int, ...] = (2, 4, 8),
) -> tuple[LiftabilityReport, list[LiftabilityReport]]:
    """Run the check for several N and return the best margin with all reports."""
    reports = [liftability_check(mu_A, pattern, alpha, N, cap) for N in Ns if N < cap]
    if not reports:
        raise RangeError(f"every N in {Ns} is at or above the cap {cap}")
    best = max(reports, key=lambda r: r.margin)
    return best, reports


# ── Kač–Abramov ──


def block_entropy_rate(word: str, n: int) -> float:
    """Conditional block entropy H_n − H_{n−1} of a sampled string (nats).

    Raises:
        RangeError: If n < 1, n > 62 or the word is shorter than n.
    """
    if not 1 <= n <= 62:
        raise RangeError(f"block length must lie in [1, 62], got {n}")
    if len(word) < n:
        raise RangeError(f"word of length {len(word)} is shorter than the block length {n}")
    symbols = np.frombuffer(word.encode(), dtype=np.uint8).astype(np.int64) - ord("0")

    def block_entropy(m: int) -> float:
        if m == 0:
            return 0.0
        codes = sliding_window_view(symbols, m) @ (1 << np.arange(m - 1, -1, -1, dtype=np.int64))
        _, counts = np.unique(codes, return_counts=True)
        p = counts / counts.sum()
        return float(-(p * np.log(p)).sum())

    return block_entropy(n) - block_entropy(n - 1)


@dataclass
class KacAbramovReport:
    """Both sides of the Kač–Abramov identities for one (ν, φ).

    Attributes:
        lhs: ∫φ d𝓛(ν) · ∫τ dν.
        rhs: ∫φ_ρ dν.
        abs_err: |lhs − rhs|.
        integral_tau: ∫τ dν.
        induced_entropy: h_ν(T).
        predicted_entropy: h_ν(T)/∫τ dν.
        estimated_entropy: Block-entropy estimate from a sampled amalgamated string.
        entropy_rel_err: Relative gap between the last two.
        block_length: Block length of the estimate.
    """

    lhs: float
    rhs: float
    abs_err: float
    integral_tau: float
    induced_entropy: float
    predicted_entropy: float
    estimated_entropy: float | None = None
    entropy_rel_err: float | None = None
    block_length: int | None = None


def kac_abramov_check(
    nu: FiniteShiftMeasure,
    phi: PotentialSpec,
    params: MapParams,
    rng: np.random.Generator | None = None,
    n_symbols: int = 200_000,
    block_length: int = 12,
) -> KacAbramovReport:
    """Check ∫φ d𝓛(ν)·∫τ dν = ∫φ_ρ dν and h_𝓛(ν)·∫τ dν = h_ν(T).

    Both integral sides read the same orbit evaluations (the floors of each
    cylinder's T-periodic point), so they agree to rounding. The entropy side
    is only estimated when ``rng`` is given.
    """
    lifted = lift_measure(nu)
    floor_values: dict[CylinderId, np.ndarray] = {}
    for cyl in nu.weights:
        floor_values[cyl] = phi.on_horseshoe(periodic_orbit(cyl.word[:-1], params))

    lifted_integral = math.fsum(mass * floor_values[cyl][k] for cyl, k, mass in lifted.floors)
    lhs = lifted_integral * lifted.integral_tau
    rhs = math.fsum(w * math.fsum(floor_values[cyl]) for cyl, w in nu.weights.items())

    h_induced = nu.entropy()
    report = KacAbramovReport(
        lhs=lhs,
        rhs=rhs,
        abs_err=abs(lhs - rhs),
        integral_tau=lifted.integral_tau,
        induced_entropy=h_induced,
        predicted_entropy=h_induced / lifted.integral_tau,
    )
    if rng is not None:
        cylinders = nu.cylinders
        draws = rng.choice(len(cylinders), size=n_symbols, p=nu.probabilities)
        sampled = amalgamate([cylinders[j] for j in draws])
        estimate = block_entropy_rate(sampled, block_length)
        report.estimated_entropy = estimate
        report.block_length = block_length
        if report.predicted_entropy > 0.0:
            gap = abs(estimate - report.predicted_entropy)
            report.entropy_rel_err = gap / report.predicted_entropy
        else:
            report.entropy_rel_err = abs(estimate)
    return report
