"""Invariant-measure approximations and their thermodynamic quantities.

Two kinds of measure are handled: equidistributions on finitely many atoms
(periodic orbits, δ_Q, δ_P and their convex combinations) and Gibbs–Markov
measures on the chain of 11-free L-blocks, which stand in for equilibrium
states.
"""

import enum
import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import linregress

from horseshoe_thermo.config import MapParams
from horseshoe_thermo.errors import (
    AdmissibilityError,
    DomainError,
    InsufficientSignal,
    KindError,
    PreconditionError,
    RangeError,
)
from horseshoe_thermo.maps import (
    P,
    Q,
    apply_F,
    apply_G,
    apply_pi,
    central_log_derivative_values,
)
from horseshoe_thermo.potentials import PLANAR, PotentialSpec, holder_pad
from horseshoe_thermo.spectral import leading_eigen
from horseshoe_thermo.symbolic import (
    admissible_words,
    count_admissible,
    cyclic_admissible_words,
    is_cyclic_admissible,
    orbit_from_itinerary,
    periodic_cycles,
    periodic_orbit,
)

logger = logging.getLogger(__name__)

LOG_OMEGA = math.log((1.0 + math.sqrt(5.0)) / 2.0)

# fewest consecutive correlations above noise that a decay fit accepts
_MIN_USABLE = 5


class MeasureKind(enum.Enum):
    """How a measure is represented."""

    ATOMIC = "atomic"
    MARKOV = "markov"


def _atom_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest distance from an atom of ``a`` to the nearest atom of ``b``."""
    if len(a) == 0:
        return 0.0
    gaps = np.abs(a[:, None, :] - b[None, :, :]).sum(axis=2)
    return float(gaps.min(axis=1).max())


@dataclass
class MeasureApprox:
    """A finitely supported or block-Markov measure.

    Attributes:
        kind: Atomic or Markov.
        atoms: Support points (atomic) or block representatives (Markov), shape (n, 3).
        weights: Atom weights or the stationary vector; sums to 1.
        entropy: Closed-form entropy (0 for atomic measures).
        label: Human-readable name.
        domain: ``"horseshoe"`` or ``"planar"``.
        blocks: L-blocks of a Markov measure.
        transition: Row-stochastic block transition matrix.
        invariance_defect: Largest gap between the image of the support and the
            support itself, when checked.
        diagnostics: Extra numbers recorded by the constructor.
    """

    kind: MeasureKind
    atoms: np.ndarray
    weights: np.ndarray
    entropy: float = 0.0
    label: str = ""
    domain: str = "horseshoe"
    blocks: list[str] = field(default_factory=list)
    transition: np.ndarray | None = None
    invariance_defect: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.atoms):
            raise PreconditionError("one weight per atom is required")
        if abs(math.fsum(self.weights) - 1.0) > 1e-9:
            raise PreconditionError(f"weights sum to {math.fsum(self.weights)!r}, not 1")

    def values(self, phi: PotentialSpec) -> np.ndarray:
        """φ at the atoms; planar potentials are read through π on horseshoe atoms."""
        if self.domain == PLANAR:
            return phi.values(self.atoms)
        return phi.on_horseshoe(self.atoms)

    def integral(self, phi: PotentialSpec) -> float:
        return float(self.weights @ self.values(phi))

    def free_energy(self, phi: PotentialSpec) -> float:
        """h_μ + ∫φ dμ."""
        return self.entropy + self.integral(phi)

    def rows(self) -> list[dict]:
        out = []
        for j, (point, weight) in enumerate(zip(self.atoms, self.weights, strict=True)):
            row = {"x": point[0], "y": point[1], "z": point[2], "weight": weight}
            if self.blocks:
                row["block"] = self.blocks[j]
            out.append(row)
        return out


# ── Atomic measures ──


def delta_Q() -> MeasureApprox:
    return MeasureApprox(MeasureKind.ATOMIC, np.array([Q.as_array()]), np.ones(1), label="delta_Q")


def delta_P() -> MeasureApprox:
    return MeasureApprox(MeasureKind.ATOMIC, np.array([P.as_array()]), np.ones(1), label="delta_P")


def periodic_measure(cycle: str, params: MapParams) -> MeasureApprox:
    """Equidistribution on the periodic orbit with cyclic itinerary ``cycle``.

    The F-invariance defect is recorded: F maps the support onto itself.

    Raises:
        AdmissibilityError: If the cycle contains 11 cyclically.
    """
    if not is_cyclic_admissible(cycle):
        raise AdmissibilityError(f"cycle {cycle!r} contains 11 cyclically")
    atoms = periodic_orbit(cycle, params)
    try:
        defect = _atom_distance(apply_F(atoms, params), atoms)
    except DomainError:
        defect = math.inf
    return MeasureApprox(
        MeasureKind.ATOMIC,
        atoms,
        np.full(len(atoms), 1.0 / len(atoms)),
        label=f"periodic({cycle})",
        invariance_defect=defect,
    )


def convex_combination(measures: list[MeasureApprox], weights: list[float]) -> MeasureApprox:
    """Σ w_j μ_j of atomic measures; entropy is affine.

    Raises:
        KindError: If any measure is Markov.
        PreconditionError: If the weights do not match or do not sum to 1.
    """
    if any(m.kind is not MeasureKind.ATOMIC for m in measures):
        raise KindError("only atomic measures can be combined")
    if len(measures) != len(weights) or not measures:
        raise PreconditionError("one weight per measure is required")
    if abs(math.fsum(weights) - 1.0) > 1e-12 or min(weights) < 0.0:
        raise PreconditionError("combination weights must be a probability vector")
    if len({m.domain for m in measures}) > 1:
        raise PreconditionError("cannot combine horseshoe and planar measures")
    atoms = np.vstack([m.atoms for m in measures])
    w = np.concatenate([c * m.weights for m, c in zip(measures, weights, strict=True)])
    entropy = math.fsum(c * m.entropy for m, c in zip(measures, weights, strict=True))
    label = " + ".join(f"{c:g}*{m.label}" for m, c in zip(measures, weights, strict=True))
    return MeasureApprox(
        MeasureKind.ATOMIC, atoms, w, entropy=entropy, label=label, domain=measures[0].domain
    )


def pushforward_pi(mu: MeasureApprox, params: MapParams) -> MeasureApprox:
    """ν = μ∘π⁻¹ for an atomic μ, with its G-invariance defect.

    Raises:
        KindError: If μ is a Markov measure.
    """
    if mu.kind is not MeasureKind.ATOMIC:
        raise KindError("pushforward_pi projects atoms only; got a Markov measure")
    if mu.domain == PLANAR:
        raise KindError("measure is already planar")
    atoms = apply_pi(mu.atoms)
    try:
        defect = _atom_distance(apply_G(atoms, params), atoms)
    except DomainError:
        defect = math.inf
    return MeasureApprox(
        MeasureKind.ATOMIC,
        atoms,
        mu.weights.copy(),
        entropy=mu.entropy,
        label=f"pi_*({mu.label})",
        domain=PLANAR,
        invariance_defect=defect,
    )


# ── Entropy ──


@dataclass
class EntropyReport:
    """Topological entropy estimates.

    Attributes:
        h_estimate: log(N_n/N_{n−1}) at n = n_used.
        method: How ``h_estimate`` was obtained.
        n_used: Word length.
        naive: (1/n)·log N_n, biased by O(1/n).
        spectral: log of the spectral radius of the 2×2 adjacency matrix.
    """

    h_estimate: float
    method: str
    n_used: int
    naive: float
    spectral: float


def topological_entropy_estimate(n_max: int = 30) -> EntropyReport:
    """Entropy of the golden-mean shift from word counts and from the adjacency matrix.

    Raises:
        RangeError: If n_max < 10.
    """
    if n_max < 10:
        raise RangeError(f"n_max must be at least 10, got {n_max}")
    count, previous = count_admissible(n_max), count_admissible(n_max - 1)
    golden_mean = np.array([[1.0, 1.0], [1.0, 0.0]])
    spectral = math.log(float(np.max(np.abs(np.linalg.eigvals(golden_mean)))))
    return EntropyReport(
        h_estimate=math.log(count) - math.log(previous),
        method="word_count_growth",
        n_used=n_max,
        naive=math.log(count) / n_max,
        spectral=spectral,
    )


# ── Block-Markov measures ──


@dataclass(frozen=True)
class BlockModel:
    """11-free L-blocks with de Bruijn adjacency and a reconstructed point per block.

    Attributes:
        L: Block length.
        blocks: Admissible words of length L, lexicographic.
        adjacency: A[b, b′] = 1 iff b′ extends b by one symbol.
        points: Representative point of each block, read at position L // 2.
        widths: Per-coordinate reconstruction widths of each representative.
    """

    L: int
    blocks: tuple[str, ...]
    adjacency: np.ndarray
    points: np.ndarray
    widths: np.ndarray

    @property
    def centre(self) -> int:
        return self.L // 2


@functools.lru_cache(maxsize=32)
def block_model(L: int, params: MapParams) -> BlockModel:
    """Build (and cache) the block chain for block length L.

    Raises:
        RangeError: If L is outside [2, 12].
    """
    if not 2 <= L <= 12:
        raise RangeError(f"block length must lie in [2, 12], got {L}")
    blocks = admissible_words(L)
    index = {b: j for j, b in enumerate(blocks)}
    adjacency = np.zeros((len(blocks), len(blocks)))
    for j, b in enumerate(blocks):
        for s in "01":
            nxt = b[1:] + s
            if nxt in index:
                adjacency[j, index[nxt]] = 1.0
    c = L // 2
    orbits = [orbit_from_itinerary(b, params) for b in blocks]
    points = np.array([orbit.points[c] for orbit in orbits])
    widths = np.array([orbit.widths[c] for orbit in orbits])
    logger.debug("Block model L=%d: %d blocks", L, len(blocks))
    return BlockModel(L=L, blocks=tuple(blocks), adjacency=adjacency, points=points, widths=widths)


def _chain_from_weights(
    log_weights: np.ndarray, adjacency: np.ndarray
) -> tuple[np.ndarray, np.ndarray, float, float]:
    # equilibrium chain of M = diag(e^w)·A: transitions, stationary vector, entropy, log λ
    shift = float(log_weights.max())
    matrix = np.exp(log_weights - shift)[:, None] * adjacency
    eigen = leading_eigen(matrix)
    transition = matrix * eigen.right[None, :] / (eigen.value * eigen.right[:, None])
    transition /= transition.sum(axis=1, keepdims=True)
    stationary = eigen.left * eigen.right
    stationary /= stationary.sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(transition > 0.0, np.log(transition), 0.0)
    entropy = float(-(stationary[:, None] * transition * logs).sum())
    return transition, stationary, entropy, math.log(eigen.value) + shift


def markov_equilibrium(
    phi: PotentialSpec, L: int, params: MapParams
) -> tuple[MeasureApprox, float]:
    """Gibbs–Markov block measure for φ and its pressure log λ.

    Returns the measure and the pressure. The measure's ``diagnostics`` hold the
    identity error |h + ∫φ − P|, the Hölder pad of the representatives and the
    resulting pressure bracket.
    """
    model = block_model(L, params)
    values = phi.on_horseshoe(model.points)
    transition, stationary, entropy, pressure = _chain_from_weights(values, model.adjacency)
    measure = MeasureApprox(
        MeasureKind.MARKOV,
        model.points,
        stationary,
        entropy=entropy,
        label=f"markov({phi.label}, L={L})",
        blocks=list(model.blocks),
        transition=transition,
    )
    identity_error = abs(entropy + float(stationary @ values) - pressure)
    pad = holder_pad(phi, model.widths)
    measure.diagnostics = {
        "pressure": pressure,
        "identity_error": identity_error,
        "pad": pad,
        "pressure_lower": pressure - pad,
        "pressure_upper": pressure + pad,
        "L": L,
    }
    logger.debug("Markov equilibrium of %s at L=%d: P=%.10g", phi.label, L, pressure)
    return measure, pressure


def max_entropy_measure(L: int, params: MapParams) -> MeasureApprox:
    """The zero-potential block measure (maximal entropy at block length L)."""
    model = block_model(L, params)
    transition, stationary, entropy, _ = _chain_from_weights(
        np.zeros(len(model.blocks)), model.adjacency
    )
    return MeasureApprox(
        MeasureKind.MARKOV,
        model.points,
        stationary,
        entropy=entropy,
        label=f"max_entropy(L={L})",
        blocks=list(model.blocks),
        transition=transition,
    )


def max_entropy_integral(phi: PotentialSpec, L: int, params: MapParams) -> float:
    """∫φ dμ̂_max for the maximal-entropy block measure."""
    return max_entropy_measure(L, params).integral(phi)


def variational_pressure(phi: PotentialSpec, family: list[MeasureApprox]) -> float:
    """max over the family of h_μ + ∫φ dμ.

    Raises:
        PreconditionError: If the family is empty.
    """
    if not family:
        raise PreconditionError("variational pressure needs at least one measure")
    return max(mu.free_energy(phi) for mu in family)


@dataclass
class PressureEqualityReport:
    """Block-model pressures of F⁻¹ with φ|Ω∘π and of G with φ|Ω.

    Attributes:
        pressure_F_inv: Pressure on the horseshoe side.
        pressure_G: Pressure on the planar side.
        difference: |pressure_F_inv − pressure_G|.
        semiconjugacy_defect: max |G(π x_b′) − π x_b| over adjacent blocks b → b′.
        L: Block length.
    """

    pressure_F_inv: float
    pressure_G: float
    difference: float
    semiconjugacy_defect: float
    L: int


def pressure_equality_check(
    phi: PotentialSpec, L: int, params: MapParams
) -> PressureEqualityReport:
    """Compare P(F⁻¹, φ|Ω∘π) with P(G, φ|Ω) on the shared block structure.

    F⁻¹ and G both walk the block chain backwards, so both use the transposed
    adjacency. The horseshoe side evaluates φ|Ω∘π at the block points; the
    planar side evaluates φ|Ω at the projected points.
    """
    model = block_model(L, params)
    planar_points = apply_pi(model.points)
    backward = model.adjacency.T.copy()

    restricted = phi.values(apply_pi(model.points))
    on_plane = phi.values(planar_points)
    _, _, _, p_f_inv = _chain_from_weights(restricted, backward)
    _, _, _, p_g = _chain_from_weights(on_plane, backward)

    src, dst = np.nonzero(model.adjacency)
    try:
        images = apply_G(planar_points[dst], params)
        defect = float(np.max(np.abs(images - planar_points[src])))
    except DomainError:
        defect = math.inf
    return PressureEqualityReport(
        pressure_F_inv=p_f_inv,
        pressure_G=p_g,
        difference=abs(p_f_inv - p_g),
        semiconjugacy_defect=defect,
        L=L,
    )


def periodic_pressure(phi: PotentialSpec, n: int, params: MapParams) -> float:
    """(1/n)·log Σ e^{S_nφ(x)} over the points fixed by Fⁿ.

    Every cyclic admissible n-word gives one such point; the all-zero word gives
    both P and Q.
    """
    if n < 1:
        raise RangeError(f"period must be at least 1, got {n}")
    sums = [
        float(phi.on_horseshoe(periodic_orbit(w, params)).sum())
        for w in cyclic_admissible_words(n)
    ]
    sums.append(n * phi(Q))
    values = np.array(sums)
    top = float(values.max())
    return (top + math.log(float(np.exp(values - top).sum()))) / n


def central_exponent_scan(max_period: int, params: MapParams) -> list[tuple[str, float]]:
    """Central Lyapunov exponent of every primitive periodic orbit up to ``max_period``."""
    out = []
    for cycle in periodic_cycles(max_period):
        orbit = periodic_orbit(cycle, params)
        out.append((cycle, float(central_log_derivative_values(orbit, params).mean())))
    return out


# ── Decay of correlations ──


@dataclass
class CorrelationFit:
    """Fit |Cov(h1∘Tⁿ, h2)| ≈ K·θⁿ.

    Attributes:
        K: Prefactor.
        theta: Ratio; 0 when an observable is constant.
        lags: Lags n = 0..n_max.
        correlations: Monte-Carlo covariance per lag.
        std_errors: Standard error per lag.
        used: Number of leading lags n ≥ 1 above the noise floor entering the fit.
        r_squared: Goodness of the log-linear fit.
        seed: Master seed of the sampler.
    """

    K: float
    theta: float
    lags: np.ndarray
    correlations: np.ndarray
    std_errors: np.ndarray
    used: int
    r_squared: float
    seed: int


def _require_markov(mu: MeasureApprox) -> None:
    if mu.kind is not MeasureKind.MARKOV or mu.transition is None:
        raise KindError("correlations need a Markov block measure")


def sample_chain(
    mu: MeasureApprox, n_steps: int, samples: int, rng: np.random.Generator
) -> np.ndarray:
    """Stationary state paths, shape (samples, n_steps + 1)."""
    _require_markov(mu)
    cdf = np.cumsum(mu.transition, axis=1)
    cdf[:, -1] = 1.0
    start_cdf = np.cumsum(mu.weights)
    start_cdf[-1] = 1.0
    paths = np.empty((samples, n_steps + 1), dtype=np.int64)
    paths[:, 0] = np.searchsorted(start_cdf, rng.random(samples), side="right")
    for step in range(1, n_steps + 1):
        u = rng.random(samples)
        paths[:, step] = (cdf[paths[:, step - 1]] <= u[:, None]).sum(axis=1)
    return paths


def correlation_decay(
    mu: MeasureApprox,
    h1: PotentialSpec,
    h2: PotentialSpec,
    n_max: int = 20,
    samples: int = 20_000,
    seed: int = 0,
) -> CorrelationFit:
    """Monte-Carlo estimate of Cov(h1∘Tⁿ, h2) under a block chain and its decay rate.

    Raises:
        KindError: If μ is not a Markov measure.
        InsufficientSignal: If fewer than five leading lags rise above two standard errors.
    """
    _require_markov(mu)
    v1, v2 = mu.values(h1), mu.values(h2)
    lags = np.arange(n_max + 1)
    if np.ptp(v1) == 0.0 or np.ptp(v2) == 0.0:
        zeros = np.zeros(n_max + 1)
        return CorrelationFit(0.0, 0.0, lags, zeros, zeros.copy(), 0, 1.0, seed)

    logger.info("Sampling %d chains of length %d (seed %d)", samples, n_max, seed)
    rng = np.random.default_rng(seed)
    paths = sample_chain(mu, n_max, samples, rng)
    base = v2[paths[:, 0]]
    base_centered = base - base.mean()
    corr = np.empty(n_max + 1)
    err = np.empty(n_max + 1)
    for n in lags:
        shifted = v1[paths[:, n]]
        product = (shifted - shifted.mean()) * base_centered
        corr[n] = product.mean()
        err[n] = product.std(ddof=1) / math.sqrt(samples)

    above = np.abs(corr[1:]) > 2.0 * err[1:]
    used = int(np.argmin(above)) if not above.all() else len(above)
    if used < _MIN_USABLE:
        raise InsufficientSignal(
            f"only {used} leading lags rise above the Monte-Carlo noise floor"
        )
    ks = lags[1 : used + 1]
    fit = linregress(ks, np.log(np.abs(corr[1 : used + 1])))
    return CorrelationFit(
        K=math.exp(fit.intercept),
        theta=math.exp(fit.slope),
        lags=lags,
        correlations=corr,
        std_errors=err,
        used=used,
        r_squared=float(fit.rvalue**2),
        seed=seed,
    )


def exact_correlation(mu: MeasureApprox, h1: PotentialSpec, h2: PotentialSpec, n: int) -> float:
    """Cov(h1(X_n), h2(X_0)) of the stationary block chain, from powers of its transitions."""
    _require_markov(mu)
    v1, v2 = mu.values(h1), mu.values(h2)
    pi = mu.weights
    propagated = np.linalg.matrix_power(mu.transition, n) @ v1
    return float(pi @ (v2 * propagated) - (pi @ v1) * (pi @ v2))
