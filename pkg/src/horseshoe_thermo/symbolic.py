"""Symbolic dynamics of the horseshoe.

Words over {0, 1} are plain ASCII strings. Admissible words avoid the factor
"11". This module covers:

    * itineraries of points under F, and points reconstructed from itineraries;
    * the α-return inducing combinatorics (return time, level sets, coding);
    * the central compositions Φ and their block-wise contraction.

Level words begin and end with 1, so consecutive inducing symbols share their
boundary 1 when amalgamated: ``amalgamate(["101", "1001"]) == "101001"``.
"""

import logging
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from horseshoe_thermo.config import InducingParams, MapParams
from horseshoe_thermo.errors import (
    AdmissibilityError,
    DomainError,
    EscapeError,
    FormatError,
    IncompleteError,
    ParameterWarning,
    PreconditionError,
    RangeError,
    ResourceError,
)
from horseshoe_thermo.maps import (
    X_SPLIT,
    Z_R0_TOP,
    Z_R1_BOTTOM,
    Point3,
    apply_F,
    apply_F_inv,
    apply_pi,
    central_branch,
    flow_log_derivative,
    flow_map,
    in_horseshoe_domain,
    symbols_of,
)

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 24
_X_SEED = 0.5
_Y_SEED = 0.5
_ORBIT_DEPTH = 40


def _exact(value: float) -> Fraction:
    """The decimal a user typed, as a fraction (0.4 stays 2/5)."""
    return Fraction(repr(float(value)))


def _check_binary(w: str) -> None:
    if any(ch not in "01" for ch in w):
        raise FormatError(f"words are ASCII 0/1 strings, got {w!r}")


# ── Words ──


@dataclass(frozen=True)
class TwoSidedWindow:
    """A finite window of a bi-infinite sequence.

    Attributes:
        past: Symbols at indices −D..−1.
        future: Symbols at indices 0..D′−1; ``future[0]`` is the current symbol.
    """

    past: str
    future: str

    def __post_init__(self) -> None:
        _check_binary(self.past + self.future)
        if "11" in self.past + self.future:
            raise AdmissibilityError(f"window {self.past}|{self.future} contains 11")

    @property
    def word(self) -> str:
        return self.past + self.future

    @property
    def depth(self) -> int:
        return len(self.past)


@dataclass(frozen=True, order=True)
class CylinderId:
    """A level-k inducing cylinder D_i^k, identified by its defining word.

    Attributes:
        level: Word length k, which is also the return time of the cylinder.
        word: The level word; starts and ends with 1 and avoids 11.
    """

    level: int
    word: str

    def __post_init__(self) -> None:
        _check_binary(self.word)
        if len(self.word) != self.level:
            raise FormatError(f"level {self.level} does not match word {self.word!r}")
        if self.level < 2 or self.word[0] != "1" or self.word[-1] != "1" or "11" in self.word:
            raise AdmissibilityError(f"{self.word!r} is not a level word")

    @property
    def induced_time(self) -> int:
        """Number of base-shift steps one inducing symbol advances."""
        return self.level - 1


def is_admissible(w: str) -> bool:
    """True iff ``w`` avoids the factor "11"."""
    _check_binary(w)
    return "11" not in w


def is_cyclic_admissible(w: str) -> bool:
    """True iff ``w`` repeated forever avoids "11", including across the wraparound."""
    _check_binary(w)
    return bool(w) and "11" not in w + w[0]


def count_admissible(n: int) -> int:
    """Number of admissible words of length n (a Fibonacci number)."""
    if n < 0:
        raise RangeError(f"length must be >= 0, got {n}")
    ending_0, ending_1 = 1, 0
    for _ in range(n):
        ending_0, ending_1 = ending_0 + ending_1, ending_0
    return ending_0 + ending_1 if n else 1


def admissible_words(n: int) -> list[str]:
    """All admissible words of length n in lexicographic order."""
    words = [""]
    for _ in range(n):
        words = [w + s for w in words for s in "01" if not (s == "1" and w.endswith("1"))]
    return words


def cyclic_admissible_words(n: int) -> list[str]:
    """All words of length n whose periodic extension is admissible.

    Each word is one periodic point of period dividing n, so the count is the
    Lucas number L_n.
    """
    return [w for w in admissible_words(n) if is_cyclic_admissible(w)]


def periodic_cycles(max_period: int) -> list[str]:
    """One representative (least rotation) of every primitive admissible cycle."""
    cycles = []
    for n in range(1, max_period + 1):
        for w in cyclic_admissible_words(n):
            rotations = {w[k:] + w[:k] for k in range(n)}
            if len(rotations) == n and w == min(rotations):
                cycles.append(w)
    return cycles


# ── Itineraries ──


def itinerary(p: Point3, n_fwd: int, n_back: int, params: MapParams) -> TwoSidedWindow:
    """Itinerary window of ``p``: symbols of F^k(p) for −n_back ≤ k < n_fwd.

    Backward steps pick the inverse branch from the x-coordinate.

    Raises:
        EscapeError: With the first signed index at which the orbit leaves R0 ∪ R1.
    """
    start = np.asarray(p, dtype=float).reshape(1, 3)
    future = []
    current = start
    for k in range(n_fwd):
        if not in_horseshoe_domain(current)[0]:
            raise EscapeError(f"forward orbit of {tuple(p)} escapes at step {k}", k)
        future.append(str(symbols_of(current)[0]))
        current = apply_F(current, params)

    past = []
    current = start
    for k in range(1, n_back + 1):
        try:
            current = apply_F_inv(current, params)
        except DomainError as exc:
            raise EscapeError(f"backward orbit of {tuple(p)} escapes at step {-k}", -k) from exc
        if not in_horseshoe_domain(current)[0]:
            raise EscapeError(f"backward orbit of {tuple(p)} escapes at step {-k}", -k)
        past.append(str(symbols_of(current)[0]))

    return TwoSidedWindow(past="".join(reversed(past)), future="".join(future))


# ── Inducing combinatorics ──


def freq_plus(w: str, n: int) -> Fraction:
    """Exact frequency of 1s among the first n symbols of ``w``."""
    _check_binary(w)
    if not 1 <= n <= len(w):
        raise RangeError(f"n must lie in [1, {len(w)}], got {n}")
    return Fraction(w[:n].count("1"), n)


def return_time(w: str, alpha: float) -> int | None:
    """First k > 1 with w[k−1] = 1 and d_k⁺(w) > α, or None within the word.

    The comparison is done on integers, so ties such as 2/5 against 0.4 are
    never decided by rounding.
    """
    _check_binary(w)
    if not w or w[0] != "1":
        raise PreconditionError(f"return time needs a word starting with 1, got {w!r}")
    a = _exact(alpha)
    ones = 1
    for k in range(2, len(w) + 1):
        if w[k - 1] == "1":
            ones += 1
            if ones * a.denominator > a.numerator * k:
                return k
    return None


@lru_cache(maxsize=256)
def _level_words(i: int, alpha: Fraction) -> tuple[str, ...]:
    num, den = alpha.numerator, alpha.denominator
    found: list[str] = []

    def extend(prefix: str, ones: int) -> None:
        k = len(prefix)
        if k == i:
            if prefix[-1] == "1" and ones * den > num * i:
                found.append(prefix)
            return
        extend(prefix + "0", ones)
        if prefix[-1] != "1":
            grown = k + 1
            # an earlier return ends the word before length i
            if grown < i and (ones + 1) * den > num * grown:
                return
            extend(prefix + "1", ones + 1)

    extend("1", 1)
    return tuple(found)


def enumerate_level(
    i: int, alpha: float, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[CylinderId]:
    """All level-i cylinders of the α-return scheme, sorted lexicographically.

    Args:
        i: Level (return time), at least 2.
        alpha: Frequency threshold of the return time.
        cap: Largest level that may be enumerated.

    Raises:
        RangeError: If i < 2.
        ResourceError: If i exceeds ``cap``.
    """
    if i < 2:
        raise RangeError(f"levels start at 2, got {i}")
    if i > cap:
        raise ResourceError(f"level {i} exceeds the enumeration cap {cap}")
    words = _level_words(i, _exact(alpha))
    logger.debug("Level %d at alpha=%s: %d cylinders", i, alpha, len(words))
    return [CylinderId(i, w) for w in words]


def level_counts(n_max: int, alpha: float, cap: int = DEFAULT_ENUMERATION_CAP) -> dict[int, int]:
    """The sequence r_i = #Σ_i for 2 ≤ i ≤ n_max."""
    return {i: len(enumerate_level(i, alpha, cap)) for i in range(2, n_max + 1)}


def alphabet(K: int, alpha: float, cap: int = DEFAULT_ENUMERATION_CAP) -> list[CylinderId]:
    """The truncated countable alphabet S_K: all cylinders of level ≤ K."""
    return [cyl for i in range(2, K + 1) for cyl in enumerate_level(i, alpha, cap)]


def amalgamate(symbols: list[CylinderId] | list[str]) -> str:
    """Concatenate level words, sharing the boundary 1 of consecutive symbols.

    Raises:
        AdmissibilityError: If a word is not a level word (does not start and
            end with 1, or contains 11).
    """
    words = [s.word if isinstance(s, CylinderId) else s for s in symbols]
    for w in words:
        _check_binary(w)
        if len(w) < 2 or w[0] != "1" or w[-1] != "1" or "11" in w:
            raise AdmissibilityError(f"{w!r} is not a level word")
    if not words:
        return ""
    return words[0] + "".join(w[1:] for w in words[1:])


def decode_to_symbols(w: str, alpha: float) -> list[CylinderId]:
    """Cut ``w`` greedily at successive return times.

    Each cut restarts at the shared boundary 1, so decoding inverts
    :func:`amalgamate`.

    Raises:
        PreconditionError: If ``w`` does not start with 1.
        AdmissibilityError: If ``w`` contains 11.
        IncompleteError: If the remainder has no further return; the symbols
            decoded so far and the unconsumed suffix ride on the exception.
    """
    _check_binary(w)
    if not w or w[0] != "1":
        raise PreconditionError(f"decoding needs a word starting with 1, got {w!r}")
    if "11" in w:
        raise AdmissibilityError(f"{w!r} contains 11")

    decoded: list[CylinderId] = []
    pos = 0
    while True:
        rest = w[pos:]
        k = return_time(rest, alpha)
        if k is None:
            raise IncompleteError(
                f"no return in the tail {rest!r} after {len(decoded)} symbols", decoded, rest
            )
        decoded.append(CylinderId(k, rest[:k]))
        if pos + k == len(w):
            return decoded
        pos += k - 1


# ── Block structure ──


@dataclass
class BlockDecomposition:
    """A level word written as 1·b_{n1}·…·b_{nr} with b_n = 0ⁿ1.

    Attributes:
        word: The decomposed word.
        blocks: Block lengths n1..nr (zeros per block).
        counts: a(w, i, n), the number of blocks b_n.
    """

    word: str
    blocks: tuple[int, ...]
    counts: dict[int, int] = field(default_factory=dict)

    @property
    def length(self) -> int:
        return 1 + sum(n + 1 for n in self.blocks)

    def a(self, n: int) -> int:
        return self.counts.get(n, 0)

    def identity_value(self) -> int:
        """1 + Σ (k+1)·a(w, i, k), which equals the word length."""
        return 1 + sum((k + 1) * c for k, c in self.counts.items())

    def short_block_count(self, N: int) -> int:
        """1 + Σ_{k<N} a(w, i, k)."""
        return 1 + sum(c for k, c in self.counts.items() if k < N)


def block_decompose(w: str) -> BlockDecomposition:
    """Split a word that starts and ends with 1 into blocks 0ⁿ1.

    Raises:
        FormatError: If the word does not start and end with 1 or contains 11.
    """
    _check_binary(w)
    if not w or w[0] != "1" or w[-1] != "1":
        raise FormatError(f"{w!r} must start and end with 1")
    pieces = w[1:].split("1")[:-1]
    if any(len(piece) == 0 for piece in pieces):
        raise FormatError(f"{w!r} contains 11")
    blocks = tuple(len(piece) for piece in pieces)
    return BlockDecomposition(word=w, blocks=blocks, counts=dict(Counter(blocks)))


@dataclass
class ShortBlockReport:
    """Short-block inequality of a level word under both length conventions.

    Attributes:
        level: Word length i.
        short_count: 1 + Σ_{k<N} a(w, i, k).
        corrected_bound: τ·i.
        corrected_holds: short_count ≥ τ·i.
        source_bound: τ·(i + 1), the convention that counts one extra symbol.
        source_holds: short_count ≥ τ·(i + 1).
    """

    level: int
    short_count: int
    corrected_bound: float
    corrected_holds: bool
    source_bound: float
    source_holds: bool


def short_block_bound(
    decomposition: BlockDecomposition, inducing: InducingParams
) -> ShortBlockReport:
    """Evaluate the short-block count against τ·i and τ·(i+1), exactly."""
    i = decomposition.length
    tau = _exact(inducing.tau)
    count = decomposition.short_block_count(inducing.N)
    return ShortBlockReport(
        level=i,
        short_count=count,
        corrected_bound=float(tau * i),
        corrected_holds=count >= tau * i,
        source_bound=float(tau * (i + 1)),
        source_holds=count >= tau * (i + 1),
    )


def m_of_c0(c0: float, params: MapParams, cap: int = DEFAULT_ENUMERATION_CAP) -> int:
    """Largest k ≥ 0 with β0^k·β1·(c0 − 5/6) ≤ 1/6.

    A point with z slightly above c0 lands at height β1(c0 − 5/6) and then
    stays in R0 while the β0-expansion keeps it below 1/6, so m bounds the run
    of zeros that follows a 1 from that strip.

    Returns:
        m, or −1 (with a ParameterWarning) when even k = 0 fails.

    Raises:
        RangeError: If c0 is not in (5/6, 1).
    """
    if not Z_R1_BOTTOM < c0 < 1.0:
        raise RangeError(f"c0 must lie in (5/6, 1), got {c0}")
    height = params.beta1 * (c0 - Z_R1_BOTTOM)
    if height > Z_R0_TOP:
        warnings.warn(
            f"c0={c0} sends the strip above c0 straight back to R1", ParameterWarning, stacklevel=2
        )
        return -1
    k = 0
    while k < cap and height * params.beta0 ** (k + 1) <= Z_R0_TOP:
        k += 1
    if k == cap:
        warnings.warn(f"m(c0) reached the cap {cap} for c0={c0}", ParameterWarning, stacklevel=2)
    return k


# ── Central compositions ──


def central_composition(
    w: str, y: float | np.ndarray, params: MapParams
) -> tuple[float | np.ndarray, float | np.ndarray]:
    """Φ_w(y) = f_{w_{n−1}} ∘ … ∘ f_{w_0}(y) and log |Φ_w′(y)|.

    Works elementwise when ``y`` is an array.
    """
    _check_binary(w)
    value = np.asarray(y, dtype=float)
    log_derivative = np.zeros_like(value)
    log_sigma = math.log(params.sigma)
    for symbol in w:
        if symbol == "0":
            log_derivative = log_derivative + flow_log_derivative(value, 1)
            value = np.asarray(flow_map(value, 1))
        else:
            log_derivative = log_derivative + log_sigma
            value = params.sigma * (1.0 - value)
    if value.ndim == 0:
        return float(value), float(log_derivative)
    return value, log_derivative


def block_contraction(m: int, params: MapParams) -> float:
    """Worst contraction factor contributed by a block 0ᵐ1.

    Equals u/(1 − σ(1 − u)) with u = f^m(σ), which is below 1 for every m ≥ 1.
    """
    if m < 1:
        raise RangeError(f"blocks have at least one zero, got m={m}")
    u = float(flow_map(params.sigma, m))
    return u / (1.0 - params.sigma * (1.0 - u))


@dataclass
class ContractionProfile:
    """Factorization of |Φ_w′(y)| along the σ-branches of a word.

    Attributes:
        deltas: Central coordinate right after each σ-branch.
        thetas: Exact factors (1 − δ/σ)/(1 − δ) for each σ-branch.
        block_lengths: Zeros preceding each σ-branch after the first.
        derivative: |Φ_w′(y)| by the chain rule.
        identity_value: Π θ · g(Φ_w(y))/g(y), equal to ``derivative``.
        constant: C = 1/(4 g(y)).
        bound: C · Π_{blocks} block_contraction(m).
    """

    deltas: list[float]
    thetas: list[float]
    block_lengths: list[int]
    derivative: float
    identity_value: float
    constant: float
    bound: float


def contraction_profile(w: str, y: float, params: MapParams) -> ContractionProfile:
    """Contraction bookkeeping of Φ_w at y, with g(y) = y(1 − y).

    Raises:
        RangeError: If y is not strictly inside (0, 1).
    """
    _check_binary(w)
    if not 0.0 < y < 1.0:
        raise RangeError(f"y must lie in (0, 1), got {y}")

    deltas: list[float] = []
    block_lengths: list[int] = []
    value = y
    zeros = 0
    for symbol in w:
        value = central_branch(int(symbol), value, params)
        if symbol == "1":
            if deltas:
                block_lengths.append(zeros)
            deltas.append(value)
            zeros = 0
        else:
            zeros += 1

    sigma = params.sigma
    thetas = [(1.0 - d / sigma) / (1.0 - d) for d in deltas]
    _, log_derivative = central_composition(w, y, params)

    def g(v: float) -> float:
        return v * (1.0 - v)

    constant = 1.0 / (4.0 * g(y))
    bound = constant * math.prod(block_contraction(m, params) for m in block_lengths)
    return ContractionProfile(
        deltas=deltas,
        thetas=thetas,
        block_lengths=block_lengths,
        derivative=math.exp(log_derivative),
        identity_value=math.prod(thetas) * g(value) / g(y),
        constant=constant,
        bound=bound,
    )


# ── Reconstruction ──


@dataclass
class OrbitReconstruction:
    """An exact F-orbit segment that follows a given word.

    Attributes:
        word: The followed itinerary; ``points[j]`` lies in R_{word[j]}.
        points: Orbit points, shape (n, 3), with F(points[j]) = points[j+1].
        widths: Per-coordinate width of the set of true orbits with this
            itinerary, shape (n, 3).
    """

    word: str
    points: np.ndarray
    widths: np.ndarray

    @property
    def error_bounds(self) -> np.ndarray:
        return self.widths.max(axis=1)


def orbit_from_itinerary(word: str, params: MapParams) -> OrbitReconstruction:
    """Reconstruct the orbit segment with itinerary ``word``.

    x and y run forward from the seed 1/2 with the interval [0, 1] pushed
    through the same monotone branches; z runs backward from the slab of the
    last symbol. All three passes apply F's own branch formulas, so consecutive
    points are F-related up to rounding.

    Raises:
        AdmissibilityError: If ``word`` contains 11.
    """
    _check_binary(word)
    if "11" in word:
        raise AdmissibilityError(f"{word!r} contains 11")
    n = len(word)
    if n == 0:
        raise FormatError("cannot reconstruct an empty itinerary")
    symbols = np.frombuffer(word.encode(), dtype=np.uint8) - ord("0")
    points = np.empty((n, 3))
    widths = np.empty((n, 3))
    lam, sigma = params.lambda0, params.sigma

    x = _X_SEED
    y = _Y_SEED
    y_lo, y_hi = 0.0, 1.0
    for j in range(n):
        points[j, 0] = x
        points[j, 1] = y
        widths[j, 0] = lam**j
        widths[j, 1] = abs(y_hi - y_lo)
        if symbols[j] == 0:
            x = lam * x
            y, y_lo, y_hi = (float(v) for v in flow_map(np.array([y, y_lo, y_hi]), 1))
        else:
            x = X_SPLIT - lam * x
            y, y_lo, y_hi = sigma * (1.0 - y), sigma * (1.0 - y_hi), sigma * (1.0 - y_lo)

    z = 0.0 if symbols[-1] == 0 else Z_R1_BOTTOM
    width = Z_R0_TOP
    points[-1, 2] = z
    widths[-1, 2] = width
    for j in range(n - 2, -1, -1):
        if symbols[j] == 0:
            z /= params.beta0
            width /= params.beta0
        else:
            z = z / params.beta1 + Z_R1_BOTTOM
            width /= params.beta1
        points[j, 2] = z
        widths[j, 2] = width

    return OrbitReconstruction(word=word, points=points, widths=widths)


def point_from_itinerary(win: TwoSidedWindow, params: MapParams) -> tuple[Point3, float]:
    """Point whose itinerary matches the window, with an a-priori error bound.

    The x-error is λ0^D, the y-error is the width of the past central
    composition applied to [0, 1], and the z-error is the product of the
    future z-contractions. The all-zero window reconstructs P, not Q.

    Raises:
        PreconditionError: If the window has no past.
    """
    if win.depth < 1:
        raise PreconditionError("reconstruction needs at least one past symbol")
    if not win.future:
        raise PreconditionError("reconstruction needs the current symbol")
    orbit = orbit_from_itinerary(win.word, params)
    point = Point3(*orbit.points[win.depth])
    return point, float(orbit.error_bounds[win.depth])


def periodic_orbit(cycle: str, params: MapParams, depth: int = _ORBIT_DEPTH) -> np.ndarray:
    """The periodic orbit with cyclic itinerary ``cycle``, shape (len(cycle), 3).

    Raises:
        AdmissibilityError: If the cycle repeated forever contains 11.
    """
    if not is_cyclic_admissible(cycle):
        raise AdmissibilityError(f"cycle {cycle!r} contains 11 cyclically")
    p = len(cycle)
    reps = max(1, math.ceil(depth / p))
    orbit = orbit_from_itinerary(cycle * (2 * reps + 1), params)
    points = orbit.points[reps * p : (reps + 1) * p].copy()
    points[:, 1] = _periodic_central_values(cycle, params)
    return points


def _periodic_central_values(cycle: str, params: MapParams) -> np.ndarray:
    # long runs of zeros contract y slowly, so solve Φ(y) = y instead of iterating
    if "1" not in cycle:
        return np.ones(len(cycle))

    def gap(y: float) -> float:
        return central_composition(cycle, y, params)[0] - y

    values = [brentq(gap, 0.0, 1.0, xtol=1e-15)]
    for symbol in cycle[:-1]:
        values.append(central_branch(int(symbol), values[-1], params))
    return np.array(values)


def planar_orbit_from_itinerary(word: str, params: MapParams) -> np.ndarray:
    """G-orbit obtained by projecting the backward F-orbit with itinerary ``word``.

    Since π∘F⁻¹ = G∘π, the reversed F-orbit projects onto a G-orbit. Row j is
    G^j of row 0.
    """
    orbit = orbit_from_itinerary(word, params)
    return apply_pi(orbit.points[::-1])
