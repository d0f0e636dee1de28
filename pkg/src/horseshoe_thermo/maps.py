"""The horseshoe F, the central flow f, the projection π and the planar map G.

Every map has a batch form working on ``(n, 3)`` float arrays and a thin
single-point wrapper taking and returning :class:`Point3`. The batch forms are
what the symbolic and measure layers use; the wrappers are the public
per-point API.

Conventions:
    * f(0) := 0 by continuous extension of the closed-form flow.
    * Boundary points shared by two rectangles go to the lower-index region.
    * The inverse branch of F is selected by x: both branch images start at
      z = 0, so z cannot tell them apart.
"""

import logging
import math
from enum import Enum
from typing import NamedTuple

import numpy as np

from horseshoe_thermo.config import MapParams
from horseshoe_thermo.errors import DomainError, RangeError

logger = logging.getLogger(__name__)

TOL = 1e-12
Z_R0_TOP = 1.0 / 6.0
Z_R1_BOTTOM = 5.0 / 6.0
X_SPLIT = 0.75


class Region(Enum):
    """Region tags of the horseshoe (R0, R1) and planar (S1, S2, S3) domains."""

    R0 = "R0"
    R1 = "R1"
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    OUTSIDE = "Outside"


class Point3(NamedTuple):
    """A point of the unit cube."""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


Q = Point3(0.0, 0.0, 0.0)
P = Point3(0.0, 1.0, 0.0)


def _as_points(points: np.ndarray | Point3 | tuple) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected points of shape (n, 3), got {arr.shape}")
    return arr


def _scalar_or_array(value: np.ndarray) -> float | np.ndarray:
    return float(value) if np.ndim(value) == 0 else value


# ── Central flow ──


def flow_map(y: float | np.ndarray, n: float = 1) -> float | np.ndarray:
    """Time-n map of the central vector field.

    Evaluates fⁿ(y) = y / (y + (1 − y)e⁻ⁿ), which equals the closed form
    1/(1 − (1 − 1/y)e⁻ⁿ) for y ≠ 0 and extends continuously to fⁿ(0) = 0.
    Negative n gives the inverse flow.

    Args:
        y: Central coordinate(s) in [0, 1].
        n: Flow time; any real, integers in practice.

    Returns:
        fⁿ(y), with the same shape as ``y``.
    """
    y_arr = np.asarray(y, dtype=float)
    decay = math.exp(-n)
    return _scalar_or_array(y_arr / (y_arr + (1.0 - y_arr) * decay))


def flow_derivative(y: float | np.ndarray, n: float = 1) -> float | np.ndarray:
    """Derivative of the time-n flow, e⁻ⁿ / (y + (1 − y)e⁻ⁿ)²."""
    y_arr = np.asarray(y, dtype=float)
    decay = math.exp(-n)
    return _scalar_or_array(decay / (y_arr + (1.0 - y_arr) * decay) ** 2)


def flow_log_derivative(y: float | np.ndarray, n: float = 1) -> float | np.ndarray:
    """log of :func:`flow_derivative`, evaluated without forming the quotient."""
    y_arr = np.asarray(y, dtype=float)
    decay = math.exp(-n)
    return _scalar_or_array(-n - 2.0 * np.log(y_arr + (1.0 - y_arr) * decay))


def central_branch(symbol: int, y: float, params: MapParams) -> float:
    """One central step: f for symbol 0, y ↦ σ(1 − y) for symbol 1."""
    if symbol == 0:
        return y / (y + (1.0 - y) * math.exp(-1.0))
    return params.sigma * (1.0 - y)


# ── Region bookkeeping ──


def _within(values: np.ndarray, low: float, high: float) -> np.ndarray:
    return (values >= low - TOL) & (values <= high + TOL)


def in_horseshoe_domain(points: np.ndarray) -> np.ndarray:
    """Boolean mask of points in R0 ∪ R1."""
    pts = _as_points(points)
    in_cube = _within(pts[:, 0], 0.0, 1.0) & _within(pts[:, 1], 0.0, 1.0)
    z = pts[:, 2]
    return in_cube & (_within(z, 0.0, Z_R0_TOP) | _within(z, Z_R1_BOTTOM, 1.0))


def _planar_masks(pts: np.ndarray, params: MapParams) -> tuple[np.ndarray, ...]:
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    left = _within(x, 0.0, params.lambda0) & _within(y, 0.0, 1.0)
    right = _within(x, X_SPLIT - params.lambda0, X_SPLIT) & _within(y, 0.0, params.sigma)
    on_floor = np.abs(z) <= TOL
    on_shelf = np.abs(z - Z_R1_BOTTOM) <= TOL
    s1 = left & on_floor
    s2 = right & on_floor & ~s1
    s3 = left & on_shelf
    return s1, s2, s3


def in_planar_domain(points: np.ndarray, params: MapParams) -> np.ndarray:
    """Boolean mask of points in S1 ∪ S2 ∪ S3."""
    s1, s2, s3 = _planar_masks(_as_points(points), params)
    return s1 | s2 | s3


def region_of(p: Point3, params: MapParams, *, planar: bool = False) -> Region:
    """Region tag of a point.

    Args:
        p: The point.
        params: Map constants (rectangle widths depend on lambda0 and sigma).
        planar: Classify against S1/S2/S3 instead of R0/R1.

    Returns:
        The region; ties at shared boundaries go to the lower index.
    """
    pts = _as_points(p)
    if planar:
        s1, s2, s3 = _planar_masks(pts, params)
        if s1[0]:
            return Region.S1
        if s2[0]:
            return Region.S2
        if s3[0]:
            return Region.S3
        return Region.OUTSIDE

    if not (_within(pts[:, 0], 0.0, 1.0)[0] and _within(pts[:, 1], 0.0, 1.0)[0]):
        return Region.OUTSIDE
    z = pts[0, 2]
    if -TOL <= z <= Z_R0_TOP + TOL:
        return Region.R0
    if Z_R1_BOTTOM - TOL <= z <= 1.0 + TOL:
        return Region.R1
    return Region.OUTSIDE


def symbols_of(points: np.ndarray) -> np.ndarray:
    """Itinerary symbols (0 for R0, 1 for R1) of points known to lie in R0 ∪ R1."""
    pts = _as_points(points)
    return (pts[:, 2] > 0.5).astype(np.int8)


# ── Horseshoe F ──


def apply_F(points: np.ndarray, params: MapParams) -> np.ndarray:
    """Apply F to every row of ``points``.

    Raises:
        DomainError: If some point is outside R0 ∪ R1.
    """
    pts = _as_points(points)
    inside = in_horseshoe_domain(pts)
    if not inside.all():
        bad = pts[~inside][0]
        raise DomainError(f"F is only defined on R0 ∪ R1, got {tuple(bad)}")

    out = np.empty_like(pts)
    upper = symbols_of(pts) == 1
    lower = ~upper
    out[lower, 0] = params.lambda0 * pts[lower, 0]
    out[lower, 1] = flow_map(pts[lower, 1], 1)
    out[lower, 2] = params.beta0 * pts[lower, 2]
    out[upper, 0] = X_SPLIT - params.lambda0 * pts[upper, 0]
    out[upper, 1] = params.sigma * (1.0 - pts[upper, 1])
    out[upper, 2] = params.beta1 * (pts[upper, 2] - Z_R1_BOTTOM)
    return out


def _branch_image_mask(pts: np.ndarray, branch: int, params: MapParams) -> np.ndarray:
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    if branch == 0:
        return (
            _within(x, 0.0, params.lambda0)
            & _within(y, 0.0, 1.0)
            & _within(z, 0.0, params.beta0 / 6.0)
        )
    return (
        _within(x, X_SPLIT - params.lambda0, X_SPLIT)
        & _within(y, 0.0, params.sigma)
        & _within(z, 0.0, params.beta1 / 6.0)
    )


def preimage_branches(points: np.ndarray, params: MapParams) -> np.ndarray:
    """Branch index (0 or 1) of F⁻¹ for every row; −1 where no branch applies."""
    pts = _as_points(points)
    branches = np.full(len(pts), -1, dtype=np.int8)
    branches[_branch_image_mask(pts, 1, params)] = 1
    branches[_branch_image_mask(pts, 0, params)] = 0
    return branches


def apply_F_inv(
    points: np.ndarray, params: MapParams, branches: np.ndarray | None = None
) -> np.ndarray:
    """Apply the inverse branches of F.

    Args:
        points: Points in the image of F.
        params: Map constants.
        branches: Optional explicit branch per row. Selected by x when omitted.

    Raises:
        DomainError: If a point is not in the image of its branch.
    """
    pts = _as_points(points)
    chosen = preimage_branches(pts, params) if branches is None else np.asarray(branches)
    zero = chosen == 0
    one = chosen == 1
    valid = (zero & _branch_image_mask(pts, 0, params)) | (one & _branch_image_mask(pts, 1, params))
    if not valid.all():
        bad = pts[~valid][0]
        raise DomainError(f"point {tuple(bad)} is not in the image of the requested branch")

    out = np.empty_like(pts)
    out[zero, 0] = pts[zero, 0] / params.lambda0
    out[zero, 1] = flow_map(pts[zero, 1], -1)
    out[zero, 2] = pts[zero, 2] / params.beta0
    out[one, 0] = (X_SPLIT - pts[one, 0]) / params.lambda0
    out[one, 1] = 1.0 - pts[one, 1] / params.sigma
    out[one, 2] = pts[one, 2] / params.beta1 + Z_R1_BOTTOM
    return out


def horseshoe_F(p: Point3, params: MapParams) -> Point3:
    """Image of a point of R0 ∪ R1 under F; the image may leave the cube."""
    return Point3(*apply_F(p, params)[0])


def horseshoe_F_inv(p: Point3, branch: int, params: MapParams) -> Point3:
    """Exact inverse of F's branch ``branch`` (0 or 1)."""
    if branch not in (0, 1):
        raise DomainError(f"branch must be 0 or 1, got {branch}")
    return Point3(*apply_F_inv(p, params, np.array([branch]))[0])


def preimage_branch(p: Point3, params: MapParams) -> int:
    """Branch of F⁻¹ that applies at ``p``, chosen by its x-coordinate."""
    branch = int(preimage_branches(p, params)[0])
    if branch < 0:
        raise DomainError(f"{p} is not in the image of F")
    return branch


def central_log_derivative_values(points: np.ndarray, params: MapParams) -> np.ndarray:
    """log |DF| along the center: log f′(y) on R0, log σ on R1."""
    pts = _as_points(points)
    if not in_horseshoe_domain(pts).all():
        raise DomainError("central derivative is only defined on R0 ∪ R1")
    values = np.asarray(flow_log_derivative(pts[:, 1], 1), dtype=float).copy()
    values[symbols_of(pts) == 1] = math.log(params.sigma)
    return values


def central_log_derivative(p: Point3, params: MapParams) -> float:
    """log |DF|_{E^c}| at a single point of R0 ∪ R1."""
    return float(central_log_derivative_values(p, params)[0])


# ── Projection and planar map ──


def apply_pi(points: np.ndarray) -> np.ndarray:
    """Collapse z to 0 on R0 and to 5/6 on R1."""
    pts = _as_points(points)
    if not in_horseshoe_domain(pts).all():
        raise DomainError("π is only defined on R0 ∪ R1")
    out = pts.copy()
    out[:, 2] = np.where(symbols_of(pts) == 1, Z_R1_BOTTOM, 0.0)
    return out


def projection_pi(p: Point3) -> Point3:
    """π(p) for a single point of R0 ∪ R1."""
    return Point3(*apply_pi(p)[0])


def apply_G(points: np.ndarray, params: MapParams) -> np.ndarray:
    """Apply the planar map G on S1 ∪ S2 ∪ S3.

    Raises:
        DomainError: If a point lies outside the three rectangles.
    """
    pts = _as_points(points)
    s1, s2, s3 = _planar_masks(pts, params)
    s3 = s3 & ~s1 & ~s2
    if not (s1 | s2 | s3).all():
        bad = pts[~(s1 | s2 | s3)][0]
        raise DomainError(f"G is only defined on S1 ∪ S2 ∪ S3, got {tuple(bad)}")

    out = np.empty_like(pts)
    left = s1 | s3
    out[left, 0] = params.alpha * pts[left, 0]
    out[left, 1] = flow_map(pts[left, 1], -1)
    out[left, 2] = 0.0
    out[s2, 0] = params.alpha * (X_SPLIT - pts[s2, 0])
    out[s2, 1] = 1.0 - pts[s2, 1] / params.sigma
    out[s2, 2] = Z_R1_BOTTOM
    return out


def planar_G(p: Point3, params: MapParams) -> Point3:
    """G(p) for a single point of S1 ∪ S2 ∪ S3."""
    return Point3(*apply_G(p, params)[0])


def semiconjugacy_defect(points: np.ndarray, params: MapParams) -> float:
    """Largest coordinate gap between π∘F⁻¹ and G∘π over points in the domain of F⁻¹."""
    pts = _as_points(points)
    lhs = apply_pi(apply_F_inv(pts, params))
    rhs = apply_G(apply_pi(pts), params)
    return float(np.max(np.abs(lhs - rhs))) if len(pts) else 0.0


def split_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sum of coordinate distances, the split norm used for Hölder estimates."""
    return np.sum(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)), axis=-1)


def sample_domain_points(rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniform points of R0 ∪ R1, half in each slab."""
    pts = rng.random((count, 3))
    upper = rng.random(count) < 0.5
    pts[:, 2] = np.where(upper, Z_R1_BOTTOM + pts[:, 2] / 6.0, pts[:, 2] / 6.0)
    return pts


# ── Pieces ──
#
# A piece set is an array of shape (k, 2, 3): row i holds the low and high
# corners of an axis-aligned box on which a map acts by a single formula.


def _boxes(rows: list[tuple[tuple[float, ...], tuple[float, ...]]]) -> np.ndarray:
    return np.array(rows, dtype=float).reshape(-1, 2, 3)


def horseshoe_boxes() -> np.ndarray:
    """R0 and R1."""
    return _boxes([((0.0, 0.0, 0.0), (1.0, 1.0, Z_R0_TOP)), ((0.0, 0.0, Z_R1_BOTTOM), (1.0,) * 3)])


def planar_boxes(params: MapParams) -> np.ndarray:
    """S1, S2 and S3 (flat in z)."""
    lam, sigma = params.lambda0, params.sigma
    return _boxes(
        [
            ((0.0, 0.0, 0.0), (lam, 1.0, 0.0)),
            ((X_SPLIT - lam, 0.0, 0.0), (X_SPLIT, sigma, 0.0)),
            ((0.0, 0.0, Z_R1_BOTTOM), (lam, 1.0, Z_R1_BOTTOM)),
        ]
    )


def inverse_branch_boxes(params: MapParams) -> np.ndarray:
    """The images of the two branches of F inside R0 ∪ R1."""
    lam, sigma = params.lambda0, params.sigma
    return _boxes(
        [
            ((0.0, 0.0, 0.0), (lam, 1.0, Z_R0_TOP)),
            ((0.0, 0.0, Z_R1_BOTTOM), (lam, 1.0, min(1.0, params.beta0 / 6.0))),
            ((X_SPLIT - lam, 0.0, 0.0), (X_SPLIT, sigma, min(Z_R0_TOP, params.beta1 / 6.0))),
        ]
    )


def forward_domain_boxes(steps: int, params: MapParams) -> np.ndarray:
    """Boxes of points whose iterates F⁰, …, F^{steps−1} all lie in R0 ∪ R1.

    F never moves x or y out of [0, 1], so only z is cut: each step pulls the
    current z-intervals back through the affine branch of each slab.

    Raises:
        RangeError: If steps < 1.
    """
    if steps < 1:
        raise RangeError(f"steps must be at least 1, got {steps}")
    slabs = [(0.0, Z_R0_TOP, params.beta0, 0.0), (Z_R1_BOTTOM, 1.0, params.beta1, Z_R1_BOTTOM)]
    intervals = [(0.0, Z_R0_TOP), (Z_R1_BOTTOM, 1.0)]
    for _ in range(steps - 1):
        pulled = []
        for low, high, slope, offset in slabs:
            for a, b in intervals:
                lo, hi = max(low, a / slope + offset), min(high, b / slope + offset)
                if hi > lo:
                    pulled.append((lo, hi))
        intervals = sorted(pulled)
    return _boxes([((0.0, 0.0, a), (1.0, 1.0, b)) for a, b in intervals])


def sample_in_boxes(
    rng: np.random.Generator, boxes: np.ndarray, count: int
) -> tuple[np.ndarray, np.ndarray]:
    """``count`` points, each uniform in a box picked uniformly; returns (points, box index)."""
    index = rng.integers(len(boxes), size=count)
    low, high = boxes[index, 0], boxes[index, 1]
    return low + rng.random((count, 3)) * (high - low), index
