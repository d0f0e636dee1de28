"""Potentials on the horseshoe Λ and on the planar set Ω.

A potential is a vectorized evaluator over ``(n, 3)`` point arrays together
with Hölder metadata and, when known, declared bounds. Constructors cover the
central log-derivative, the plateau family that peaks at Q, projective
potentials v − u∘G and the two cohomology-style transforms.

Hölder constants are piecewise: the bound |φ(p) − φ(q)| ≤ C·d(p, q)^ξ is
claimed for p and q in the same piece (a slab, a planar rectangle, a branch
image of F or a cylinder of F), which is how cylinder pads and grid bounds
use it.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace

import numpy as np

from horseshoe_thermo.config import MapParams, PotentialConfig
from horseshoe_thermo.errors import PreconditionError, RangeError
from horseshoe_thermo.maps import (
    X_SPLIT,
    Z_R0_TOP,
    Z_R1_BOTTOM,
    Q,
    apply_F,
    apply_F_inv,
    apply_G,
    apply_pi,
    central_log_derivative_values,
    forward_domain_boxes,
    horseshoe_boxes,
    inverse_branch_boxes,
    planar_boxes,
    sample_in_boxes,
    split_distance,
)
from horseshoe_thermo.symbolic import periodic_cycles, periodic_orbit

logger = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], np.ndarray]

HORSESHOE = "horseshoe"
PLANAR = "planar"

# Split-norm diameter of the unit cube.
SPLIT_DIAMETER = 3.0


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """An evaluatable potential with Hölder metadata.

    Attributes:
        evaluator: Maps an (n, 3) array of points to n values.
        holder_exponent: ξ in (0, 1].
        holder_constant: C ≥ 0 in |φ(p) − φ(q)| ≤ C·d(p, q)^ξ for p, q in one
            piece; ``inf`` marks a potential that is not Hölder.
        label: Human-readable name.
        depends_on: Which of x, y, z the value can depend on.
        bounds: Declared (inf, sup) over the domain, when known in closed form.
        domain: ``"horseshoe"`` (R0 ∪ R1) or ``"planar"`` (S1 ∪ S2 ∪ S3).
        notes: Free-form certificate inputs recorded by constructors.
        pieces: (k, 2, 3) box corners where φ is defined and C applies;
            ``None`` means the slabs R0 and R1.
    """

    evaluator: Evaluator
    holder_exponent: float = 1.0
    holder_constant: float = 0.0
    label: str = ""
    depends_on: tuple[bool, bool, bool] = (True, True, True)
    bounds: tuple[float, float] | None = None
    domain: str = HORSESHOE
    notes: dict = field(default_factory=dict)
    pieces: np.ndarray | None = None

    def values(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        return np.asarray(self.evaluator(pts), dtype=float).reshape(len(pts))

    def __call__(self, p) -> float:
        return float(self.values(np.asarray(p, dtype=float))[0])

    def on_horseshoe(self, points: np.ndarray) -> np.ndarray:
        """Values at points of Λ; planar potentials are read through π."""
        if self.domain == PLANAR:
            return self.values(apply_pi(points))
        return self.values(points)

    @property
    def is_holder(self) -> bool:
        return math.isfinite(self.holder_constant)

    @property
    def boxes(self) -> np.ndarray:
        return horseshoe_boxes() if self.pieces is None else self.pieces


def _at_exponent(phi: PotentialSpec, xi: float) -> float:
    """C of φ restated for a smaller exponent ξ, using d ≤ SPLIT_DIAMETER."""
    if phi.holder_constant == 0.0:
        return 0.0
    return phi.holder_constant * SPLIT_DIAMETER ** (phi.holder_exponent - xi)


def _backward_stretch(params: MapParams) -> float:
    """Largest split-norm stretch of F⁻¹ or G on one of their pieces."""
    return max(params.alpha, math.e, 1.0 / params.sigma)


def _sup_abs(phi: PotentialSpec) -> float:
    """Upper bound of |φ|: the declared bounds, else corner values padded by C·span^ξ."""
    if phi.bounds is not None:
        return max(abs(phi.bounds[0]), abs(phi.bounds[1]))
    boxes = phi.boxes
    spans = (boxes[:, 1] - boxes[:, 0]).sum(axis=1)
    corner_values = np.abs(phi.values(boxes[:, 0]))
    return float((corner_values + phi.holder_constant * spans**phi.holder_exponent).max())


def _scale_bounds(bounds: tuple[float, float] | None, t: float) -> tuple[float, float] | None:
    if bounds is None:
        return None
    lo, hi = t * bounds[0], t * bounds[1]
    return (min(lo, hi), max(lo, hi))


# ── Basic potentials ──


def constant_potential(c: float) -> PotentialSpec:
    """φ ≡ c."""
    return PotentialSpec(
        evaluator=lambda pts: np.full(len(pts), float(c)),
        holder_constant=0.0,
        label=f"constant({c:g})",
        depends_on=(False, False, False),
        bounds=(float(c), float(c)),
    )


def central_potential(params: MapParams, t: float = 1.0) -> PotentialSpec:
    """φ_t = t·log |DF|_{E^c}|: t·log f′(y) on R0, t·log σ on R1."""
    # |d/dy log f'| ≤ 2(1 − e⁻¹)e, and the jump between slabs is spread over their gap
    lipschitz_y = 2.0 * (1.0 - math.exp(-1.0)) * math.e
    low = min(-1.0, math.log(params.sigma))
    jump = (1.0 - low) / (Z_R1_BOTTOM - Z_R0_TOP)
    return PotentialSpec(
        evaluator=lambda pts: t * central_log_derivative_values(pts, params),
        holder_exponent=1.0,
        holder_constant=abs(t) * max(lipschitz_y, jump),
        label=f"central(t={t:g})",
        depends_on=(False, True, True),
        bounds=_scale_bounds((low, 1.0), t),
    )


def step_potential(threshold: float = 0.5) -> PotentialSpec:
    """Indicator of y > threshold; the non-Hölder control case."""
    return PotentialSpec(
        evaluator=lambda pts: (pts[:, 1] > threshold).astype(float),
        holder_constant=math.inf,
        label=f"step(y>{threshold:g})",
        depends_on=(False, True, False),
        bounds=(0.0, 1.0),
    )


def coordinate_potential(weights: tuple[float, float, float]) -> PotentialSpec:
    """Linear potential a·x + b·y + c·z."""
    w = np.asarray(weights, dtype=float)
    return PotentialSpec(
        evaluator=lambda pts: pts @ w,
        holder_constant=float(np.abs(w).max()),
        label=f"linear{tuple(float(v) for v in w)}",
        depends_on=tuple(bool(v != 0.0) for v in w),
        bounds=(float(np.minimum(w, 0.0).sum()), float(np.maximum(w, 0.0).sum())),
    )


def scaled(phi: PotentialSpec, t: float) -> PotentialSpec:
    """t·φ."""
    return replace(
        phi,
        evaluator=lambda pts: t * phi.evaluator(pts),
        holder_constant=abs(t) * phi.holder_constant if t else 0.0,
        label=f"{t:g}*{phi.label}",
        bounds=_scale_bounds(phi.bounds, t),
        notes=dict(phi.notes),
    )


def add_constant(phi: PotentialSpec, c: float) -> PotentialSpec:
    """φ + c."""
    bounds = None if phi.bounds is None else (phi.bounds[0] + c, phi.bounds[1] + c)
    return replace(
        phi,
        evaluator=lambda pts: phi.evaluator(pts) + c,
        label=f"{phi.label}+{c:g}",
        bounds=bounds,
        notes=dict(phi.notes),
    )


def add(phi: PotentialSpec, psi: PotentialSpec) -> PotentialSpec:
    """φ + ψ with the weaker of the two Hölder exponents."""
    bounds = None
    if phi.bounds is not None and psi.bounds is not None:
        bounds = (phi.bounds[0] + psi.bounds[0], phi.bounds[1] + psi.bounds[1])
    xi = min(phi.holder_exponent, psi.holder_exponent)
    return PotentialSpec(
        evaluator=lambda pts: phi.evaluator(pts) + psi.evaluator(pts),
        holder_exponent=xi,
        holder_constant=_at_exponent(phi, xi) + _at_exponent(psi, xi),
        label=f"{phi.label}+{psi.label}",
        depends_on=tuple(a or b for a, b in zip(phi.depends_on, psi.depends_on, strict=True)),
        bounds=bounds,
        domain=phi.domain,
        pieces=phi.pieces if phi.pieces is not None else psi.pieces,
    )


def holder_pad(phi: PotentialSpec, widths: np.ndarray) -> float:
    """Largest C·(Σ widths over the coordinates φ depends on)^ξ; inf for non-Hölder φ."""
    if not phi.is_holder:
        return math.inf
    if phi.holder_constant == 0.0 or len(widths) == 0:
        return 0.0
    spread = np.asarray(widths, dtype=float).reshape(-1, 3)[:, list(phi.depends_on)].sum(axis=1)
    return phi.holder_constant * float(spread.max()) ** phi.holder_exponent


# ── Hölder spot checks ──


@dataclass
class HolderSpotCheck:
    """Largest sampled Hölder quotient of a potential.

    Attributes:
        max_quotient: max |φ(p) − φ(q)| / d(p, q)^ξ over the sampled pairs.
        declared: The declared constant C.
        within_tolerance: max_quotient ≤ 1.05·C.
        pairs: Number of pairs sampled.
    """

    max_quotient: float
    declared: float
    within_tolerance: bool
    pairs: int


def holder_spot_check(
    phi: PotentialSpec, rng: np.random.Generator, pairs: int = 1000, scale: float = 1e-2
) -> HolderSpotCheck:
    """Sample pairs inside the pieces of φ and compare their quotients with C.

    Both points of a pair share a piece. Half the pairs are nearby (the second
    point perturbed by up to ``scale`` and clipped back into the piece), half
    are independent.
    """
    boxes = phi.boxes
    p, index = sample_in_boxes(rng, boxes, pairs)
    low, high = boxes[index, 0], boxes[index, 1]
    q = low + rng.random((pairs, 3)) * (high - low)
    near = rng.random(pairs) < 0.5
    jitter = (rng.random((pairs, 3)) - 0.5) * 2.0 * scale
    q[near] = np.clip(p + jitter, low, high)[near]

    distance = split_distance(p, q)
    keep = distance > 0.0
    diffs = np.abs(phi.values(p) - phi.values(q))[keep]
    quotients = diffs / distance[keep] ** phi.holder_exponent
    max_quotient = float(quotients.max()) if quotients.size else 0.0
    ok = max_quotient <= 1.05 * phi.holder_constant + 1e-12
    if not ok:
        logger.warning(
            "Hölder spot check of %s: quotient %.4g exceeds declared C=%.4g",
            phi.label,
            max_quotient,
            phi.holder_constant,
        )
    return HolderSpotCheck(
        max_quotient=max_quotient,
        declared=phi.holder_constant,
        within_tolerance=ok,
        pairs=int(keep.sum()),
    )


def verify_holder(phi: PotentialSpec, pairs: int = 500, seed: int = 0) -> PotentialSpec:
    """Return φ once a spot check confirms its declared Hölder constant.

    Raises:
        PreconditionError: If a sampled quotient exceeds 1.05·C.
    """
    if not phi.is_holder:
        return phi
    check = holder_spot_check(phi, np.random.default_rng(seed), pairs=pairs)
    if not check.within_tolerance:
        raise PreconditionError(
            f"declared Hölder constant {check.declared:.4g} of {phi.label} is below "
            f"the sampled quotient {check.max_quotient:.4g}"
        )
    logger.debug(
        "Hölder spot check of %s: %.4g <= %.4g", phi.label, check.max_quotient, check.declared
    )
    return phi


# ── The plateau family ──


def example_potential(c0: float, peak: float, floor: float, xi: float) -> PotentialSpec:
    """Potential constant on {z ≤ c0} with its supremum at Q.

    φ = peak for z ≤ c0 and peak − (peak − floor)·((z − c0)/(1 − c0))^ξ above,
    so sup φ = φ(Q) = peak and inf φ = floor (attained at z = 1).

    Raises:
        RangeError: If c0 ∉ (5/6, 1), peak ≤ floor or ξ ∉ (0, 1].
    """
    if not Z_R1_BOTTOM < c0 < 1.0:
        raise RangeError(f"c0 must lie in (5/6, 1), got {c0}")
    if not peak > floor:
        raise RangeError(f"peak must exceed floor, got peak={peak}, floor={floor}")
    if not 0.0 < xi <= 1.0:
        raise RangeError(f"xi must lie in (0, 1], got {xi}")

    drop = peak - floor

    def evaluate(pts: np.ndarray) -> np.ndarray:
        excess = np.clip((pts[:, 2] - c0) / (1.0 - c0), 0.0, 1.0)
        return peak - drop * excess**xi

    spec = PotentialSpec(
        evaluator=evaluate,
        holder_exponent=xi,
        holder_constant=drop / (1.0 - c0) ** xi,
        label=f"plateau(c0={c0:g})",
        depends_on=(False, False, True),
        bounds=(floor, peak),
        notes={"c0": c0, "peak": peak, "floor": floor, "xi": xi},
    )
    return verify_holder(spec)


# ── Projective potentials ──


def planar_grid(params: MapParams, grid: int) -> np.ndarray:
    """grid × grid points on each of S1, S2, S3 (boundaries included)."""
    lam, sigma = params.lambda0, params.sigma
    s = np.linspace(0.0, 1.0, grid)
    u, v = np.meshgrid(s, s, indexing="ij")
    u, v = u.ravel(), v.ravel()
    s1 = np.column_stack([lam * u, v, np.zeros_like(u)])
    s2 = np.column_stack([X_SPLIT - lam + lam * u, sigma * v, np.zeros_like(u)])
    s3 = np.column_stack([lam * u, v, np.full_like(u, Z_R1_BOTTOM)])
    return np.vstack([s1, s2, s3])


def projective_example(
    u: PotentialSpec, v: PotentialSpec, params: MapParams, grid: int = 25
) -> PotentialSpec:
    """φ = v − u∘G on Ω.

    The inputs of the (D₁)/(D₂) certificates are recorded in ``notes``:
    ``sup_v_minus_uG`` and ``oscillation_u`` = sup u − inf u, both on the grid.

    Raises:
        PreconditionError: If v < u somewhere on the sample grid.
    """
    pts = planar_grid(params, grid)
    u_vals = u.values(pts)
    v_vals = v.values(pts)
    slack = float((v_vals - u_vals).min())
    if slack < -1e-12:
        raise PreconditionError(f"v must dominate u on the grid; min(v - u) = {slack:.4g}")

    def evaluate(points: np.ndarray) -> np.ndarray:
        return v.evaluator(points) - u.evaluator(apply_G(points, params))

    phi_vals = v_vals - u.values(apply_G(pts, params))
    xi = min(u.holder_exponent, v.holder_exponent)
    stretch = _backward_stretch(params) ** u.holder_exponent
    return PotentialSpec(
        evaluator=evaluate,
        holder_exponent=xi,
        holder_constant=_at_exponent(v, xi) + stretch * _at_exponent(u, xi),
        label=f"projective({v.label} - {u.label}∘G)",
        domain=PLANAR,
        pieces=planar_boxes(params),
        notes={
            "sup_v_minus_uG": float(phi_vals.max()),
            "oscillation_u": float(u_vals.max() - u_vals.min()),
            "min_v_minus_u": slack,
        },
    )


# ── Cohomology-style transforms ──


def cohomology_shift(
    phi: PotentialSpec, t: float, dynamics: str, params: MapParams
) -> PotentialSpec:
    """(1 − t)·φ + t·φ∘T with T = F⁻¹ or G.

    This is φ + u − u∘T for the transfer function u = −tφ, so Birkhoff sums over
    periodic orbits are unchanged.

    Raises:
        RangeError: If ``dynamics`` is neither ``"F_inv"`` nor ``"G"``.
    """
    if dynamics == "F_inv":
        step, domain, pieces = apply_F_inv, HORSESHOE, inverse_branch_boxes(params)
    elif dynamics == "G":
        step, domain, pieces = apply_G, PLANAR, planar_boxes(params)
    else:
        raise RangeError(f"dynamics must be 'F_inv' or 'G', got {dynamics!r}")

    if t == 0:
        return phi

    def evaluate(pts: np.ndarray) -> np.ndarray:
        return (1.0 - t) * phi.evaluator(pts) + t * phi.evaluator(step(pts, params))

    bounds = None
    if phi.bounds is not None:
        a = _scale_bounds(phi.bounds, 1.0 - t)
        b = _scale_bounds(phi.bounds, t)
        bounds = (a[0] + b[0], a[1] + b[1])
    stretch = _backward_stretch(params) ** phi.holder_exponent
    return PotentialSpec(
        evaluator=evaluate,
        holder_exponent=phi.holder_exponent,
        holder_constant=phi.holder_constant * (abs(1.0 - t) + abs(t) * stretch),
        label=f"shift({phi.label}, t={t:g}, {dynamics})",
        depends_on=(True, True, True),
        bounds=bounds,
        domain=domain,
        notes={"transfer": f"-{t:g}*{phi.label}"},
        pieces=pieces,
    )


def birkhoff_average_potential(phi: PotentialSpec, n: int, params: MapParams) -> PotentialSpec:
    """φ_n/n = (1/n)·Σ_{k<n} φ∘F^k, defined where F⁰, …, F^{n−1} all stay in R0 ∪ R1.

    Raises:
        RangeError: If n < 1.
    """
    if n < 1:
        raise RangeError(f"n must be at least 1, got {n}")
    if n == 1:
        return phi

    def evaluate(pts: np.ndarray) -> np.ndarray:
        current = pts
        total = phi.on_horseshoe(current)
        for _ in range(n - 1):
            current = apply_F(current, params)
            total = total + phi.on_horseshoe(current)
        return total / n

    # on one cylinder F stretches split distances by at most max(β0, e)
    stretch = max(params.beta0, math.e) ** phi.holder_exponent
    growth = sum(stretch**k for k in range(n)) / n
    return PotentialSpec(
        evaluator=evaluate,
        holder_exponent=phi.holder_exponent,
        holder_constant=phi.holder_constant * growth if phi.is_holder else math.inf,
        label=f"avg{n}({phi.label})",
        depends_on=tuple(d or j == 2 for j, d in enumerate(phi.depends_on)),
        bounds=phi.bounds,
        notes={"n": n},
        pieces=forward_domain_boxes(n, params),
    )


def cloud_distance(points: np.ndarray, cloud: np.ndarray) -> np.ndarray:
    """Split-norm distance from each point to the nearest cloud point."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    cloud = np.asarray(cloud, dtype=float).reshape(-1, 3)
    out = np.empty(len(pts))
    for start in range(0, len(pts), 2048):
        chunk = pts[start : start + 2048]
        out[start : start + 2048] = np.abs(chunk[:, None, :] - cloud[None, :, :]).sum(-1).min(1)
    return out


def distance_weight(phi: PotentialSpec, cloud: np.ndarray, t: float) -> PotentialSpec:
    """(1 + t·d(x, X))·φ(x) for a point cloud X.

    The weighted potential equals φ on X, so integrals against measures
    supported on X are unchanged.

    Raises:
        PreconditionError: If t ≠ 0 and (1 + t·d(Q, X))·φ(Q) is not below
            the supremum of φ over X.
    """
    cloud = np.asarray(cloud, dtype=float).reshape(-1, 3)
    if t == 0:
        return phi
    if len(cloud) == 0:
        raise PreconditionError("distance weighting needs a non-empty cloud")

    q = np.asarray(Q, dtype=float).reshape(1, 3)
    weighted_q = (1.0 + t * cloud_distance(q, cloud)[0]) * phi.values(q)[0]
    cloud_sup = float(phi.values(cloud).max())
    if not weighted_q < cloud_sup:
        raise PreconditionError(
            f"(1 + t d(Q, X)) φ(Q) = {weighted_q:.6g} is not below sup φ|X = {cloud_sup:.6g}"
        )

    def evaluate(pts: np.ndarray) -> np.ndarray:
        return (1.0 + t * cloud_distance(pts, cloud)) * phi.evaluator(pts)

    # d(·, X) is 1-Lipschitz and at most the split diameter
    if phi.is_holder:
        xi = phi.holder_exponent
        constant = phi.holder_constant * (1.0 + abs(t) * SPLIT_DIAMETER)
        constant += abs(t) * _sup_abs(phi) * SPLIT_DIAMETER ** (1.0 - xi)
    else:
        constant = math.inf
    return PotentialSpec(
        evaluator=evaluate,
        holder_exponent=phi.holder_exponent,
        holder_constant=constant,
        label=f"weighted({phi.label}, t={t:g})",
        domain=phi.domain,
        notes={"weighted_Q": weighted_q, "cloud_sup": cloud_sup, "cloud_size": len(cloud)},
        pieces=phi.pieces,
    )


# ── Config factory ──


def build_potential(config: PotentialConfig, params: MapParams) -> PotentialSpec:
    """Build a potential from its declarative description.

    Every level of a nested description is spot-checked against its declared
    Hölder constant.

    Raises:
        PreconditionError: If a composite kind is missing its nested description,
            or a declared Hölder constant fails its spot check.
    """
    return verify_holder(_construct(config, params))


def _construct(config: PotentialConfig, params: MapParams) -> PotentialSpec:
    kind = config.kind
    if kind == "constant":
        return constant_potential(config.value)
    if kind == "central":
        return central_potential(params, config.t)
    if kind == "example":
        return example_potential(config.c0, config.peak, config.floor, config.xi)

    if kind == "projective":
        if config.u is None or config.v is None:
            raise PreconditionError("kind=projective needs both u and v")
        return projective_example(
            build_potential(config.u, params), build_potential(config.v, params), params
        )

    if config.base is None:
        raise PreconditionError(f"kind={kind} needs a base potential")
    base = build_potential(config.base, params)
    if kind == "scaled":
        return scaled(base, config.t)
    if kind == "coboundary-shift":
        return cohomology_shift(base, config.t, config.dynamics, params)

    cloud = np.vstack([periodic_orbit(c, params) for c in periodic_cycles(config.cloud_period)])
    return distance_weight(base, cloud, config.t)
