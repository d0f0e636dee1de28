"""Leading eigen-triple of nonnegative matrices by power iteration."""

import logging
from dataclasses import dataclass

import numpy as np

from horseshoe_thermo.errors import ConvergenceError, DegenerateError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000
_GAP_DENSE_LIMIT = 400


@dataclass
class EigenTriple:
    """Perron data of a nonnegative irreducible matrix.

    Attributes:
        value: Leading eigenvalue λ.
        left: Positive left eigenvector, scaled so that left · right = 1.
        right: Positive right eigenvector, summing to 1.
        iterations: Power-iteration steps used (larger of the two sides).
        gap: 1 − |λ₂|/λ, or NaN when the matrix is too large for a dense solve.
    """

    value: float
    left: np.ndarray
    right: np.ndarray
    iterations: int
    gap: float


def _power_iterate(matrix: np.ndarray, tol: float, max_iter: int) -> tuple[float, np.ndarray, int]:
    n = matrix.shape[0]
    vector = np.full(n, 1.0 / n)
    value = 0.0
    for step in range(1, max_iter + 1):
        image = matrix @ vector
        norm = image.sum()
        if not norm > 0.0:
            raise DegenerateError("power iteration hit the zero vector")
        image /= norm
        value_change = abs(norm - value) / norm
        vector_change = np.abs(image - vector).max()
        vector, value = image, norm
        if value_change <= tol and vector_change <= tol:
            return value, vector, step
    raise ConvergenceError(
        f"power iteration did not reach relative change {tol:g} in {max_iter} steps"
    )


def spectral_gap(matrix: np.ndarray) -> float:
    """1 − |λ₂|/|λ₁| from a dense eigenvalue solve, NaN for large matrices."""
    if matrix.shape[0] == 1:
        return 1.0
    if matrix.shape[0] > _GAP_DENSE_LIMIT:
        return float("nan")
    moduli = np.sort(np.abs(np.linalg.eigvals(matrix)))[::-1]
    if moduli[0] == 0.0:
        return float("nan")
    return float(1.0 - moduli[1] / moduli[0])


def leading_eigen(
    matrix: np.ndarray, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> EigenTriple:
    """Leading eigenvalue with left and right eigenvectors.

    Starts from the uniform vector, so repeated calls are bitwise identical.

    Args:
        matrix: Square nonnegative irreducible matrix.
        tol: Relative change of eigenvalue and vector at which to stop.
        max_iter: Iteration budget per side.

    Raises:
        DegenerateError: If the matrix is empty or annihilates the iterate.
        ConvergenceError: If the budget runs out.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise DegenerateError(f"need a non-empty square matrix, got shape {matrix.shape}")

    value, right, right_steps = _power_iterate(matrix, tol, max_iter)
    _, left, left_steps = _power_iterate(matrix.T.copy(), tol, max_iter)
    left = left / float(left @ right)
    gap = spectral_gap(matrix)
    logger.debug(
        "Leading eigenvalue %.12g of a %d-state matrix after %d/%d steps (gap %.3g)",
        value,
        matrix.shape[0],
        right_steps,
        left_steps,
        gap,
    )
    return EigenTriple(
        value=value,
        left=left,
        right=right,
        iterations=max(right_steps, left_steps),
        gap=gap,
    )
