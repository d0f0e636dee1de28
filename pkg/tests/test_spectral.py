"""Tests for the power-iteration eigen solver."""

import math

import numpy as np
import pytest

from horseshoe_thermo.errors import ConvergenceError, DegenerateError
from horseshoe_thermo.spectral import leading_eigen, spectral_gap

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


class TestLeadingEigen:
    """Test the Perron triple of small nonnegative matrices."""

    def test_golden_mean_shift(self) -> None:
        triple = leading_eigen(np.array([[1.0, 1.0], [1.0, 0.0]]))
        assert triple.value == pytest.approx(GOLDEN, rel=1e-12)
        assert triple.right.sum() == pytest.approx(1.0)
        assert float(triple.left @ triple.right) == pytest.approx(1.0)
        assert np.all(triple.left > 0)
        assert np.all(triple.right > 0)
        assert triple.gap == pytest.approx(1.0 - 1.0 / GOLDEN**2)

    def test_eigen_equations(self) -> None:
        rng = np.random.default_rng(0)
        matrix = rng.random((6, 6)) + 0.1
        triple = leading_eigen(matrix)
        assert np.allclose(matrix @ triple.right, triple.value * triple.right, atol=1e-10)
        assert np.allclose(triple.left @ matrix, triple.value * triple.left, atol=1e-10)

    def test_deterministic(self) -> None:
        matrix = np.array([[0.5, 0.2, 0.0], [0.3, 0.1, 0.4], [0.2, 0.6, 0.3]])
        a = leading_eigen(matrix)
        b = leading_eigen(matrix)
        assert a.value == b.value
        assert np.array_equal(a.right, b.right)

    def test_one_by_one(self) -> None:
        triple = leading_eigen(np.array([[3.0]]))
        assert triple.value == pytest.approx(3.0)
        assert triple.gap == 1.0

    def test_degenerate(self) -> None:
        with pytest.raises(DegenerateError):
            leading_eigen(np.zeros((0, 0)))
        with pytest.raises(DegenerateError):
            leading_eigen(np.zeros((2, 2)))
        with pytest.raises(DegenerateError):
            leading_eigen(np.ones((2, 3)))

    def test_budget_exhausted(self) -> None:
        with pytest.raises(ConvergenceError):
            leading_eigen(np.array([[1.0, 1.0], [1.0, 0.0]]), max_iter=1)

    def test_gap_of_large_matrix_is_nan(self) -> None:
        assert math.isnan(spectral_gap(np.ones((500, 500))))
