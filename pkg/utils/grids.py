"""
Finite-difference helpers on uniform grids.
"""
from typing import Iterable, Tuple

import numpy as np


def central_difference(values: np.ndarray, h: float) -> np.ndarray:
    """First derivative: five-point stencil inside, second order at the two outer points."""
    values = np.asarray(values)
    if values.size < 5:
        return np.gradient(values, h, edge_order=2)
    derivative = np.gradient(values, h, edge_order=2)
    derivative[2:-2] = (
        values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1] - values[4:]
    ) / (12.0 * h)
    return derivative


def apply_factor_chain(values: np.ndarray, h: float, shifts: Iterable[np.ndarray]) -> np.ndarray:
    """Apply (∂ + s_{last}) ··· (∂ + s_first) to grid values, first shift applied first."""
    image = np.asarray(values, dtype=complex)
    for shift in shifts:
        image = central_difference(image, h) + shift * image
    return image


def tridiagonal(potential: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Diagonals of −½∂² + v with Dirichlet walls: 1/h² + v and −1/(2h²)."""
    potential = np.asarray(potential, dtype=float)
    diagonal = 1.0 / h ** 2 + potential
    off_diagonal = np.full(potential.size - 1, -0.5 / h ** 2)
    return diagonal, off_diagonal


def tridiagonal_matvec(diagonal: np.ndarray, off_diagonal: np.ndarray, vector: np.ndarray) -> np.ndarray:
    result = diagonal * vector
    result[:-1] += off_diagonal * vector[1:]
    result[1:] += off_diagonal * vector[:-1]
    return result
