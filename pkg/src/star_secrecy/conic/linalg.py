"""
Eigen-based helpers for PSD iterates
"""

from typing import Tuple

import numpy as np

from ..models.system import DomainError

HERMITIAN_TOLERANCE = 1e-9


def _check_hermitian(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"Expected a square matrix, got shape {matrix.shape}")
    skew = np.max(np.abs(matrix - matrix.conj().T)) if matrix.size else 0.0
    if skew > HERMITIAN_TOLERANCE * max(1.0, float(np.max(np.abs(matrix)))):
        raise DomainError(f"Matrix is not Hermitian (skew {skew:.3g})")
    return matrix


def hermitian_part(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix)
    return 0.5 * (matrix + matrix.conj().T)


def psd_project(matrix: np.ndarray) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm (eigenvalues clipped at zero)."""
    matrix = hermitian_part(_check_hermitian(matrix))
    eigvals, eigvecs = np.linalg.eigh(matrix)
    clipped = np.clip(eigvals, 0.0, None)
    projected = (eigvecs * clipped) @ eigvecs.conj().T
    projected = hermitian_part(projected)
    if not np.iscomplexobj(matrix):
        projected = projected.real
    return projected


def leading_eigenvector(matrix: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Largest eigenvalue and its unit eigenvector.

    The global phase is fixed so that the largest-magnitude entry is real and positive.
    """
    matrix = hermitian_part(_check_hermitian(matrix))
    eigvals, eigvecs = np.linalg.eigh(matrix)
    vector = eigvecs[:, -1]
    pivot = vector[np.argmax(np.abs(vector))]
    if abs(pivot) > 0:
        vector = vector * (abs(pivot) / pivot)
    return float(eigvals[-1]), vector / np.linalg.norm(vector)
