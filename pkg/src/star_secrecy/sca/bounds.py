"""
Convex bounding pieces shared by the SCA pipelines
"""

from typing import NamedTuple

import numpy as np

from ..conic.linalg import hermitian_part
from ..models.system import DomainError


class PolarizationBounds(NamedTuple):
    lower: float
    upper: float


class RankOneFactor(NamedTuple):
    vector: np.ndarray
    eigenvalue: float
    ratio: float


def _congruence(q: np.ndarray, w: np.ndarray) -> np.ndarray:
    q = np.asarray(q)
    w = np.asarray(w)
    if w.shape != (q.shape[0], q.shape[0]):
        raise DomainError(f"W of shape {w.shape} does not match cascade of shape {q.shape}")
    return q.conj().T @ w @ q


def _check_surface(q: np.ndarray, u: np.ndarray):
    if np.shape(u) != (q.shape[1], q.shape[1]):
        raise DomainError(f"U of shape {np.shape(u)} does not match cascade of shape {q.shape}")


def _frob2(matrix: np.ndarray) -> float:
    return float(np.real(np.vdot(matrix, matrix)))


def _inner(a: np.ndarray, b: np.ndarray) -> float:
    """Re Tr(A^H B)."""
    return float(np.real(np.vdot(a, b)))


def polarization_value(q: np.ndarray, w: np.ndarray, u: np.ndarray) -> float:
    """Tr(q^H W q U) written as ¼(‖X + U‖² - ‖X - U‖²) with X = q^H W q."""
    q = np.asarray(q)
    _check_surface(q, u)
    x = _congruence(q, w)
    return 0.25 * (_frob2(x + u) - _frob2(x - u))


def polarization_bounds(q: np.ndarray, w: np.ndarray, u: np.ndarray,
                        w_local: np.ndarray, u_local: np.ndarray) -> PolarizationBounds:
    """
    Concave lower and convex upper surrogates of Tr(q^H W q U) around (W̃, Ũ).

    The lower bound linearizes ‖X + U‖², the upper bound linearizes ‖X - U‖²; both are
    tight at the local point.
    """
    q = np.asarray(q)
    _check_surface(q, u)
    _check_surface(q, u_local)
    x = _congruence(q, w)
    x_local = _congruence(q, w_local)
    c_plus = x_local + u_local
    c_minus = x_local - u_local
    lower = 0.25 * (2.0 * _inner(c_plus, x + u) - _frob2(c_plus) - _frob2(x - u))
    upper = 0.25 * (_frob2(x + u) - 2.0 * _inner(c_minus, x - u) + _frob2(c_minus))
    return PolarizationBounds(lower, upper)


def bilinear_majorant(t_upper: float, phi: float, varpi: float, power: float, noise_power: float) -> float:
    """
    Convex majorant ½(ϖ(P·T + σ²)² + φ²/ϖ) of the bilinear term (P·T + σ²)·φ.

    Tight, with matching partial derivatives, at ϖ = φ / (P·T + σ²).
    """
    if not varpi > 0:
        raise DomainError(f"Majorization parameter must be positive, got {varpi}")
    interference = power * t_upper + noise_power
    return 0.5 * (varpi * interference ** 2 + phi ** 2 / varpi)


def majorant_tangent(t_upper: float, phi: float, power: float, noise_power: float) -> float:
    """ϖ at which bilinear_majorant touches the bilinear term."""
    return phi / (power * t_upper + noise_power)


def dc_penalty_row(u: np.ndarray, lead: np.ndarray) -> float:
    """Tr(U) - u₁^H U u₁; zero iff U is rank one along u₁."""
    u = np.asarray(u)
    lead = np.asarray(lead).reshape(-1)
    return float(np.real(np.trace(u) - np.vdot(lead, u @ lead)))


def rank_one_extract(matrix: np.ndarray) -> RankOneFactor:
    """
    Top eigenvector and rank ratio λ1/Σλ of a PSD matrix.

    A zero matrix reports ratio 1.
    """
    matrix = hermitian_part(np.asarray(matrix))
    eigvals, eigvecs = np.linalg.eigh(matrix)
    eigvals = np.clip(eigvals, 0.0, None)
    vector = eigvecs[:, -1]
    pivot = vector[np.argmax(np.abs(vector))]
    if abs(pivot) > 0:
        vector = vector * (abs(pivot) / pivot)
    total = float(np.sum(eigvals))
    ratio = float(eigvals[-1] / total) if total > 0 else 1.0
    return RankOneFactor(vector / np.linalg.norm(vector), float(eigvals[-1]), ratio)
