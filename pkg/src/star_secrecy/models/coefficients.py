"""
STAR-RIS transmission/reflection coefficients
"""

from dataclasses import dataclass

import numpy as np

from .system import DomainError

ENERGY_TOLERANCE = 1e-9
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class StarCoefficients:
    """
    Energy-splitting coefficients of an N-element STAR-RIS.

    beta_t/beta_r are amplitude-squared values, theta_t/theta_r phases in [0, 2π).
    """
    beta_t: np.ndarray
    beta_r: np.ndarray
    theta_t: np.ndarray
    theta_r: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("beta_t", "beta_r", "theta_t", "theta_r"):
            value = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            value.setflags(write=False)
            arrays[name] = value
        sizes = {a.size for a in arrays.values()}
        if len(sizes) != 1:
            raise DomainError(f"Coefficient vectors must share one length, got {sorted(sizes)}")
        if np.any(arrays["beta_t"] < -ENERGY_TOLERANCE) or np.any(arrays["beta_r"] < -ENERGY_TOLERANCE):
            raise DomainError("Amplitude coefficients must be nonnegative")
        if np.any(arrays["beta_t"] + arrays["beta_r"] > 1.0 + ENERGY_TOLERANCE):
            raise DomainError("Energy conservation violated: beta_t + beta_r > 1")
        for name in ("theta_t", "theta_r"):
            wrapped = np.mod(arrays[name], TWO_PI)
            wrapped.setflags(write=False)
            arrays[name] = wrapped
        for name in ("beta_t", "beta_r"):
            clipped = np.clip(arrays[name], 0.0, 1.0)
            clipped.setflags(write=False)
            arrays[name] = clipped
        for name, value in arrays.items():
            object.__setattr__(self, name, value)

    @property
    def num_elements(self) -> int:
        return int(self.beta_t.size)

    def transmission_vector(self) -> np.ndarray:
        """Diagonal of Θ^t as a complex vector."""
        return np.sqrt(self.beta_t) * np.exp(1j * self.theta_t)

    def reflection_vector(self) -> np.ndarray:
        return np.sqrt(self.beta_r) * np.exp(1j * self.theta_r)

    def side_vector(self, side: str) -> np.ndarray:
        return self.transmission_vector() if side == "t" else self.reflection_vector()

    @classmethod
    def from_vectors(cls, u_t: np.ndarray, u_r: np.ndarray, tolerance: float = 1e-6) -> "StarCoefficients":
        """
        Build coefficients from complex element vectors.

        Elements whose energy exceeds 1 by at most `tolerance` (solver round-off) are
        rescaled onto the constraint.
        """
        u_t = np.asarray(u_t, dtype=complex).reshape(-1)
        u_r = np.asarray(u_r, dtype=complex).reshape(-1)
        beta_t = np.abs(u_t) ** 2
        beta_r = np.abs(u_r) ** 2
        total = beta_t + beta_r
        if np.any(total > 1.0 + tolerance):
            raise DomainError(f"Element energy {total.max():.6g} exceeds 1")
        scale = np.where(total > 1.0, 1.0 / np.maximum(total, 1.0), 1.0)
        return cls(
            beta_t=beta_t * scale,
            beta_r=beta_r * scale,
            theta_t=np.angle(u_t),
            theta_r=np.angle(u_r),
        )
