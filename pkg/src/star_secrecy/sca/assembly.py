"""
Conic building blocks shared by the convex restrictions of both pipelines
"""

import math
from typing import Dict, Optional

import numpy as np

from ..conic.program import (
    Affine,
    ConeBuilder,
    ConeProgram,
    HermitianVariable,
    Variable,
    congruence_operator,
    hvec,
)
from ..models.system import User
from .iterate import BeamformingIterate, LinkSet, embed_surface


class RestrictionAssembler:
    """
    Holds the variables of one convex restriction around a local point.

    Variables are W (M x M Hermitian), one surface matrix per active user restricted to
    its elements, and scalar slacks created on demand. Every constraint added here is
    satisfied with equality or slack at the local point it was built from.
    """

    def __init__(self, links: LinkSet, iterate: BeamformingIterate):
        self.links = links
        self.iterate = iterate
        self.builder = ConeBuilder()
        self.w = self.builder.hermitian("W", links.num_antennas)
        self.surfaces: Dict[User, HermitianVariable] = {
            user: self.builder.hermitian(f"U_{user.side}", link.size) for user, link in links.links.items()
        }
        self.t_lower: Dict[User, Variable] = {}
        self.t_upper: Dict[User, Variable] = {}
        self.penalties: Dict[User, Variable] = {}
        self.handles: Dict[str, Variable] = {}

    def scalar(self, name: str, nonnegative: bool = True) -> Variable:
        var = self.builder.variable(name)
        self.handles[name] = var
        if nonnegative:
            self.builder.nonneg(var.expr())
        return var

    def base_constraints(self):
        """Unit-trace PSD W, PSD surfaces, per-element energy budget."""
        b = self.builder
        b.zero(self.w.trace() - 1.0)
        b.psd(self.w)
        for surface in self.surfaces.values():
            b.psd(surface)
        mask = self.links.mask
        for n in range(mask.num_elements):
            terms = []
            for user, link in self.links.links.items():
                if n in link.indices:
                    terms.append(self.surfaces[user].diagonal(link.indices.index(n)))
            if terms:
                b.nonneg(1.0 - sum(terms[1:], terms[0]))

    def _local_blocks(self, user: User):
        link = self.links[user]
        x_local = link.q.conj().T @ self.iterate.w @ link.q
        u_local = self.iterate.restricted(user, link.indices)
        return hvec(x_local), hvec(u_local)

    def lower_bound(self, user: User) -> Variable:
        """t ≤ Tr(q̂^H W q̂ U) through the concave polarization surrogate."""
        link = self.links[user]
        x_loc, u_loc = self._local_blocks(user)
        c_plus = x_loc + u_loc
        x = self.w.congruence(link.q)
        u = self.surfaces[user].vector()
        t = self.scalar(f"t_lo_{user.value}")
        e = self.scalar(f"e_lo_{user.value}")
        self.builder.quadratic_epigraph(x - u, e)
        linear = self.w.coords.dot(c_plus @ congruence_operator(link.q)) + self.surfaces[user].coords.dot(c_plus)
        self.builder.nonneg(linear * 2.0 - float(c_plus @ c_plus) - e - t * 4.0)
        self.t_lower[user] = t
        return t

    def upper_bound(self, user: User) -> Variable:
        """t ≥ Tr(q̂^H W q̂ U) through the convex polarization surrogate."""
        link = self.links[user]
        x_loc, u_loc = self._local_blocks(user)
        c_minus = x_loc - u_loc
        x = self.w.congruence(link.q)
        u = self.surfaces[user].vector()
        t = self.scalar(f"t_up_{user.value}")
        e = self.scalar(f"e_up_{user.value}")
        self.builder.quadratic_epigraph(x + u, e)
        linear = self.w.coords.dot(c_minus @ congruence_operator(link.q)) - self.surfaces[user].coords.dot(c_minus)
        self.builder.nonneg(t * 4.0 - e + linear * 2.0 - float(c_minus @ c_minus))
        self.t_upper[user] = t
        return t

    def eve_snr(self, user: User) -> Affine:
        """Tr(E U), linear in the surface matrix."""
        return self.surfaces[user].inner(self.links[user].eve)

    def received(self, user: User, bound: Variable) -> Affine:
        """Normalized received SNR g·t."""
        return bound * self.links[user].gain

    def sic_order(self, strong: User, weak: User):
        """First-decoded user's received power dominates the second's."""
        self.builder.nonneg(self.received(strong, self.t_lower[strong]) - self.received(weak, self.t_upper[weak]))

    def sinr_majorant(self, strong: User, weak: User, phi: Variable, varpi: float):
        """φ·(g_w t_up + 1) ≤ g_s t_lo, bilinear side replaced by its convex majorant."""
        half = math.sqrt(varpi / 2.0)
        interference = self.received(weak, self.t_upper[weak]) + 1.0
        v = Affine.stack([interference * half, phi * (1.0 / math.sqrt(2.0 * varpi))])
        self.builder.quadratic_epigraph(v, self.received(strong, self.t_lower[strong]))

    def rank_penalties(self) -> Affine:
        """ρ ≥ Tr(U) - u₁^H U u₁ per surface; returns Σρ."""
        total: Optional[Affine] = None
        for user, link in self.links.links.items():
            lead = self.iterate.lead(user, link.indices)
            complement = np.eye(link.size) - np.outer(lead, lead.conj())
            rho = self.scalar(f"rho_{user.side}")
            self.builder.nonneg(rho - self.surfaces[user].inner(complement))
            self.penalties[user] = rho
            total = rho.expr() if total is None else total + rho
        return total if total is not None else Affine.constant(0.0)

    def build(self) -> ConeProgram:
        return self.builder.build()

    def read(self, x: np.ndarray) -> Dict[str, object]:
        """Raw matrices and slacks of a primal solution."""
        n = self.links.mask.num_elements
        surfaces = {User.IU: np.zeros((n, n), dtype=complex), User.OU: np.zeros((n, n), dtype=complex)}
        for user, surface in self.surfaces.items():
            surfaces[user] = embed_surface(surface.value(x), self.links[user].indices, n)
        return {
            "w": self.w.value(x),
            "u_t": surfaces[User.IU],
            "u_r": surfaces[User.OU],
            "t_lower": {user: float(var.value(x)[0]) for user, var in self.t_lower.items()},
            "t_upper": {user: float(var.value(x)[0]) for user, var in self.t_upper.items()},
            "rho": {user: float(var.value(x)[0]) for user, var in self.penalties.items()},
        }

