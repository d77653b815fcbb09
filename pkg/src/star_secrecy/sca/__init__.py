"""
Successive convex approximation building blocks
"""

from .assembly import RestrictionAssembler
from .bounds import (
    PolarizationBounds,
    RankOneFactor,
    bilinear_majorant,
    dc_penalty_row,
    majorant_tangent,
    polarization_bounds,
    polarization_value,
    rank_one_extract,
)
from .iterate import (
    BeamformingIterate,
    DegenerateBeamformingError,
    ElementMask,
    LinkSet,
    UserLink,
    build_links,
    initial_iterate,
    iterate_from_point,
)
from .two_layer import (
    ConvexRestriction,
    InfeasibleError,
    SolverFailure,
    TwoLayerResult,
    solve_round,
    two_layer_loop,
)

__all__ = [
    "RestrictionAssembler",
    "PolarizationBounds",
    "RankOneFactor",
    "bilinear_majorant",
    "dc_penalty_row",
    "majorant_tangent",
    "polarization_bounds",
    "polarization_value",
    "rank_one_extract",
    "BeamformingIterate",
    "DegenerateBeamformingError",
    "ElementMask",
    "LinkSet",
    "UserLink",
    "build_links",
    "initial_iterate",
    "iterate_from_point",
    "ConvexRestriction",
    "InfeasibleError",
    "SolverFailure",
    "TwoLayerResult",
    "solve_round",
    "two_layer_loop",
]
