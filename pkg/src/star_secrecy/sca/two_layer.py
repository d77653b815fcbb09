"""
Two-layer penalty/SCA loop shared by the full- and statistical-CSI pipelines
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
import structlog

from ..conic.program import ConeProgram
from ..conic.solver import ConeSolution, SolverError, SolverOptions, SolverStatus, solve
from ..models.system import DecodingOrder, StarSecrecyError, Tolerances, User
from .assembly import RestrictionAssembler
from .iterate import BeamformingIterate, LinkSet, sanitize

logger = structlog.get_logger(__name__)


class SolverFailure(StarSecrecyError):
    """A convex restriction could not be solved"""

    def __init__(self, message: str, iteration: int, stage: str,
                 status: Optional[SolverStatus] = None):
        super().__init__(f"{message} (stage={stage}, iteration={iteration})")
        self.iteration = iteration
        self.stage = stage
        self.status = status


class InfeasibleError(StarSecrecyError):
    """No decoding order produced a usable operating point"""

    def __init__(self, message: str, reasons: Optional[dict] = None):
        super().__init__(message)
        self.reasons = dict(reasons or {})


@dataclass
class TwoLayerResult:
    """Final iterate of the two-layer loop and its bookkeeping"""
    iterate: BeamformingIterate
    inner_trace: List[float] = field(default_factory=list)
    rounds: int = 0
    converged: bool = False
    rank_ratios: dict = field(default_factory=dict)

    @property
    def degraded(self) -> bool:
        return self.iterate.degraded


class ConvexRestriction(ABC):
    """
    One family of convex restrictions around a moving local point.

    Subclasses add their own constraints and objective on top of the shared blocks and
    update their auxiliary parameters after each solve.
    """

    stage = "restriction"

    def __init__(self, links: LinkSet, order: Optional[DecodingOrder]):
        self.links = links
        self.order = order

    @property
    def users(self):
        return self.links.users

    @abstractmethod
    def assemble(self, iterate: BeamformingIterate) -> Tuple[RestrictionAssembler, ConeProgram]:
        """Build the restriction around `iterate`."""

    @abstractmethod
    def update_parameters(self, iterate: BeamformingIterate, assembler: RestrictionAssembler,
                          x: np.ndarray) -> BeamformingIterate:
        """Refresh the scalar slacks and auxiliary parameters after a solve."""

    @abstractmethod
    def progress(self, iterate: BeamformingIterate) -> float:
        """Scalar monitored by the inner stopping rule."""

    def advance(self, iterate: BeamformingIterate, assembler: RestrictionAssembler,
                solution: ConeSolution) -> BeamformingIterate:
        raw = assembler.read(solution.x)
        moved = replace(
            iterate,
            w=sanitize(raw["w"], unit_trace=True),
            u_t=sanitize(raw["u_t"]),
            u_r=sanitize(raw["u_r"]),
            t_lower=raw["t_lower"],
            t_upper=raw["t_upper"],
            rho_t=raw["rho"].get(User.IU, 0.0),
            rho_r=raw["rho"].get(User.OU, 0.0),
            objective=solution.objective,
        )
        return self.update_parameters(moved, assembler, solution.x)


def solve_round(program: ConeProgram, options: SolverOptions, iteration: int, stage: str) -> ConeSolution:
    """
    Solve one restriction, accepting iteration-capped runs with small residuals.

    Raises:
        SolverFailure: infeasible, unbounded or inaccurate solve
    """
    try:
        solution = solve(program, options)
    except SolverError as e:
        raise SolverFailure(str(e), iteration, stage) from e

    if solution.status in (SolverStatus.PRIMAL_INFEASIBLE, SolverStatus.DUAL_INFEASIBLE):
        raise SolverFailure(f"Restriction reported {solution.status.value}", iteration, stage, solution.status)
    if solution.x is None:
        raise SolverFailure("Backend returned no primal point", iteration, stage, solution.status)
    if solution.status is SolverStatus.MAX_ITERATIONS:
        if solution.worst_residual > options.accept_residual:
            raise SolverFailure(
                f"Iteration cap reached with residual {solution.worst_residual:.3g}",
                iteration, stage, solution.status,
            )
        logger.warning("Accepting iteration-capped solve",
                       stage=stage, iteration=iteration, residual=solution.worst_residual)
    return solution


def two_layer_loop(restriction: ConvexRestriction, initial: BeamformingIterate,
                   tolerances: Tolerances, options: Optional[SolverOptions] = None) -> TwoLayerResult:
    """
    Inner SCA rounds at fixed penalty scale, outer growth of the scale.

    The inner layer stops when the monitored scalar changes by at most `inner_tol`; the
    outer layer stops once the recomputed rank penalties sum to at most `penalty_tol`.

    Args:
        restriction: Problem family to iterate
        initial: Feasible local point
        tolerances: Thresholds and caps
        options: Interior-point settings

    Returns:
        TwoLayerResult; a rank-one shortfall is flagged on the iterate, not raised
    """
    options = options or SolverOptions()
    mask = restriction.links.mask
    iterate = initial
    trace: List[float] = []
    rounds = 0
    converged = False

    for outer in range(1, tolerances.max_outer + 1):
        previous = math.inf
        for _ in range(tolerances.max_inner):
            rounds += 1
            assembler, program = restriction.assemble(iterate)
            solution = solve_round(program, options, rounds, restriction.stage)
            iterate = restriction.advance(iterate, assembler, solution)
            metric = restriction.progress(iterate)
            trace.append(metric)
            logger.debug("Inner round finished", stage=restriction.stage, round=rounds,
                         metric=metric, tau=iterate.tau)
            if abs(metric - previous) <= tolerances.inner_tol:
                break
            previous = metric

        residual = iterate.penalty_residual(mask)
        logger.debug("Outer round finished", stage=restriction.stage, outer=outer,
                     penalty=residual, tau=iterate.tau)
        if residual <= tolerances.penalty_tol:
            converged = True
            break
        iterate = replace(iterate, tau=iterate.tau * tolerances.penalty_growth)

    ratios = iterate.rank_ratios(mask)
    degraded = min(ratios.values()) < 1.0 - tolerances.penalty_tol
    if degraded:
        logger.warning("Rank-one extraction below threshold",
                       stage=restriction.stage, ratios=ratios, rounds=rounds)
    iterate = replace(iterate, degraded=degraded)
    return TwoLayerResult(iterate=iterate, inner_trace=trace, rounds=rounds,
                          converged=converged, rank_ratios=ratios)
