"""
Interior-point solution of cone programs through CVXOPT's conelp
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import structlog
from cvxopt import matrix, solvers, spmatrix
from pydantic import BaseModel, ConfigDict, Field, field_validator
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt

from ..models.system import StarSecrecyError
from .program import PSD, SQRT2, ConeProgram, NonNeg, SecondOrder, Zero, svec, svec_indices

logger = structlog.get_logger(__name__)


class SolverError(StarSecrecyError):
    """The interior-point backend failed to produce an iterate"""
    pass


class SolverStatus(str, Enum):
    OPTIMAL = "optimal"
    PRIMAL_INFEASIBLE = "primal_infeasible"
    DUAL_INFEASIBLE = "dual_infeasible"
    MAX_ITERATIONS = "max_iterations"


_STATUS_MAP = {
    "optimal": SolverStatus.OPTIMAL,
    "primal infeasible": SolverStatus.PRIMAL_INFEASIBLE,
    "dual infeasible": SolverStatus.DUAL_INFEASIBLE,
    "unknown": SolverStatus.MAX_ITERATIONS,
}


class SolverOptions(BaseModel):
    """Interior-point accuracy and iteration settings"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    max_iterations: int = Field(default=100, description="Interior-point iteration cap")
    abstol: float = Field(default=1e-8, description="Absolute duality-gap tolerance")
    reltol: float = Field(default=1e-7, description="Relative duality-gap tolerance")
    feastol: float = Field(default=1e-8, description="Primal/dual feasibility tolerance")
    retry_attempts: int = Field(default=3, description="Attempts on numerical breakdown")
    accept_residual: float = Field(default=1e-4,
                                   description="Largest residual at which an iteration-capped solve is still used")

    @field_validator('max_iterations', 'retry_attempts')
    @classmethod
    def validate_counts(cls, v):
        if v < 1:
            raise ValueError('Iteration and attempt counts must be at least 1')
        return v

    @field_validator('abstol', 'reltol', 'feastol', 'accept_residual')
    @classmethod
    def validate_tolerance(cls, v):
        if not v > 0:
            raise ValueError('Tolerances must be positive')
        return v


@dataclass(frozen=True)
class ConeSolution:
    """Primal/dual iterate returned by the backend"""
    x: Optional[np.ndarray]
    y: Optional[np.ndarray]
    s: Optional[np.ndarray]
    status: SolverStatus
    primal_residual: float
    dual_residual: float
    gap: float
    objective: float
    iterations: int

    @property
    def is_optimal(self) -> bool:
        return self.status is SolverStatus.OPTIMAL

    @property
    def worst_residual(self) -> float:
        values = [self.primal_residual, self.dual_residual, self.gap]
        finite = [abs(v) for v in values if math.isfinite(v)]
        return max(finite) if len(finite) == len(values) else math.inf


@dataclass
class _Layout:
    """Row bookkeeping between the program's cone order and conelp's (l, q, s) order"""
    zero_rows: np.ndarray
    linear_rows: np.ndarray
    soc_blocks: List[np.ndarray]
    psd_blocks: List[Tuple[np.ndarray, int]]


def _layout(program: ConeProgram) -> _Layout:
    zero_rows, linear_rows = [], []
    soc_blocks: List[np.ndarray] = []
    psd_blocks: List[Tuple[np.ndarray, int]] = []
    offset = 0
    for cone in program.cones:
        rows = np.arange(offset, offset + cone.rows)
        if isinstance(cone, Zero):
            zero_rows.extend(rows)
        elif isinstance(cone, NonNeg):
            linear_rows.extend(rows)
        elif isinstance(cone, SecondOrder):
            soc_blocks.append(rows)
        elif isinstance(cone, PSD):
            psd_blocks.append((rows, cone.size))
        offset += cone.rows
    return _Layout(np.array(zero_rows, dtype=int), np.array(linear_rows, dtype=int), soc_blocks, psd_blocks)


def _svec_expansion(side: int) -> sp.csr_matrix:
    """Sparse map from scaled svec to the full column-major side x side matrix."""
    rows_idx, cols_idx = svec_indices(side)
    out_rows, out_cols, values = [], [], []
    for k, (i, j) in enumerate(zip(rows_idx, cols_idx)):
        if i == j:
            out_rows.append(i + j * side)
            out_cols.append(k)
            values.append(1.0)
        else:
            out_rows.extend([i + j * side, j + i * side])
            out_cols.extend([k, k])
            values.extend([1.0 / SQRT2, 1.0 / SQRT2])
    return sp.csr_matrix((values, (out_rows, out_cols)), shape=(side * side, len(rows_idx)))


def _to_spmatrix(block: sp.spmatrix):
    coo = sp.coo_matrix(block)
    return spmatrix(coo.data.tolist(), coo.row.tolist(), coo.col.tolist(), coo.shape)


def _to_column(values: np.ndarray):
    return matrix(np.asarray(values, dtype=float).tolist(), (len(values), 1), "d")


def _conelp_inputs(program: ConeProgram, layout: _Layout):
    a, b = program.a, program.b
    g_blocks, h_blocks = [], []
    if layout.linear_rows.size:
        g_blocks.append(a[layout.linear_rows])
        h_blocks.append(b[layout.linear_rows])
    for rows in layout.soc_blocks:
        g_blocks.append(a[rows])
        h_blocks.append(b[rows])
    for rows, side in layout.psd_blocks:
        expand = _svec_expansion(side)
        g_blocks.append(expand @ a[rows])
        h_blocks.append(expand @ b[rows])
    g = sp.vstack(g_blocks, format="coo")
    h = np.concatenate(h_blocks)
    dims = {
        "l": int(layout.linear_rows.size),
        "q": [int(rows.size) for rows in layout.soc_blocks],
        "s": [int(side) for _, side in layout.psd_blocks],
    }
    inputs = {
        "c": _to_column(program.c),
        "G": _to_spmatrix(g),
        "h": _to_column(h),
        "dims": dims,
    }
    if layout.zero_rows.size:
        inputs["A"] = _to_spmatrix(a[layout.zero_rows])
        inputs["b"] = _to_column(b[layout.zero_rows])
    return inputs


def _back_to_program_order(values, layout: _Layout, num_rows: int) -> np.ndarray:
    """Map a conelp (l, q, s) vector onto the program's non-zero cone rows."""
    flat = np.array(values).reshape(-1)
    out = np.zeros(num_rows)
    cursor = 0
    n_lin = layout.linear_rows.size
    out[layout.linear_rows] = flat[cursor:cursor + n_lin]
    cursor += n_lin
    for rows in layout.soc_blocks:
        out[rows] = flat[cursor:cursor + rows.size]
        cursor += rows.size
    for rows, side in layout.psd_blocks:
        full = flat[cursor:cursor + side * side].reshape((side, side), order="F")
        out[rows] = svec(0.5 * (full + full.T))
        cursor += side * side
    return out


def _residual(raw: Dict, key: str) -> float:
    value = raw.get(key)
    return float(value) if value is not None else math.nan


def _run_conelp(inputs: Dict, options: SolverOptions, attempt: int) -> Dict:
    relax = 10.0 ** (attempt - 1)
    conelp_options = {
        "show_progress": False,
        "maxiters": options.max_iterations,
        "abstol": options.abstol * relax,
        "reltol": options.reltol * relax,
        "feastol": options.feastol * relax,
        "refinement": attempt,
    }
    return solvers.conelp(
        inputs["c"], inputs["G"], inputs["h"], inputs["dims"],
        inputs.get("A"), inputs.get("b"),
        options=conelp_options,
    )


def solve(program: ConeProgram, options: Optional[SolverOptions] = None) -> ConeSolution:
    """
    Solve a cone program.

    Args:
        program: Program in standard form
        options: Accuracy settings; defaults give relative residuals below 1e-6

    Returns:
        ConeSolution; an iteration-capped run is returned with status MAX_ITERATIONS
    """
    options = options or SolverOptions()
    layout = _layout(program)
    inputs = _conelp_inputs(program, layout)

    try:
        for attempt in Retrying(
            stop=stop_after_attempt(options.retry_attempts),
            retry=retry_if_exception_type((ArithmeticError, ValueError)),
            reraise=False,
        ):
            with attempt:
                number = attempt.retry_state.attempt_number
                if number > 1:
                    logger.debug("Retrying cone solve", attempt=number)
                raw = _run_conelp(inputs, options, number)
    except RetryError as e:
        cause = e.last_attempt.exception()
        raise SolverError(f"Interior-point backend failed: {cause}") from cause

    status = _STATUS_MAP.get(raw["status"], SolverStatus.MAX_ITERATIONS)
    x = np.array(raw["x"]).reshape(-1) if raw.get("x") is not None else None
    y = s = None
    if raw.get("z") is not None:
        y = _back_to_program_order(raw["z"], layout, program.num_rows)
        if layout.zero_rows.size and raw.get("y") is not None:
            y[layout.zero_rows] = np.array(raw["y"]).reshape(-1)
    if raw.get("s") is not None:
        s = _back_to_program_order(raw["s"], layout, program.num_rows)

    objective = raw.get("primal objective")
    solution = ConeSolution(
        x=x,
        y=y,
        s=s,
        status=status,
        primal_residual=_residual(raw, "primal infeasibility"),
        dual_residual=_residual(raw, "dual infeasibility"),
        gap=_residual(raw, "relative gap"),
        objective=float(objective) + program.offset if objective is not None else math.nan,
        iterations=int(raw.get("iterations") or 0),
    )
    logger.debug("Cone program solved",
                 status=status.value,
                 variables=program.num_variables,
                 rows=program.num_rows,
                 objective=solution.objective)
    return solution
