"""
Cone programming layer: modelling, serialization and the interior-point backend
"""

from .linalg import hermitian_part, leading_eigenvector, psd_project
from .program import (
    PSD,
    Affine,
    Cone,
    ConeBuilder,
    ConeProgram,
    ConeProgramError,
    HermitianVariable,
    NonNeg,
    SecondOrder,
    Variable,
    Zero,
    dump_program,
    hermitian_embed,
    hvec,
    parse_program,
    svec,
    unhvec,
    write_program,
)
from .solver import ConeSolution, SolverError, SolverOptions, SolverStatus, solve

__all__ = [
    "hermitian_part",
    "leading_eigenvector",
    "psd_project",
    "PSD",
    "Affine",
    "Cone",
    "ConeBuilder",
    "ConeProgram",
    "ConeProgramError",
    "HermitianVariable",
    "NonNeg",
    "SecondOrder",
    "Variable",
    "Zero",
    "dump_program",
    "hermitian_embed",
    "hvec",
    "parse_program",
    "svec",
    "unhvec",
    "write_program",
    "ConeSolution",
    "SolverError",
    "SolverOptions",
    "SolverStatus",
    "solve",
]
