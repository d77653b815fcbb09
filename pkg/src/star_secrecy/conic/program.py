"""
Cone programs in standard form and a small modelling layer to assemble them

Standard form: minimize c·x subject to A x + s = b, s ∈ K, where K is an ordered
product of Zero, NonNeg, SecondOrder and PSD blocks. PSD blocks of side s occupy
s(s+1)/2 rows holding the scaled lower-triangular vectorization (column-major,
off-diagonal entries multiplied by √2).
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from ..models.system import StarSecrecyError

SQRT2 = math.sqrt(2.0)


class ConeProgramError(StarSecrecyError):
    """Malformed cone program or modelling expression"""
    pass


# ---------------------------------------------------------------------------
# Cones

@dataclass(frozen=True)
class Cone:
    size: int

    kind = "cone"

    @property
    def rows(self) -> int:
        return self.size

    def __post_init__(self):
        if self.size < 1:
            raise ConeProgramError(f"{type(self).__name__} block must be nonempty, got {self.size}")


@dataclass(frozen=True)
class Zero(Cone):
    kind = "zero"


@dataclass(frozen=True)
class NonNeg(Cone):
    kind = "nonneg"


@dataclass(frozen=True)
class SecondOrder(Cone):
    """{(t, v): ‖v‖ ≤ t}, t first"""
    kind = "soc"

    def __post_init__(self):
        if self.size < 2:
            raise ConeProgramError(f"Second-order cone needs at least 2 rows, got {self.size}")


@dataclass(frozen=True)
class PSD(Cone):
    """Real symmetric PSD block; `size` is the matrix side"""
    kind = "psd"

    @property
    def rows(self) -> int:
        return self.size * (self.size + 1) // 2


CONE_TYPES = {cls.kind: cls for cls in (Zero, NonNeg, SecondOrder, PSD)}


# ---------------------------------------------------------------------------
# Symmetric and Hermitian vectorizations

@lru_cache(maxsize=None)
def svec_indices(side: int) -> Tuple[np.ndarray, np.ndarray]:
    """(row, col) indices of the lower triangle in column-major order."""
    rows, cols = [], []
    for j in range(side):
        for i in range(j, side):
            rows.append(i)
            cols.append(j)
    return np.array(rows), np.array(cols)


def svec(matrix: np.ndarray) -> np.ndarray:
    """Scaled vectorization; svec(A)·svec(B) = Tr(AB) for symmetric A, B."""
    matrix = np.asarray(matrix)
    rows, cols = svec_indices(matrix.shape[0])
    scale = np.where(rows == cols, 1.0, SQRT2)
    return matrix[rows, cols] * scale


def smat(vector: np.ndarray, side: int) -> np.ndarray:
    rows, cols = svec_indices(side)
    scale = np.where(rows == cols, 1.0, 1.0 / SQRT2)
    out = np.zeros((side, side))
    out[rows, cols] = vector * scale
    out[cols, rows] = vector * scale
    return out


@lru_cache(maxsize=None)
def hermitian_basis(side: int) -> np.ndarray:
    """
    Orthonormal basis (real inner product Re Tr(A^H B)) of n x n Hermitian matrices.

    Order: diagonal units, then for each i < j the real and imaginary off-diagonal pair.
    """
    basis = []
    for i in range(side):
        e = np.zeros((side, side), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    for i in range(side):
        for j in range(i + 1, side):
            e = np.zeros((side, side), dtype=complex)
            e[i, j] = e[j, i] = 1.0 / SQRT2
            basis.append(e)
            e = np.zeros((side, side), dtype=complex)
            e[i, j] = -1j / SQRT2
            e[j, i] = 1j / SQRT2
            basis.append(e)
    stacked = np.array(basis)
    stacked.setflags(write=False)
    return stacked


def hvec(matrix: np.ndarray) -> np.ndarray:
    """Isometric real coordinates of the Hermitian part of `matrix` (n² entries)."""
    matrix = np.asarray(matrix, dtype=complex)
    basis = hermitian_basis(matrix.shape[0])
    return np.real(np.einsum("kij,ij->k", basis.conj(), matrix))


def unhvec(vector: np.ndarray, side: int) -> np.ndarray:
    return np.einsum("k,kij->ij", np.asarray(vector, dtype=float), hermitian_basis(side))


def hermitian_embed(matrix: np.ndarray) -> np.ndarray:
    """
    Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian matrix.

    H ⪰ 0 iff the embedding is PSD; every eigenvalue of H appears twice.
    """
    matrix = np.asarray(matrix, dtype=complex)
    re, im = matrix.real, matrix.imag
    return np.block([[re, -im], [im, re]])


@lru_cache(maxsize=None)
def _embedding_operator(side: int) -> np.ndarray:
    basis = hermitian_basis(side)
    columns = [svec(hermitian_embed(e)) for e in basis]
    operator = np.array(columns).T
    operator.setflags(write=False)
    return operator


def congruence_operator(q: np.ndarray) -> np.ndarray:
    """Matrix of X ↦ hvec(q^H X q) acting on hvec(X); shape (n², m²) for q of shape (m, n)."""
    q = np.asarray(q, dtype=complex)
    basis = hermitian_basis(q.shape[0])
    images = np.einsum("ai,kab,bj->kij", q.conj(), basis, q)
    out_basis = hermitian_basis(q.shape[1])
    return np.real(np.einsum("lij,kij->lk", out_basis.conj(), images))


# ---------------------------------------------------------------------------
# Modelling layer

@dataclass(frozen=True)
class Variable:
    """A contiguous block of scalar decision variables"""
    name: str
    start: int
    size: int

    __array_ufunc__ = None

    @property
    def slice(self) -> slice:
        return slice(self.start, self.start + self.size)

    def expr(self) -> "Affine":
        return Affine(self.size, {self.start: (self, np.eye(self.size))})

    def map(self, matrix: np.ndarray) -> "Affine":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        if matrix.shape[1] != self.size:
            raise ConeProgramError(f"Map of width {matrix.shape[1]} applied to {self.name} of size {self.size}")
        return Affine(matrix.shape[0], {self.start: (self, matrix)})

    def dot(self, row: np.ndarray) -> "Affine":
        return self.map(np.asarray(row, dtype=float).reshape(1, -1))

    def __getitem__(self, index: int) -> "Affine":
        row = np.zeros(self.size)
        row[index] = 1.0
        return self.dot(row)

    def value(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x)[self.slice]

    def __add__(self, other):
        return self.expr() + other

    __radd__ = __add__

    def __sub__(self, other):
        return self.expr() - other

    def __rsub__(self, other):
        return other - self.expr()

    def __neg__(self):
        return -self.expr()

    def __mul__(self, scalar: float):
        return self.expr() * scalar

    __rmul__ = __mul__


class Affine:
    """x ↦ Σ M_v x_v + d with one coefficient block per variable"""

    __slots__ = ("size", "terms", "const")
    __array_ufunc__ = None

    def __init__(self, size: int, terms: Optional[Dict[int, Tuple[Variable, np.ndarray]]] = None,
                 const: Optional[np.ndarray] = None):
        self.size = int(size)
        self.terms = dict(terms or {})
        self.const = np.zeros(self.size) if const is None else np.asarray(const, dtype=float).reshape(self.size)

    @classmethod
    def constant(cls, values: Union[float, Sequence[float], np.ndarray]) -> "Affine":
        values = np.atleast_1d(np.asarray(values, dtype=float))
        return cls(values.size, const=values)

    @staticmethod
    def lift(other, size: int) -> "Affine":
        if isinstance(other, Affine):
            return other
        if isinstance(other, Variable):
            return other.expr()
        values = np.asarray(other, dtype=float)
        if values.ndim == 0:
            values = np.full(size, float(values))
        return Affine.constant(values)

    def __add__(self, other) -> "Affine":
        other = Affine.lift(other, self.size)
        if other.size != self.size:
            raise ConeProgramError(f"Size mismatch in affine sum: {self.size} vs {other.size}")
        terms = dict(self.terms)
        for start, (var, mat) in other.terms.items():
            if start in terms:
                terms[start] = (var, terms[start][1] + mat)
            else:
                terms[start] = (var, mat)
        return Affine(self.size, terms, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> "Affine":
        return self * -1.0

    def __sub__(self, other) -> "Affine":
        return self + (-Affine.lift(other, self.size))

    def __rsub__(self, other) -> "Affine":
        return Affine.lift(other, self.size) + (-self)

    def __mul__(self, scalar: float) -> "Affine":
        scalar = float(scalar)
        terms = {start: (var, mat * scalar) for start, (var, mat) in self.terms.items()}
        return Affine(self.size, terms, self.const * scalar)

    __rmul__ = __mul__

    def value(self, x: np.ndarray) -> np.ndarray:
        out = self.const.copy()
        for var, mat in self.terms.values():
            out += mat @ var.value(x)
        return out

    @staticmethod
    def stack(parts: Iterable) -> "Affine":
        parts = [Affine.lift(p, 1) for p in parts]
        size = sum(p.size for p in parts)
        terms: Dict[int, Tuple[Variable, np.ndarray]] = {}
        const = np.concatenate([p.const for p in parts])
        offset = 0
        for part in parts:
            for start, (var, mat) in part.terms.items():
                block = np.zeros((size, var.size))
                block[offset:offset + part.size] = mat
                if start in terms:
                    terms[start] = (var, terms[start][1] + block)
                else:
                    terms[start] = (var, block)
            offset += part.size
        return Affine(size, terms, const)


@dataclass(frozen=True)
class HermitianVariable:
    """Complex Hermitian matrix variable parametrized by its hvec coordinates"""
    name: str
    side: int
    coords: Variable

    def trace(self) -> Affine:
        return self.coords.dot(hvec(np.eye(self.side)))

    def inner(self, coefficient: np.ndarray) -> Affine:
        """Re Tr(C^H X)."""
        return self.coords.dot(hvec(coefficient))

    def diagonal(self, index: int) -> Affine:
        return self.coords[index]

    def vector(self) -> Affine:
        return self.coords.expr()

    def congruence(self, q: np.ndarray) -> Affine:
        """hvec(q^H X q)."""
        return self.coords.map(congruence_operator(q))

    def psd_embedding(self) -> Affine:
        return self.coords.map(_embedding_operator(self.side))

    def value(self, x: np.ndarray) -> np.ndarray:
        return unhvec(self.coords.value(x), self.side)


# ---------------------------------------------------------------------------
# Program

@dataclass(frozen=True)
class ConeProgram:
    """min c·x + offset  s.t.  A x + s = b, s ∈ K"""
    c: np.ndarray
    a: sp.csr_matrix
    b: np.ndarray
    cones: Tuple[Cone, ...]
    offset: float = 0.0
    variables: Dict[str, Variable] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        a = sp.csr_matrix(self.a)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "cones", tuple(self.cones))
        rows = sum(cone.rows for cone in self.cones)
        if a.shape != (rows, c.size):
            raise ConeProgramError(
                f"Constraint operator is {a.shape[0]}x{a.shape[1]}, cone layout needs {rows}x{c.size}"
            )
        if b.size != rows:
            raise ConeProgramError(f"Right-hand side has {b.size} rows, cone layout needs {rows}")
        for cone in self.cones:
            if not isinstance(cone, (Zero, NonNeg, SecondOrder, PSD)):
                raise ConeProgramError(f"Unknown cone block {cone!r}")

    @property
    def num_variables(self) -> int:
        return int(self.c.size)

    @property
    def num_rows(self) -> int:
        return int(self.b.size)

    def cone_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for cone in self.cones:
            counts[cone.kind] = counts.get(cone.kind, 0) + 1
        return counts

    def scaled(self, alpha: float) -> "ConeProgram":
        """Same feasible set, objective multiplied by alpha."""
        return ConeProgram(self.c * alpha, self.a, self.b, self.cones, self.offset * alpha, self.variables)


class ConeBuilder:
    """Incrementally assembles a ConeProgram from affine expressions"""

    def __init__(self):
        self._size = 0
        self._constraints: List[Tuple[Cone, Affine]] = []
        self._objective: Optional[Affine] = None
        self.variables: Dict[str, Variable] = {}

    def variable(self, name: str, size: int = 1) -> Variable:
        if name in self.variables:
            raise ConeProgramError(f"Duplicate variable name: {name}")
        var = Variable(name, self._size, size)
        self._size += size
        self.variables[name] = var
        return var

    def hermitian(self, name: str, side: int) -> HermitianVariable:
        return HermitianVariable(name, side, self.variable(name, side * side))

    def add(self, cone: Cone, expr: Affine):
        if cone.rows != expr.size:
            raise ConeProgramError(f"{type(cone).__name__} block expects {cone.rows} rows, got {expr.size}")
        self._constraints.append((cone, expr))

    def zero(self, expr: Affine):
        self.add(Zero(expr.size), expr)

    def nonneg(self, expr):
        expr = Affine.lift(expr, 1)
        self.add(NonNeg(expr.size), expr)

    def soc(self, expr: Affine):
        self.add(SecondOrder(expr.size), expr)

    def psd(self, hermitian: HermitianVariable):
        self.add(PSD(2 * hermitian.side), hermitian.psd_embedding())

    def quadratic_epigraph(self, v: Affine, t) -> None:
        """‖v‖² ≤ t as the rotated cone ‖(t-1, 2v)‖ ≤ t+1."""
        t = Affine.lift(t, 1)
        self.soc(Affine.stack([t + 1.0, t - 1.0, v * 2.0]))

    def minimize(self, expr):
        expr = Affine.lift(expr, 1)
        if expr.size != 1:
            raise ConeProgramError("Objective must be scalar")
        self._objective = expr

    def build(self) -> ConeProgram:
        if self._objective is None:
            raise ConeProgramError("Objective not set")
        n = self._size
        c = np.zeros(n)
        for var, mat in self._objective.terms.values():
            c[var.slice] += mat[0]
        blocks_a, blocks_b, cones = [], [], []
        for cone, expr in self._constraints:
            # s = M x + d  ⇔  A = -M, b = d
            rows = np.zeros((expr.size, n))
            for var, mat in expr.terms.values():
                rows[:, var.slice] -= mat
            blocks_a.append(sp.csr_matrix(rows))
            blocks_b.append(expr.const)
            cones.append(cone)
        if not cones:
            raise ConeProgramError("Program has no constraints")
        return ConeProgram(
            c=c,
            a=sp.vstack(blocks_a, format="csr"),
            b=np.concatenate(blocks_b),
            cones=tuple(cones),
            offset=float(self._objective.const[0]),
            variables=dict(self.variables),
        )


# ---------------------------------------------------------------------------
# Debug serialization

def dump_program(program: ConeProgram) -> str:
    """
    Text form for regression capture:

        # cone program v1
        variables <n>
        rows <m>
        offset <float>
        cones <kind>:<size> ...
        c
        <n floats>
        b
        <m floats>
        A <nnz>
        <row> <col> <value>   (one nonzero per line, row-major)
    """
    coo = program.a.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = [
        "# cone program v1",
        f"variables {program.num_variables}",
        f"rows {program.num_rows}",
        f"offset {float(program.offset)!r}",
        "cones " + " ".join(f"{cone.kind}:{cone.size}" for cone in program.cones),
        "c",
        " ".join(repr(float(v)) for v in program.c),
        "b",
        " ".join(repr(float(v)) for v in program.b),
        f"A {coo.nnz}",
    ]
    lines.extend(f"{int(coo.row[k])} {int(coo.col[k])} {float(coo.data[k])!r}" for k in order)
    return "\n".join(lines) + "\n"


def parse_program(text: str) -> ConeProgram:
    lines = text.splitlines()
    if not lines or lines[0] != "# cone program v1":
        raise ConeProgramError("Missing cone program header")
    try:
        n = int(lines[1].split()[1])
        m = int(lines[2].split()[1])
        offset = float(lines[3].split()[1])
        cones = []
        for token in lines[4].split()[1:]:
            kind, size = token.split(":")
            cones.append(CONE_TYPES[kind](int(size)))
        c = np.array([float(v) for v in lines[6].split()])
        b = np.array([float(v) for v in lines[8].split()])
        nnz = int(lines[9].split()[1])
        entries = [line.split() for line in lines[10:10 + nnz]]
    except (IndexError, KeyError, ValueError) as e:
        raise ConeProgramError("Malformed cone program text") from e
    rows = [int(e[0]) for e in entries]
    cols = [int(e[1]) for e in entries]
    vals = [float(e[2]) for e in entries]
    a = sp.csr_matrix((vals, (rows, cols)), shape=(m, n))
    return ConeProgram(c=c, a=a, b=b, cones=tuple(cones), offset=offset)


def write_program(program: ConeProgram, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_program(program), encoding="utf-8")
    return path
