"""Sparse CSR storage, matrix-vector products, and direct solves.

Problem sizes here stay below ~1e4 unknowns, so every Newton system is
solved with a sparse LU factorization.  `solve_linear` enforces a
relative-residual contract of 1e-12 (one step of iterative refinement is
applied if the first solve misses it) and raises `LinearSolveError`,
carrying the residual that was achieved, when the system is singular or
too ill-conditioned.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

RESIDUAL_TOL = 1e-12


class LinearSolveError(RuntimeError):
    """A linear solve failed or could not meet the residual contract."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class SparseMatrix:
    """Square sparse matrix in canonical CSR form (sorted, duplicate-free columns)."""

    csr: sp.csr_matrix

    def __post_init__(self):
        m = self.csr
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix must be square, got shape {m.shape}")
        m.sum_duplicates()
        m.sort_indices()

    @property
    def dim(self) -> int:
        return self.csr.shape[0]

    @property
    def row_offsets(self) -> np.ndarray:
        return self.csr.indptr

    @property
    def col_indices(self) -> np.ndarray:
        return self.csr.indices

    @property
    def values(self) -> np.ndarray:
        return self.csr.data

    @classmethod
    def from_coo(cls, dim, rows, cols, values) -> "SparseMatrix":
        coo = sp.coo_matrix((values, (rows, cols)), shape=(dim, dim))
        return cls(coo.tocsr())

    @classmethod
    def from_dense(cls, array) -> "SparseMatrix":
        return cls(sp.csr_matrix(np.asarray(array, dtype=float)))

    @classmethod
    def identity(cls, dim) -> "SparseMatrix":
        return cls(sp.identity(dim, format="csr"))

    def to_dense(self) -> np.ndarray:
        return self.csr.toarray()

    def dump_coordinate_text(self, stream) -> None:
        """Debug dump as `row col value` lines (not a contract format)."""
        coo = self.csr.tocoo()
        for i, j, v in zip(coo.row, coo.col, coo.data):
            stream.write(f"{i} {j} {v:.17g}\n")


def spmv(a: SparseMatrix, x) -> np.ndarray:
    """y = A x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (a.dim,):
        raise ValueError(f"dimension mismatch: matrix {a.dim}, vector {x.shape}")
    return a.csr @ x


def solve_linear(a: SparseMatrix, b) -> np.ndarray:
    """Solve A x = b to relative residual <= 1e-12.

    Raises LinearSolveError (with the achieved residual attached) if the
    factorization fails or the refined solve still misses the contract.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (a.dim,):
        raise ValueError(f"dimension mismatch: matrix {a.dim}, rhs {b.shape}")
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return np.zeros_like(b)

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", spla.MatrixRankWarning)
            lu = spla.splu(a.csr.tocsc())
    except (RuntimeError, spla.MatrixRankWarning, ValueError) as exc:
        raise LinearSolveError(f"sparse LU factorization failed: {exc}") from exc

    x = lu.solve(b)
    if not np.all(np.isfinite(x)):
        raise LinearSolveError("solution contains non-finite entries (singular system?)")
    residual = np.linalg.norm(a.csr @ x - b) / b_norm
    if residual > RESIDUAL_TOL:
        x = x + lu.solve(b - a.csr @ x)
        residual = np.linalg.norm(a.csr @ x - b) / b_norm
    if not np.isfinite(residual) or residual > RESIDUAL_TOL:
        raise LinearSolveError(
            f"relative residual {residual:.3e} exceeds contract {RESIDUAL_TOL:.0e}",
            residual=residual,
        )
    return x
