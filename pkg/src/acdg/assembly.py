"""Assembly of the mass matrix, SIPG stiffness, reaction terms, and energy.

The stiffness form for a non-negative coefficient field kappa(x) is

    sum_K int_K kappa grad(u).grad(v)
  - sum_E int_E kbar {grad u}.[v]  -  sum_E int_E kbar {grad v}.[u]
  + sum_E (sigma kbar / h_E) int_E [u].[v]

summed over interior edges and, with identical jump/average definitions,
over the periodic boundary pairs.  On an edge the coefficient kbar is the
mean of the two one-sided quadrature-point values, which reduces to the
pointwise value when kappa is continuous.

All element and edge contributions are computed with fixed-order einsum
reductions and summed through a single COO -> CSR conversion, so repeated
assemblies are bit-identical.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import physics
from .dg_core import DGSpace
from .linalg import SparseMatrix

ALL_EDGES = "all"
INTERIOR_ONLY = "interior_only"
_PARTS = frozenset({"volume", "consistency", "penalty"})


def default_sigma(degree: int, dimension: int) -> float:
    """Interior-penalty parameter: 2.5 (q+1)^2 on intervals, (q+1)(q+2) on triangles."""
    if dimension == 1:
        return 2.5 * (degree + 1) ** 2
    return float((degree + 1) * (degree + 2))


@dataclass(frozen=True)
class AssembledOperator:
    matrix: SparseMatrix
    fingerprint: str


@dataclass(frozen=True)
class KappaField:
    """Diffusion coefficient sampled at volume and one-sided edge quadrature points."""

    volume: np.ndarray      # (K, n_vol_qp)
    int_plus: np.ndarray    # (n_interior, n_edge_qp)
    int_minus: np.ndarray
    per_plus: np.ndarray    # (n_periodic, n_edge_qp)
    per_minus: np.ndarray

    @classmethod
    def uniform(cls, space: DGSpace, value: float) -> "KappaField":
        ne, npe = len(space.mesh.interior_edges), len(space.mesh.periodic_pairs)
        nqe = space.n_edge_qp
        return cls(
            volume=np.full((space.n_elements, space.n_vol_qp), value),
            int_plus=np.full((ne, nqe), value),
            int_minus=np.full((ne, nqe), value),
            per_plus=np.full((npe, nqe), value),
            per_minus=np.full((npe, nqe), value),
        )

    @classmethod
    def from_state(cls, space: DGSpace, xi, mobility: physics.MobilitySpec,
                   epsilon: float) -> "KappaField":
        """kappa = epsilon^2 mu(u_h) with u_h the (previous-step) state."""
        e2 = epsilon * epsilon
        up, um = space.eval_edge_traces(xi, periodic=False)
        pp, pm = space.eval_edge_traces(xi, periodic=True)
        return cls(
            volume=e2 * physics.mobility(mobility, space.eval_volume(xi)),
            int_plus=e2 * physics.mobility(mobility, up),
            int_minus=e2 * physics.mobility(mobility, um),
            per_plus=e2 * physics.mobility(mobility, pp),
            per_minus=e2 * physics.mobility(mobility, pm),
        )

    def fingerprint(self) -> str:
        h = hashlib.sha1()
        for a in (self.volume, self.int_plus, self.int_minus, self.per_plus, self.per_minus):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()


class _Workspace:
    """Per-space COO index patterns and edge trace tables, built once."""

    def __init__(self, space: DGSpace):
        nq = space.n_local
        k = np.arange(space.n_elements)
        gdof = k[:, None] * nq + np.arange(nq)[None, :]          # (K, nq)
        self.vol_rows = np.repeat(gdof[:, :, None], nq, axis=2)  # (K, nq, nq)
        self.vol_cols = np.repeat(gdof[:, None, :], nq, axis=1)
        self.mass_ref = np.einsum(
            "q,iq,jq->ij", space.vol_weights, space.tab_vol, space.tab_vol)

        for prefix, edges in (("int", space.mesh.interior_edges),
                              ("per", space.mesh.periodic_pairs)):
            tp = getattr(space, f"{prefix}_tab_plus")
            tm = getattr(space, f"{prefix}_tab_minus")
            dp = getattr(space, f"{prefix}_dn_plus")
            dm = getattr(space, f"{prefix}_dn_minus")
            jump = np.concatenate([tp, -tm], axis=1)             # (E, 2nq, nqe)
            davg = 0.5 * np.concatenate([dp, dm], axis=1)
            dofs = np.concatenate([
                edges.elem_plus[:, None] * nq + np.arange(nq)[None, :],
                edges.elem_minus[:, None] * nq + np.arange(nq)[None, :],
            ], axis=1)                                           # (E, 2nq)
            rows = np.repeat(dofs[:, :, None], 2 * nq, axis=2)
            cols = np.repeat(dofs[:, None, :], 2 * nq, axis=1)
            setattr(self, f"{prefix}_jump", jump)
            setattr(self, f"{prefix}_davg", davg)
            setattr(self, f"{prefix}_rows", rows)
            setattr(self, f"{prefix}_cols", cols)


def _workspace(space: DGSpace) -> _Workspace:
    ws = getattr(space, "_assembly_ws", None)
    if ws is None:
        ws = _Workspace(space)
        space._assembly_ws = ws
    return ws


def assemble_mass(space: DGSpace) -> AssembledOperator:
    """Block-diagonal SPD mass matrix M_ij = (phi_j, phi_i)."""
    ws = _workspace(space)
    data = space.detj[:, None, None] * ws.mass_ref[None, :, :]
    matrix = SparseMatrix.from_coo(
        space.n_dofs, ws.vol_rows.ravel(), ws.vol_cols.ravel(), data.ravel())
    return AssembledOperator(matrix=matrix, fingerprint="mass")


def _edge_blocks(space, ws, prefix, kplus, kminus, sigma, parts):
    edges = (space.mesh.interior_edges if prefix == "int"
             else space.mesh.periodic_pairs)
    if len(edges) == 0:
        return None
    jump = getattr(ws, f"{prefix}_jump")
    davg = getattr(ws, f"{prefix}_davg")
    wq = getattr(space, f"{prefix}_wq")
    kbar = 0.5 * (kplus + kminus)
    wk = wq * kbar
    blocks = 0.0
    if "consistency" in parts:
        t = np.einsum("eq,eaq,ebq->eab", wk, jump, davg)
        blocks = blocks - t - t.transpose(0, 2, 1)
    if "penalty" in parts:
        pen = wk * (sigma / edges.h_edge)[:, None]
        blocks = blocks + np.einsum("eq,eaq,ebq->eab", pen, jump, jump)
    if np.isscalar(blocks):
        return None
    return blocks


def assemble_stiffness(space: DGSpace, kappa, sigma: float,
                       edges: str = ALL_EDGES,
                       parts=("volume", "consistency", "penalty")) -> AssembledOperator:
    """SIPG operator for diffusion coefficient kappa (a KappaField or a constant).

    `edges` selects whether periodic pairs contribute; `parts` can restrict
    the assembly to a subset of {volume, consistency, penalty} (used by
    tests and by the energy bookkeeping).
    """
    if sigma <= 0:
        raise ValueError("penalty parameter sigma must be positive")
    if edges not in (ALL_EDGES, INTERIOR_ONLY):
        raise ValueError(f"unknown edge selection {edges!r}")
    parts = frozenset(parts)
    if not parts <= _PARTS:
        raise ValueError(f"unknown assembly parts {sorted(parts - _PARTS)}")
    if np.isscalar(kappa):
        kappa = KappaField.uniform(space, float(kappa))
    for name in ("volume", "int_plus", "int_minus", "per_plus", "per_minus"):
        if np.any(getattr(kappa, name) < 0):
            raise ValueError(f"negative diffusion coefficient in {name} samples")

    ws = _workspace(space)
    rows, cols, data = [], [], []

    if "volume" in parts:
        vol = np.einsum("kq,kiqd,kjqd->kij",
                        space.wdetj * kappa.volume,
                        space.grad_phys_vol, space.grad_phys_vol)
        rows.append(ws.vol_rows.ravel())
        cols.append(ws.vol_cols.ravel())
        data.append(vol.ravel())

    blocks = _edge_blocks(space, ws, "int", kappa.int_plus, kappa.int_minus, sigma, parts)
    if blocks is not None:
        rows.append(ws.int_rows.ravel())
        cols.append(ws.int_cols.ravel())
        data.append(blocks.ravel())

    if edges == ALL_EDGES:
        blocks = _edge_blocks(space, ws, "per", kappa.per_plus, kappa.per_minus, sigma, parts)
        if blocks is not None:
            rows.append(ws.per_rows.ravel())
            cols.append(ws.per_cols.ravel())
            data.append(blocks.ravel())

    matrix = SparseMatrix.from_coo(
        space.n_dofs, np.concatenate(rows), np.concatenate(cols), np.concatenate(data))
    return AssembledOperator(matrix=matrix, fingerprint=kappa.fingerprint())


def assemble_reaction(space: DGSpace, xi, potential: physics.PotentialSpec,
                      mobility_field) -> np.ndarray:
    """r_i = int mu(u^n) f(u_h) phi_i with mu sampled at volume quadrature points."""
    with np.errstate(invalid="ignore", over="ignore"):
        u = space.eval_volume(xi)
        g = np.asarray(mobility_field) * physics.reaction(potential, u)
    if not np.all(np.isfinite(g)):
        raise FloatingPointError("non-finite reaction values (unclamped potential?)")
    return np.einsum("kq,iq->ki", space.wdetj * g, space.tab_vol).ravel()


def reaction_jacobian_from_coeff(space: DGSpace, coeff) -> SparseMatrix:
    """Block-diagonal matrix int c(x) phi_j phi_i for a quadrature-point field c."""
    data = np.einsum("kq,iq,jq->kij", space.wdetj * coeff, space.tab_vol, space.tab_vol)
    bsr = sp.bsr_matrix(
        (data, np.arange(space.n_elements), np.arange(space.n_elements + 1)),
        shape=(space.n_dofs, space.n_dofs))
    return SparseMatrix(bsr.tocsr())


def assemble_reaction_jacobian(space: DGSpace, xi_hat, potential: physics.PotentialSpec,
                               mobility_field) -> SparseMatrix:
    """J_r entries int mu(u^n) f'(u_hat) phi_j phi_i (symmetric, block-diagonal)."""
    with np.errstate(invalid="ignore", over="ignore"):
        u = space.eval_volume(xi_hat)
        coeff = np.asarray(mobility_field) * physics.reaction_derivative(potential, u)
    if not np.all(np.isfinite(coeff)):
        raise FloatingPointError("non-finite reaction-derivative values")
    return reaction_jacobian_from_coeff(space, coeff)


def potential_integral(space: DGSpace, xi, potential: physics.PotentialSpec) -> float:
    """(F(u_h), 1) over the domain."""
    u = space.eval_volume(xi)
    return float(np.sum(space.wdetj * physics.free_energy_density(potential, u)))


def discrete_energy(space: DGSpace, xi, epsilon: float, sigma: float,
                    potential: physics.PotentialSpec, edges: str = ALL_EDGES) -> float:
    """Broken Ginzburg-Landau energy of the DG field.

    Equals (1/2) xi^T A xi + (F(u_h), 1) with A the SIPG operator for the
    constant coefficient epsilon^2: the gradient seminorm, the edge
    consistency terms, and half the jump penalty.  With edges="all" the
    periodic pairs contribute like interior edges; "interior_only"
    restricts the edge sum to genuinely interior edges.
    """
    a = assemble_stiffness(space, epsilon * epsilon, sigma, edges=edges)
    xi = np.asarray(xi, dtype=float)
    return 0.5 * float(xi @ (a.matrix.csr @ xi)) + potential_integral(space, xi, potential)
