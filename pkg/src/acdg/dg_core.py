"""Discontinuous nodal Lagrange spaces on intervals and triangles.

Degrees of freedom are element-blocked: the coefficient vector stores the
n_q local values of element 0, then element 1, and so on.  The basis is
nodal (vertices first, then edge/interval midpoints for degree 2), so
coefficients are point values of the field at the node positions.

Quadrature is fixed once per space and deliberately generous:

  * volume, 1D: 7-point Gauss-Legendre on [0, 1]  (exact to degree 13)
  * volume, 2D: 6x6 Gauss-Legendre collapsed onto the reference triangle
    (exact to total degree 10)
  * edges, 2D: (q + 2)-point Gauss-Legendre along the edge

which covers every polynomial integrand arising for q <= 2 and serves as
a fixed high-order approximation for the logarithmic terms.
"""

from __future__ import annotations

import numpy as np

from .mesh import Mesh, TRI_FACE_VERTICES


def gauss_legendre_01(n: int):
    """Gauss-Legendre nodes/weights on [0, 1]; weights sum to 1."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def triangle_quadrature_degree10():
    """Collapsed 6x6 Gauss-Legendre rule on the reference triangle.

    Exact for all polynomials of total degree <= 10; weights sum to the
    reference area 1/2.
    """
    u, wu = gauss_legendre_01(6)
    v, wv = gauss_legendre_01(6)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ww = np.outer(wu, wv)
    x = uu
    y = vv * (1.0 - uu)
    w = ww * (1.0 - uu)
    return np.column_stack([x.ravel(), y.ravel()]), w.ravel()


# ---------------------------------------------------------------------------
# reference bases

def reference_nodes(dimension: int, degree: int) -> np.ndarray:
    if dimension == 1:
        if degree == 1:
            return np.array([[0.0], [1.0]])
        return np.array([[0.0], [1.0], [0.5]])
    if degree == 1:
        return np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return np.array([
        [0.0, 0.0], [1.0, 0.0], [0.0, 1.0],
        [0.5, 0.0], [0.5, 0.5], [0.0, 0.5],
    ])


def local_dimension(dimension: int, degree: int) -> int:
    return degree + 1 if dimension == 1 else (degree + 1) * (degree + 2) // 2


def eval_reference_basis(dimension, degree, points) -> np.ndarray:
    """Basis values, shape (n_q, n_points)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if dimension == 1:
        x = points[:, 0]
        if degree == 1:
            return np.stack([1.0 - x, x])
        return np.stack([(1.0 - x) * (1.0 - 2.0 * x), x * (2.0 * x - 1.0), 4.0 * x * (1.0 - x)])
    x, y = points[:, 0], points[:, 1]
    l0, l1, l2 = 1.0 - x - y, x, y
    if degree == 1:
        return np.stack([l0, l1, l2])
    return np.stack([
        l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
        4.0 * l0 * l1, 4.0 * l1 * l2, 4.0 * l2 * l0,
    ])


def eval_reference_gradient(dimension, degree, points) -> np.ndarray:
    """Reference-coordinate gradients, shape (n_q, n_points, dimension)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n_pts = len(points)
    if dimension == 1:
        x = points[:, 0]
        if degree == 1:
            g = np.stack([-np.ones(n_pts), np.ones(n_pts)])
        else:
            g = np.stack([4.0 * x - 3.0, 4.0 * x - 1.0, 4.0 - 8.0 * x])
        return g[:, :, None]
    x, y = points[:, 0], points[:, 1]
    l0 = 1.0 - x - y
    one = np.ones(n_pts)
    zero = np.zeros(n_pts)
    if degree == 1:
        g = np.array([
            [-one, -one],
            [one, zero],
            [zero, one],
        ])
    else:
        g = np.array([
            [(1.0 - 4.0 * l0) * one, (1.0 - 4.0 * l0) * one],
            [4.0 * x - 1.0, zero],
            [zero, 4.0 * y - 1.0],
            [4.0 * (l0 - x), -4.0 * x],
            [4.0 * y, 4.0 * x],
            [-4.0 * y, 4.0 * (l0 - y)],
        ])
    return np.transpose(g, (0, 2, 1))


# ---------------------------------------------------------------------------

class DGSpace:
    """A broken polynomial space of degree q on a mesh, with fixed quadrature.

    Precomputes everything assembly needs: reference tabulations at volume
    quadrature points, per-element affine geometry, physical basis
    gradients, node coordinates, and two-sided trace tabulations on
    interior edges and periodic pairs.
    """

    def __init__(self, mesh: Mesh, degree: int):
        if degree not in (1, 2):
            raise ValueError("polynomial degree must be 1 or 2")
        self.mesh = mesh
        self.degree = degree
        self.dim = mesh.dimension
        self.n_local = local_dimension(self.dim, degree)
        self.n_elements = mesh.n_elements
        self.n_dofs = self.n_local * self.n_elements

        if self.dim == 1:
            self.vol_points, self.vol_weights = gauss_legendre_01(7)
            self.vol_points = self.vol_points.reshape(-1, 1)
            self.edge_points, self.edge_weights = np.zeros((1, 0)), np.ones(1)
        else:
            self.vol_points, self.vol_weights = triangle_quadrature_degree10()
            t, wt = gauss_legendre_01(degree + 2)
            self.edge_points, self.edge_weights = t.reshape(-1, 1), wt
        self.n_vol_qp = len(self.vol_weights)
        self.n_edge_qp = len(self.edge_weights)

        self.tab_vol = eval_reference_basis(self.dim, degree, self.vol_points)
        self.grad_ref_vol = eval_reference_gradient(self.dim, degree, self.vol_points)

        self._build_geometry()
        self._build_nodes()
        self._build_edge_tabulations()

    # -- geometry -----------------------------------------------------------

    def _build_geometry(self):
        mesh = self.mesh
        coords = mesh.vertices[mesh.elements]  # (K, dim+1, dim)
        v0 = coords[:, 0]
        if self.dim == 1:
            jac = (coords[:, 1] - coords[:, 0])[:, :, None]
        else:
            jac = np.stack([coords[:, 1] - v0, coords[:, 2] - v0], axis=2)
        self.jac = jac
        self.jinv = np.linalg.inv(jac)
        self.detj = np.abs(np.linalg.det(jac))
        self.v0 = v0
        # physical volume quadrature points and basis gradients
        self.qp_phys = v0[:, None, :] + np.einsum("kab,qb->kqa", jac, self.vol_points)
        # grad_phys[k, i, q, d] = (J^{-T} grad_ref)_d
        self.grad_phys_vol = np.einsum("kba,iqb->kiqa", self.jinv, self.grad_ref_vol)
        # quadrature weights scaled by |det J| per element: (K, n_qp)
        self.wdetj = self.detj[:, None] * self.vol_weights[None, :]

    def _build_nodes(self):
        ref = reference_nodes(self.dim, self.degree)
        pts = self.v0[:, None, :] + np.einsum("kab,nb->kna", self.jac, ref)
        self.node_coords = pts.reshape(self.n_dofs, self.dim)

    def map_to_reference(self, elems, phys_points):
        """Inverse affine map, vectorized over matching (elems, points)."""
        rel = phys_points - self.v0[elems]
        return np.einsum("kab,kb->ka", self.jinv[elems], rel)

    # -- edge trace tabulations ----------------------------------------------

    def _edge_quadrature_physical(self, edges):
        """Physical quadrature points on each plus-side face, (E, n_qe, dim)."""
        mesh = self.mesh
        if self.dim == 1:
            # the face is a point: local face 0 -> ref 0, face 1 -> ref 1
            ref = edges.face_plus.astype(float).reshape(-1, 1, 1)
            return (self.v0[edges.elem_plus][:, None, :]
                    + np.einsum("kab,kqb->kqa", self.jac[edges.elem_plus], ref))
        pa = np.empty((len(edges), 2))
        pb = np.empty((len(edges), 2))
        for i in range(len(edges)):
            a, b = TRI_FACE_VERTICES[edges.face_plus[i]]
            k = edges.elem_plus[i]
            pa[i] = mesh.vertices[mesh.elements[k, a]]
            pb[i] = mesh.vertices[mesh.elements[k, b]]
        t = self.edge_points[:, 0]
        return pa[:, None, :] + t[None, :, None] * (pb - pa)[:, None, :]

    def _tabulate_side(self, elems, phys_points, normals):
        """Trace values and normal derivatives of one side's basis.

        Returns (vals, dnorm) with shapes (E, n_q, n_qe); dnorm is the
        physical gradient dotted with the given per-edge normal.
        """
        n_e, n_qe = phys_points.shape[:2]
        flat_elems = np.repeat(elems, n_qe)
        flat_pts = phys_points.reshape(-1, self.dim)
        ref = self.map_to_reference(flat_elems, flat_pts)
        vals = eval_reference_basis(self.dim, self.degree, ref)
        grads = eval_reference_gradient(self.dim, self.degree, ref)
        vals = vals.reshape(self.n_local, n_e, n_qe).transpose(1, 0, 2)
        grads = grads.reshape(self.n_local, n_e, n_qe, self.dim).transpose(1, 0, 2, 3)
        gphys = np.einsum("kba,kiqb->kiqa", self.jinv[elems], grads)
        dnorm = np.einsum("kiqa,ka->kiq", gphys, normals)
        return vals, dnorm

    def _build_edge_tabulations(self):
        for edges, prefix in ((self.mesh.interior_edges, "int"),
                              (self.mesh.periodic_pairs, "per")):
            qp_plus = self._edge_quadrature_physical(edges)
            qp_minus = qp_plus + edges.shift[:, None, :]
            vp, dp = self._tabulate_side(edges.elem_plus, qp_plus, edges.normal)
            vm, dm = self._tabulate_side(edges.elem_minus, qp_minus, edges.normal)
            setattr(self, f"{prefix}_tab_plus", vp)
            setattr(self, f"{prefix}_tab_minus", vm)
            setattr(self, f"{prefix}_dn_plus", dp)
            setattr(self, f"{prefix}_dn_minus", dm)
            if self.dim == 1:
                wq = np.ones((len(edges), 1))
            else:
                wq = edges.h_edge[:, None] * self.edge_weights[None, :]
            setattr(self, f"{prefix}_wq", wq)

    # -- field evaluation ------------------------------------------------------

    def blocked(self, xi) -> np.ndarray:
        """View coefficients as (K, n_q)."""
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (self.n_dofs,):
            raise ValueError(f"coefficient vector must have length {self.n_dofs}")
        return xi.reshape(self.n_elements, self.n_local)

    def eval_volume(self, xi) -> np.ndarray:
        """Field values at all volume quadrature points, (K, n_qp)."""
        return self.blocked(xi) @ self.tab_vol

    def eval_edge_traces(self, xi, periodic=False):
        """One-sided trace values at edge quadrature points: (plus, minus)."""
        blocked = self.blocked(xi)
        p = "per" if periodic else "int"
        edges = self.mesh.periodic_pairs if periodic else self.mesh.interior_edges
        tp = getattr(self, f"{p}_tab_plus")
        tm = getattr(self, f"{p}_tab_minus")
        up = np.einsum("kiq,ki->kq", tp, blocked[edges.elem_plus])
        um = np.einsum("kiq,ki->kq", tm, blocked[edges.elem_minus])
        return up, um


def eval_field(space: DGSpace, xi, element: int, ref_point) -> float:
    """u_h at a reference point of one element."""
    if not 0 <= element < space.n_elements:
        raise ValueError(f"element id {element} out of range [0, {space.n_elements})")
    vals = eval_reference_basis(space.dim, space.degree, ref_point)[:, 0]
    return float(space.blocked(xi)[element] @ vals)


def _call_on_coords(f, coords):
    if coords.shape[-1] == 1:
        return np.asarray(f(coords[..., 0]), dtype=float)
    return np.asarray(f(coords[..., 0], coords[..., 1]), dtype=float)


def l2_project(space: DGSpace, f) -> np.ndarray:
    """Orthogonal L2 projection of f onto the broken space.

    f is a vectorized callable of physical coordinates: f(x) in 1D,
    f(x, y) in 2D.  The block-diagonal mass system is solved element by
    element.
    """
    fvals = _call_on_coords(f, space.qp_phys)  # (K, n_qp)
    rhs = np.einsum("kq,iq->ki", space.wdetj * fvals, space.tab_vol)
    m_ref = np.einsum("q,iq,jq->ij", space.vol_weights, space.tab_vol, space.tab_vol)
    local = np.linalg.solve(m_ref, rhs.T).T / space.detj[:, None]
    return local.reshape(-1)


def nodal_interpolate(space: DGSpace, f) -> np.ndarray:
    """Interpolant matching f at every nodal point (preserves pointwise bounds)."""
    return _call_on_coords(f, space.node_coords)


def locate_point(mesh: Mesh, x: float, y: float) -> int:
    """Element containing (x, y) on a structured 2D mesh (periodic wrap applied)."""
    if mesh.dimension != 2:
        raise ValueError("locate_point expects a 2D mesh")
    w, h = mesh.extents
    x, y = x % w, y % h
    xs = np.unique(mesh.vertices[:, 0])
    ys = np.unique(mesh.vertices[:, 1])
    nx, ny = len(xs) - 1, len(ys) - 1
    dx, dy = w / nx, h / ny
    i = min(int(x / dx), nx - 1)
    j = min(int(y / dy), ny - 1)
    # local coordinates within the square decide the sub-triangle
    lx, ly = x / dx - i, y / dy - j
    cell = 2 * (j * nx + i)
    return cell if ly <= lx else cell + 1


def sample_at_points(space: DGSpace, xi, points) -> np.ndarray:
    """u_h at arbitrary physical points of a structured 2D mesh."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(points))
    blocked = space.blocked(xi)
    w, h = space.mesh.extents
    for n, (x, y) in enumerate(points):
        k = locate_point(space.mesh, x, y)
        ref = space.map_to_reference(np.array([k]), np.array([[x % w, y % h]]))[0]
        vals = eval_reference_basis(space.dim, space.degree, ref)[:, 0]
        out[n] = blocked[k] @ vals
    return out
