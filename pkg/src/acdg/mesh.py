"""Interval and structured triangular meshes with periodic face pairing.

The domain is always a box anchored at the origin: [0, L] in 1D and
[0, W] x [0, H] in 2D.  Every element face is classified exactly once,
either as an interior edge shared by two elements or as one half of a
periodic boundary pair.  Each edge record stores the two elements, their
local face indices, the unit normal pointing out of the first element,
and the penalty length scale h_E.

Conventions:
  * 1D element faces: local face 0 is the left endpoint, face 1 the right.
    Point interfaces carry h_E equal to the mean size of the two adjacent
    elements (the usual interior-penalty scaling for intervals).
  * 2D triangle faces: local face k is opposite local vertex k, traversed
    counterclockwise, so the outward normal of face (a -> b) is
    (t_y, -t_x)/|t| with t = b - a.
  * Periodic pairs list the higher-numbered element first; the stored
    normal points out of it, and `shift` translates points on its face
    onto the partner face (a full domain period).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_PAIR_TOL_FACTOR = 1e-9


@dataclass(frozen=True)
class EdgeSet:
    """Struct-of-arrays description of a family of faces shared by two elements."""

    elem_plus: np.ndarray   # (E,) element owning the stored normal
    elem_minus: np.ndarray  # (E,)
    face_plus: np.ndarray   # (E,) local face index within elem_plus
    face_minus: np.ndarray  # (E,)
    normal: np.ndarray      # (E, dim) unit normal out of elem_plus
    h_edge: np.ndarray      # (E,) penalty length scale h_E
    # translation taking points on the plus face to the minus face;
    # zero for interior edges, a domain period vector for periodic pairs
    shift: np.ndarray = field(default=None)

    def __len__(self):
        return len(self.elem_plus)


@dataclass(frozen=True)
class Mesh:
    dimension: int
    vertices: np.ndarray            # (n_vertices, dim)
    elements: np.ndarray            # (K, dim + 1), counterclockwise in 2D
    interior_edges: EdgeSet
    periodic_pairs: EdgeSet
    element_diameters: np.ndarray   # (K,)
    extents: np.ndarray             # (dim,) domain widths

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_faces_per_element(self) -> int:
        return self.dimension + 1

    def element_vertices(self, k) -> np.ndarray:
        return self.vertices[self.elements[k]]

    def dump_text(self, stream) -> None:
        """Plain-text listing for debugging (not a contract format)."""
        stream.write(f"dimension {self.dimension}\n")
        stream.write(f"vertices {len(self.vertices)}\n")
        for v in self.vertices:
            stream.write("  " + " ".join(f"{c:.17g}" for c in v) + "\n")
        stream.write(f"elements {self.n_elements}\n")
        for e in self.elements:
            stream.write("  " + " ".join(str(i) for i in e) + "\n")
        for name, edges in (("interior_edges", self.interior_edges),
                            ("periodic_pairs", self.periodic_pairs)):
            stream.write(f"{name} {len(edges)}\n")
            for i in range(len(edges)):
                stream.write(
                    f"  {edges.elem_plus[i]}/{edges.face_plus[i]}"
                    f" {edges.elem_minus[i]}/{edges.face_minus[i]}"
                    f" n=({', '.join(f'{c:.3g}' for c in edges.normal[i])})"
                    f" h={edges.h_edge[i]:.6g}\n"
                )


# local face k of a triangle is opposite vertex k, oriented counterclockwise
TRI_FACE_VERTICES = ((1, 2), (2, 0), (0, 1))


def build_mesh_1d(domain_length: float, n_elements: int) -> Mesh:
    """Uniform periodic partition of [0, domain_length] into n_elements cells."""
    if n_elements < 2:
        raise ValueError("need at least 2 elements for a periodic interval mesh")
    if domain_length <= 0:
        raise ValueError("domain_length must be positive")

    n = int(n_elements)
    h = domain_length / n
    vertices = np.linspace(0.0, domain_length, n + 1).reshape(-1, 1)
    elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
    diameters = np.full(n, h)

    idx = np.arange(n - 1)
    interior = EdgeSet(
        elem_plus=idx,
        elem_minus=idx + 1,
        face_plus=np.full(n - 1, 1),
        face_minus=np.zeros(n - 1, dtype=int),
        normal=np.ones((n - 1, 1)),
        h_edge=np.full(n - 1, h),
        shift=np.zeros((n - 1, 1)),
    )
    periodic = EdgeSet(
        elem_plus=np.array([n - 1]),
        elem_minus=np.array([0]),
        face_plus=np.array([1]),
        face_minus=np.array([0]),
        normal=np.ones((1, 1)),
        h_edge=np.array([h]),
        shift=np.array([[-domain_length]]),
    )
    return Mesh(
        dimension=1,
        vertices=vertices,
        elements=elements,
        interior_edges=interior,
        periodic_pairs=periodic,
        element_diameters=diameters,
        extents=np.array([domain_length]),
    )


def build_mesh_2d(width: float, height: float, nx: int, ny: int) -> Mesh:
    """Structured triangulation of [0, width] x [0, height], periodic in both directions.

    Each of the nx*ny squares is split along its lower-left -> upper-right
    diagonal, giving 2*nx*ny counterclockwise triangles.
    """
    if width <= 0 or height <= 0:
        raise ValueError("domain dimensions must be positive")
    if nx < 2 or ny < 2:
        raise ValueError("need at least 2 cells per direction for periodic pairing")

    nx, ny = int(nx), int(ny)
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    vertices = np.column_stack([gx.ravel(), gy.ravel()])

    def vid(i, j):
        return j * (nx + 1) + i

    elements = np.empty((2 * nx * ny, 3), dtype=int)
    for j in range(ny):
        for i in range(nx):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v11, v01 = vid(i + 1, j + 1), vid(i, j + 1)
            cell = 2 * (j * nx + i)
            elements[cell] = (v00, v10, v11)      # lower triangle
            elements[cell + 1] = (v00, v11, v01)  # upper triangle

    coords = vertices[elements]  # (K, 3, 2)
    d1 = coords[:, 1] - coords[:, 0]
    d2 = coords[:, 2] - coords[:, 0]
    signed_area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    if np.any(signed_area <= 0):
        raise AssertionError("triangulation produced non-positive element areas")
    edge_lens = np.stack(
        [np.linalg.norm(coords[:, b] - coords[:, a], axis=1) for a, b in TRI_FACE_VERTICES],
        axis=1,
    )
    diameters = edge_lens.max(axis=1)

    # group faces by their (sorted) global vertex pair
    face_table: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for k in range(len(elements)):
        for f, (a, b) in enumerate(TRI_FACE_VERTICES):
            key = tuple(sorted((elements[k, a], elements[k, b])))
            face_table.setdefault(key, []).append((k, f))

    interior_rows = []
    boundary = []
    for key, members in face_table.items():
        if len(members) == 2:
            (k0, f0), (k1, f1) = sorted(members)
            interior_rows.append((k0, f0, k1, f1))
        elif len(members) == 1:
            boundary.append(members[0])
        else:
            raise AssertionError(f"face {key} shared by {len(members)} elements")

    def face_geometry(k, f):
        a, b = TRI_FACE_VERTICES[f]
        pa, pb = vertices[elements[k, a]], vertices[elements[k, b]]
        t = pb - pa
        length = np.linalg.norm(t)
        normal = np.array([t[1], -t[0]]) / length
        midpoint = 0.5 * (pa + pb)
        return normal, length, midpoint

    interior_rows.sort()
    int_plus, int_minus, int_fp, int_fm, int_n, int_h = [], [], [], [], [], []
    for k0, f0, k1, f1 in interior_rows:
        normal, length, _ = face_geometry(k0, f0)
        int_plus.append(k0)
        int_minus.append(k1)
        int_fp.append(f0)
        int_fm.append(f1)
        int_n.append(normal)
        int_h.append(length)
    interior = EdgeSet(
        elem_plus=np.array(int_plus),
        elem_minus=np.array(int_minus),
        face_plus=np.array(int_fp),
        face_minus=np.array(int_fm),
        normal=np.array(int_n),
        h_edge=np.array(int_h),
        shift=np.zeros((len(int_plus), 2)),
    )

    # pair boundary faces across the periodic box
    tol = _PAIR_TOL_FACTOR * max(width, height)
    buckets = {"left": [], "right": [], "bottom": [], "top": []}
    for k, f in boundary:
        _, _, mid = face_geometry(k, f)
        if abs(mid[0]) < tol:
            buckets["left"].append((k, f, mid))
        elif abs(mid[0] - width) < tol:
            buckets["right"].append((k, f, mid))
        elif abs(mid[1]) < tol:
            buckets["bottom"].append((k, f, mid))
        elif abs(mid[1] - height) < tol:
            buckets["top"].append((k, f, mid))
        else:
            raise AssertionError(f"boundary face of element {k} lies on no domain side")

    pair_rows = []

    def match(side_a, side_b, axis, period):
        # pair faces whose midpoints coincide along the transverse coordinate
        other = 1 - axis
        remaining = list(buckets[side_b])
        for k, f, mid in buckets[side_a]:
            hit = None
            for idx, (k2, f2, mid2) in enumerate(remaining):
                if abs(mid[other] - mid2[other]) < tol:
                    hit = idx
                    break
            if hit is None:
                raise AssertionError(f"unmatched periodic face on element {k}")
            k2, f2, _ = remaining.pop(hit)
            shift = np.zeros(2)
            shift[axis] = period
            if k >= k2:
                pair_rows.append((k, f, k2, f2, shift))
            else:
                pair_rows.append((k2, f2, k, f, -shift))
        if remaining:
            raise AssertionError(f"{len(remaining)} unmatched faces on side {side_b}")

    match("right", "left", axis=0, period=-width)
    match("top", "bottom", axis=1, period=-height)

    pair_rows.sort(key=lambda row: (row[0], row[1]))
    per_plus, per_minus, per_fp, per_fm, per_n, per_h, per_s = [], [], [], [], [], [], []
    for kl, fl, km, fm, shift in pair_rows:
        normal, length, _ = face_geometry(kl, fl)
        per_plus.append(kl)
        per_minus.append(km)
        per_fp.append(fl)
        per_fm.append(fm)
        per_n.append(normal)
        per_h.append(length)
        per_s.append(shift)
    periodic = EdgeSet(
        elem_plus=np.array(per_plus),
        elem_minus=np.array(per_minus),
        face_plus=np.array(per_fp),
        face_minus=np.array(per_fm),
        normal=np.array(per_n),
        h_edge=np.array(per_h),
        shift=np.array(per_s),
    )

    mesh = Mesh(
        dimension=2,
        vertices=vertices,
        elements=elements,
        interior_edges=interior,
        periodic_pairs=periodic,
        element_diameters=diameters,
        extents=np.array([width, height]),
    )
    _check_periodic_translates(mesh)
    return mesh


def _check_periodic_translates(mesh: Mesh) -> None:
    """Each periodic pair must be an exact translate by a domain period."""
    pairs = mesh.periodic_pairs
    for i in range(len(pairs)):
        kl, fl = pairs.elem_plus[i], pairs.face_plus[i]
        km, fm = pairs.elem_minus[i], pairs.face_minus[i]
        a, b = TRI_FACE_VERTICES[fl]
        pl = mesh.vertices[mesh.elements[kl, [a, b]]] + pairs.shift[i]
        a, b = TRI_FACE_VERTICES[fm]
        pm = mesh.vertices[mesh.elements[km, [a, b]]]
        # endpoints may come in either order
        direct = np.linalg.norm(pl - pm, axis=1).max()
        swapped = np.linalg.norm(pl - pm[::-1], axis=1).max()
        if min(direct, swapped) > 1e-12 * max(mesh.extents):
            raise AssertionError(f"periodic pair {i} is not a domain-period translate")
