"""
Structured hexahedral mesh and trilinear shape functions on the bi-unit cube.

Conventions used throughout the package:

* Local corner ``A`` has bi-unit coordinates ``CORNERS[A]`` with the sign
  pattern enumerated x-fastest, i.e. ``A = a0 + 2*a1 + 4*a2`` with
  ``xi_i^A = -1 if a_i == 0 else +1``.
* Global nodes and elements are numbered lexicographically, x fastest, then
  y, then z.
* The z axis points into the tissue. The ``top`` face set is the z-min
  surface (the irradiated one), ``bottom`` is z-max.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CORNERS = np.array(
    [[-1.0 if (A >> i) & 1 == 0 else 1.0 for i in range(3)] for A in range(8)]
)

# local face id -> (axis, side); face 2*axis is the -1 side, 2*axis+1 the +1 side
FACE_AXIS_SIDE = tuple((f // 2, -1.0 if f % 2 == 0 else 1.0) for f in range(6))

# local face id -> the 4 local corners on that face, in ascending corner order
FACE_NODES = np.array(
    [np.flatnonzero(CORNERS[:, axis] == side) for axis, side in FACE_AXIS_SIDE]
)

FACE_SET_NAMES = ("x_min", "x_max", "y_min", "y_max", "top", "bottom")
_FACE_SET_LOCAL = dict(zip(FACE_SET_NAMES, range(6)))


class MeshError(ValueError):
    """Invalid mesh construction or query."""


class DegenerateElementError(MeshError):
    """An element with non-positive Jacobian determinant."""


@dataclass(frozen=True, eq=False)
class Mesh:
    """Structured cuboid mesh of 8-node hexahedra.

    Attributes
    ----------
    dims : tuple of int
        Element counts ``(nx, ny, nz)``.
    extent : tuple of float
        Physical size per axis, cm.
    origin : tuple of float
        Coordinates of the (x-min, y-min, z-min) corner, cm.
    nodes : ndarray, shape (n_nodes, 3)
    elements : ndarray of int, shape (n_elements, 8)
    face_sets : dict of str -> ndarray of int, shape (n_faces, 2)
        ``(element, local_face)`` pairs for each outer surface.
    """

    dims: tuple[int, int, int]
    extent: tuple[float, float, float]
    origin: tuple[float, float, float]
    nodes: np.ndarray
    elements: np.ndarray
    face_sets: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def node_dims(self) -> tuple[int, int, int]:
        return tuple(n + 1 for n in self.dims)

    @property
    def spacing(self) -> np.ndarray:
        return np.asarray(self.extent) / np.asarray(self.dims)

    @property
    def volume(self) -> float:
        return float(np.prod(self.extent))

    def element_coords(self, element: int | np.ndarray | None = None) -> np.ndarray:
        """Corner coordinates, shape (8, 3) for one element or (n, 8, 3)."""
        if element is None:
            return self.nodes[self.elements]
        if np.isscalar(element):
            self._check_element(element)
        return self.nodes[self.elements[element]]

    def face_nodes(self, name: str) -> np.ndarray:
        """Sorted unique global node indices lying on a named face set."""
        faces = self.face_sets[name]
        local = FACE_NODES[faces[:, 1]]
        return np.unique(self.elements[faces[:, [0]], local])

    def surface_node_grid(self) -> np.ndarray:
        """Global indices of the top-surface nodes, shape (ny+1, nx+1)."""
        nx1, ny1, _ = self.node_dims
        return np.arange(nx1 * ny1).reshape(ny1, nx1)

    def locate(self, point) -> tuple[int, np.ndarray]:
        """Return ``(element, xi)`` for a physical point inside the grid.

        Points on shared faces are assigned to the lower-index element. Bi-unit
        coordinates within 1e-12 of a corner value are snapped so that a point
        sitting on a node interpolates that node exactly.
        """
        p = np.asarray(point, dtype=float)
        rel = (p - np.asarray(self.origin)) / self.spacing
        dims = np.asarray(self.dims)
        tol = 1e-9
        if np.any(rel < -tol) or np.any(rel > dims + tol):
            raise MeshError(f"point {tuple(p)} lies outside the mesh")
        idx = np.clip(np.floor(rel).astype(int), 0, dims - 1)
        # a point exactly on the upper face of a cell belongs to that cell
        on_upper = np.isclose(rel, idx, rtol=0, atol=1e-12) & (idx > 0)
        idx = np.where(on_upper, idx - 1, idx)
        xi = 2.0 * (rel - idx) - 1.0
        for target in (-1.0, 1.0):
            xi = np.where(np.abs(xi - target) < 1e-12, target, xi)
        xi = np.clip(xi, -1.0, 1.0)
        e = int(idx[0] + dims[0] * (idx[1] + dims[1] * idx[2]))
        return e, xi

    def _check_element(self, element) -> None:
        if not 0 <= int(element) < self.n_elements:
            raise MeshError(
                f"element index {element} out of range [0, {self.n_elements})"
            )


def build_grid(dims, extent, origin=(0.0, 0.0, 0.0)) -> Mesh:
    """Build a regular lattice of ``nx*ny*nz`` axis-aligned hexahedra."""
    dims = tuple(int(n) for n in dims)
    extent = tuple(float(v) for v in extent)
    origin = tuple(float(v) for v in origin)
    if len(dims) != 3 or len(extent) != 3 or len(origin) != 3:
        raise MeshError("dims, extent and origin must each have 3 components")
    if min(dims) < 1:
        raise MeshError(f"element counts must be >= 1, got {dims}")
    if not min(extent) > 0:
        raise MeshError(f"extent must be positive, got {extent}")

    nx, ny, nz = dims
    axes = [
        origin[i] + extent[i] * np.arange(dims[i] + 1) / dims[i] for i in range(3)
    ]
    z, y, x = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
    nodes = np.column_stack([x.ravel(), y.ravel(), z.ravel()])

    def node_id(i, j, k):
        return i + (nx + 1) * (j + (ny + 1) * k)

    k, j, i = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    i, j, k = i.ravel(), j.ravel(), k.ravel()
    elements = np.column_stack(
        [node_id(i + a[0], j + a[1], k + a[2]) for a in (CORNERS > 0).astype(int)]
    )

    face_sets = {}
    ijk = (i, j, k)
    for name, local in _FACE_SET_LOCAL.items():
        axis, side = FACE_AXIS_SIDE[local]
        target = 0 if side < 0 else dims[axis] - 1
        elems = np.flatnonzero(ijk[axis] == target)
        face_sets[name] = np.column_stack([elems, np.full(elems.size, local)])

    mesh = Mesh(dims, extent, origin, nodes, elements, face_sets)
    _check_volumes(mesh)
    return mesh


def _check_volumes(mesh: Mesh) -> None:
    J = np.einsum("eai,aj->eij", mesh.element_coords(), shape_gradients(np.zeros(3)))
    det = np.linalg.det(J)
    bad = np.flatnonzero(det <= 0)
    if bad.size:
        raise DegenerateElementError(f"elements with non-positive volume: {bad[:10]}")


def shape_values(xi) -> np.ndarray:
    """Trilinear shape functions at a bi-unit point.

    ``xi`` may be a single point (3,) or a batch (n, 3); the result has shape
    (8,) or (n, 8).
    """
    xi = np.asarray(xi, dtype=float)
    terms = 1.0 + xi[..., None, :] * CORNERS
    return terms.prod(axis=-1) / 8.0


def shape_gradients(xi) -> np.ndarray:
    """Derivatives dN^A/dxi_i, shape (8, 3) or (n, 8, 3) for a batch."""
    xi = np.asarray(xi, dtype=float)
    terms = 1.0 + xi[..., None, :] * CORNERS
    out = np.empty(terms.shape)
    for i in range(3):
        others = [m for m in range(3) if m != i]
        out[..., i] = CORNERS[:, i] * terms[..., others[0]] * terms[..., others[1]]
    return out / 8.0


def map_to_physical(mesh: Mesh, element: int, xi) -> np.ndarray:
    """Physical coordinates (cm) of a bi-unit point inside ``element``."""
    return shape_values(xi) @ mesh.element_coords(element)


def jacobian(mesh: Mesh, element: int, xi) -> tuple[np.ndarray, float]:
    """Return ``(J, det J)`` with ``J[i, j] = dp_i / dxi_j``."""
    J = mesh.element_coords(element).T @ shape_gradients(xi)
    det = float(np.linalg.det(J))
    if det <= 0:
        raise DegenerateElementError(f"element {element} has |J| = {det}")
    return J, det
