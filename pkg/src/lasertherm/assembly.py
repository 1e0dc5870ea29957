"""
Element matrices by Gauss-Legendre quadrature and global sparse assembly.

The global system is ``M v + K d = F`` with ``M`` the thermal mass matrix
(J/degC), ``K`` the conductance matrix (W/degC) and ``F`` the nodal heat load
(W). Material properties are uniform over the mesh, so the sparsity pattern is
computed once and ``SystemMatrices.with_material`` only rescales values.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .mesh import (
    FACE_AXIS_SIDE,
    FACE_NODES,
    DegenerateElementError,
    Mesh,
    MeshError,
    shape_gradients,
    shape_values,
)


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True)
class MaterialProperties:
    """Uniform tissue properties in cm / s / W / J / degC units.

    c_v : volumetric heat capacity, J/(cm^3 degC)
    kappa : thermal conductivity, W/(cm degC)
    mu_a : absorption coefficient, 1/cm
    h : heat transfer coefficient, W/(cm^2 degC)
    T_inf : ambient temperature, degC
    """

    c_v: float
    kappa: float
    mu_a: float
    h: float
    T_inf: float

    def __post_init__(self):
        for name in ("c_v", "kappa", "mu_a", "h"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray


@lru_cache(maxsize=None)
def _gauss_rule(order: int, dim: int) -> QuadratureRule:
    x, w = np.polynomial.legendre.leggauss(order)
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    # x-fastest ordering of the tensor points
    points = np.column_stack([g.ravel(order="F") for g in grids])
    weights = np.prod([g.ravel(order="F") for g in wgrids], axis=0)
    points.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(points, weights)


def gauss_rule(order: int = 2, dim: int = 3) -> QuadratureRule:
    """Tensor-product Gauss-Legendre rule on ``[-1, 1]**dim``."""
    if order not in (1, 2, 3):
        raise ValueError(f"unsupported quadrature order {order}; use 1, 2 or 3")
    return _gauss_rule(order, dim)


def _element_geometry(coords: np.ndarray, rule: QuadratureRule):
    """Shape values, physical gradients and det J at the rule points.

    ``coords`` has shape (n_el, 8, 3). Returns N (q, 8), grads (n_el, q, 8, 3)
    and detJ (n_el, q).
    """
    N = shape_values(rule.points)
    dN = shape_gradients(rule.points)
    J = np.einsum("eai,qaj->eqij", coords, dN)
    detJ = np.linalg.det(J)
    if np.any(detJ <= 0):
        raise DegenerateElementError("element with non-positive Jacobian")
    grads = np.einsum("qaj,eqji->eqai", dN, np.linalg.inv(J))
    return N, grads, detJ


def _coords(mesh: Mesh, element) -> np.ndarray:
    return mesh.element_coords(element)[None]


def element_mass(mesh: Mesh, element: int, c_v: float, order: int = 2) -> np.ndarray:
    """Consistent 8x8 thermal mass matrix of one element, J/degC."""
    rule = gauss_rule(order)
    N, _, detJ = _element_geometry(_coords(mesh, element), rule)
    return c_v * np.einsum("q,qa,qb->ab", rule.weights * detJ[0], N, N)


def element_stiffness(
    mesh: Mesh, element: int, kappa: float, order: int = 2
) -> np.ndarray:
    """8x8 conductance matrix of one element, W/degC."""
    rule = gauss_rule(order)
    _, G, detJ = _element_geometry(_coords(mesh, element), rule)
    return kappa * np.einsum("q,qai,qbi->ab", rule.weights * detJ[0], G[0], G[0])


def element_source(mesh: Mesh, element: int, f_nodal, order: int = 2) -> np.ndarray:
    """Load vector (W) of a trilinearly interpolated source field (W/cm^3)."""
    return element_mass(mesh, element, 1.0, order) @ np.asarray(f_nodal, float)


def _face_integrals(coords: np.ndarray, local_faces: np.ndarray):
    """Face shape values and area measure at 2x2 Gauss points.

    Returns N (n, q, 8) and weighted area measure (n, q).
    """
    rule = gauss_rule(2, dim=2)
    n = coords.shape[0]
    xi = np.empty((n, rule.points.shape[0], 3))
    for idx, f in enumerate(local_faces):
        axis, side = FACE_AXIS_SIDE[f]
        tangential = [i for i in range(3) if i != axis]
        xi[idx, :, axis] = side
        xi[idx, :, tangential] = rule.points.T
    N = shape_values(xi)
    dN = shape_gradients(xi)
    J = np.einsum("eai,eqaj->eqij", coords, dN)
    dA = np.empty(xi.shape[:2])
    for idx, f in enumerate(local_faces):
        axis, _ = FACE_AXIS_SIDE[f]
        t1, t2 = (J[idx, :, :, i] for i in range(3) if i != axis)
        dA[idx] = np.linalg.norm(np.cross(t1, t2), axis=-1)
    return N, dA * rule.weights


def element_face_flux(mesh: Mesh, element: int, face: int, q_nodal) -> np.ndarray:
    """Load vector (W) from a bilinear flux (W/cm^2) on one exterior face.

    ``q_nodal`` lists the flux at the face's 4 corners in ascending local
    corner order (``FACE_NODES[face]``).
    """
    element, face = int(element), int(face)
    mesh._check_element(element)
    if not 0 <= face < 6:
        raise MeshError(f"local face id must be in [0, 6), got {face}")
    if not any(
        np.any((fs[:, 0] == element) & (fs[:, 1] == face))
        for fs in mesh.face_sets.values()
    ):
        raise MeshError(f"face {face} of element {element} is not on the boundary")
    N, wdA = _face_integrals(_coords(mesh, element), np.array([face]))
    q = np.zeros(8)
    q[FACE_NODES[face]] = q_nodal
    return np.einsum("q,qa,qb,b->a", wdA[0], N[0], N[0], q)


def face_mass_matrix(mesh: Mesh, face_sets) -> sp.csr_matrix:
    """Global surface mass ``B`` so that ``B @ q`` is the load of nodal flux q.

    Only rows/columns of nodes on the listed face sets are nonzero.
    """
    n = mesh.n_nodes
    if not face_sets:
        return sp.csr_matrix((n, n))
    faces = np.concatenate([mesh.face_sets[name] for name in face_sets])
    coords = mesh.element_coords(faces[:, 0])
    N, wdA = _face_integrals(coords, faces[:, 1])
    Be = np.einsum("eq,eqa,eqb->eab", wdA, N, N)
    conn = mesh.elements[faces[:, 0]]
    rows = np.repeat(conn, 8, axis=1).ravel()
    cols = np.tile(conn, (1, 8)).ravel()
    B = sp.coo_matrix((Be.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    B.eliminate_zeros()
    return B


def element_matrices(mesh: Mesh, order: int = 2):
    """Unit-coefficient mass and stiffness for every element, (n_el, 8, 8)."""
    rule = gauss_rule(order)
    N, G, detJ = _element_geometry(mesh.element_coords(), rule)
    wdet = detJ * rule.weights
    Me = np.einsum("eq,qa,qb->eab", wdet, N, N)
    Ke = np.einsum("eq,eqai,eqbi->eab", wdet, G, G)
    return Me, Ke


def _scatter(mesh: Mesh, values: np.ndarray, order=None) -> sp.csr_matrix:
    conn = mesh.elements if order is None else mesh.elements[order]
    if order is not None:
        values = values[order]
    rows = np.repeat(conn, 8, axis=1).ravel()
    cols = np.tile(conn, (1, 8)).ravel()
    n = mesh.n_nodes
    A = sp.coo_matrix((values.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


@dataclass(frozen=True, eq=False)
class SystemMatrices:
    """Global mass/conductance matrices plus the Dirichlet node partition.

    ``mass_unit`` is the mass matrix for c_v = 1; it maps nodal source
    densities (W/cm^3) to nodal loads (W).
    """

    M: sp.csr_matrix
    K: sp.csr_matrix
    mass_unit: sp.csr_matrix
    free_nodes: np.ndarray
    prescribed_nodes: np.ndarray
    prescribed_values: np.ndarray
    material: MaterialProperties

    @property
    def n_nodes(self) -> int:
        return self.M.shape[0]

    def with_material(self, material: MaterialProperties) -> "SystemMatrices":
        """Same pattern, values rescaled for new c_v and kappa."""
        M = self.M.copy()
        K = self.K.copy()
        M.data *= material.c_v / self.material.c_v
        K.data *= material.kappa / self.material.kappa
        return SystemMatrices(
            M, K, self.mass_unit, self.free_nodes, self.prescribed_nodes,
            self.prescribed_values, material,
        )


def dirichlet_partition(mesh: Mesh, dirichlet_spec: Mapping[str, float]):
    """Return ``(free, prescribed, values)`` from face-set -> temperature."""
    values = np.full(mesh.n_nodes, np.nan)
    for name, u_g in dirichlet_spec.items():
        if name not in mesh.face_sets:
            raise AssemblyError(f"unknown face set {name!r} in Dirichlet spec")
        nodes = mesh.face_nodes(name)
        existing = values[nodes]
        clash = ~np.isnan(existing) & (existing != u_g)
        if np.any(clash):
            raise AssemblyError(
                f"conflicting Dirichlet values on face set {name!r}: node "
                f"{nodes[clash][0]} already prescribed {existing[clash][0]}, "
                f"new value {u_g}"
            )
        values[nodes] = u_g
    prescribed = np.flatnonzero(~np.isnan(values))
    free = np.flatnonzero(np.isnan(values))
    return free, prescribed, values[prescribed]


def assemble(
    mesh: Mesh,
    material: MaterialProperties,
    dirichlet_spec: Mapping[str, float] | None = None,
    order: int = 2,
    element_order=None,
) -> SystemMatrices:
    """Assemble global M and K and partition nodes into free/prescribed.

    ``element_order`` optionally permutes the element visit order; the result
    is independent of it up to floating-point summation order.
    """
    Me, Ke = element_matrices(mesh, order)
    mass_unit = _scatter(mesh, Me, element_order)
    K1 = _scatter(mesh, Ke, element_order)
    M = mass_unit.copy()
    M.data *= material.c_v
    K = K1
    K.data *= material.kappa
    free, prescribed, values = dirichlet_partition(mesh, dirichlet_spec or {})
    return SystemMatrices(M, K, mass_unit, free, prescribed, values, material)


def source_load(system: SystemMatrices, f_nodal: np.ndarray) -> np.ndarray:
    """Global interior load F^int (W) for nodal source densities (W/cm^3)."""
    return system.mass_unit @ f_nodal
