"""
Boundary conditions: heat sinks (Dirichlet), constant flux and convection.

Convection is applied explicitly: the flux entering the load at step n+1 is
evaluated from the temperatures of step n, so the Crank-Nicolson system
matrix stays constant over a run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .assembly import MaterialProperties, face_mass_matrix
from .mesh import FACE_SET_NAMES, Mesh


@dataclass(frozen=True)
class HeatSink:
    u_g: float


@dataclass(frozen=True)
class ConstantFlux:
    q_n: float


@dataclass(frozen=True)
class Convection:
    h: float
    T_inf: float
    mode: str = "constant"

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"heat transfer coefficient must be positive, got {self.h}")
        if self.mode not in ("constant", "natural"):
            raise ValueError(f"convection mode must be 'constant' or 'natural', got {self.mode!r}")


Condition = Union[HeatSink, ConstantFlux, Convection]


class BoundaryError(ValueError):
    pass


@dataclass(frozen=True)
class BoundarySpec:
    """One condition per outer face set.

    With ``scale_at_incidence_point`` the natural-convection scaling uses a
    single reference temperature (passed to the load evaluation) for every
    convective node instead of each node's own temperature.
    """

    conditions: Mapping[str, Condition]
    scale_at_incidence_point: bool = False

    def validate(self, mesh: Mesh) -> None:
        missing = [n for n in mesh.face_sets if n not in self.conditions]
        if missing:
            raise BoundaryError(f"face sets without a boundary condition: {missing}")
        unknown = [n for n in self.conditions if n not in mesh.face_sets]
        if unknown:
            raise BoundaryError(f"boundary conditions for unknown face sets: {unknown}")

    def dirichlet(self) -> dict[str, float]:
        return {n: c.u_g for n, c in self.conditions.items() if isinstance(c, HeatSink)}

    def neumann(self) -> dict[str, Condition]:
        return {n: c for n, c in self.conditions.items() if not isinstance(c, HeatSink)}


def convection_flux(u_surf, h, T_inf, mode="constant", T_ref=None):
    """Newton cooling flux into the body, W/cm^2.

    In ``natural`` mode h is scaled by ``max(T_ref - T_inf, 0)**0.25`` where
    ``T_ref`` defaults to ``u_surf`` itself.
    """
    u_surf = np.asarray(u_surf, dtype=float)
    q = h * (T_inf - u_surf)
    if mode == "natural":
        ref = u_surf if T_ref is None else np.asarray(T_ref, dtype=float)
        q = q * np.maximum(ref - T_inf, 0.0) ** 0.25
    elif mode != "constant":
        raise ValueError(f"unknown convection mode {mode!r}")
    return q


class BoundaryLoad:
    """Precomputed Neumann load operator for a mesh and boundary spec.

    ``loader(d)`` returns the global F^q (W) for nodal temperatures ``d``.
    Nodes shared with a heat-sink face get zero load (Dirichlet wins).
    """

    def __init__(self, mesh: Mesh, spec: BoundarySpec):
        spec.validate(mesh)
        self.spec = spec
        sink_nodes = [mesh.face_nodes(n) for n in spec.dirichlet()]
        self._keep = np.ones(mesh.n_nodes, dtype=bool)
        if sink_nodes:
            self._keep[np.concatenate(sink_nodes)] = False
        self._terms = []
        for name, cond in spec.neumann().items():
            B = face_mass_matrix(mesh, [name])
            nodes = mesh.face_nodes(name)
            self._terms.append((cond, B[:, nodes], nodes))
        self.n_nodes = mesh.n_nodes

    def __call__(self, d: np.ndarray, T_ref: float | None = None) -> np.ndarray:
        F = np.zeros(self.n_nodes)
        for cond, B, nodes in self._terms:
            if isinstance(cond, ConstantFlux):
                q = np.full(nodes.size, float(cond.q_n))
            else:
                ref = T_ref if self.spec.scale_at_incidence_point else None
                q = convection_flux(d[nodes], cond.h, cond.T_inf, cond.mode, ref)
            F += B @ q
        F[~self._keep] = 0.0
        return F


def boundary_load(mesh: Mesh, spec: BoundarySpec, d_n, T_ref=None) -> np.ndarray:
    """Global Neumann load vector F^q (W) for current temperatures ``d_n``."""
    d_n = np.asarray(d_n, dtype=float)
    if d_n.shape != (mesh.n_nodes,):
        raise BoundaryError(f"expected {mesh.n_nodes} nodal temperatures, got {d_n.shape}")
    return BoundaryLoad(mesh, spec)(d_n, T_ref)


def experiment_boundaries(
    mesh: Mesh,
    material: MaterialProperties,
    sink_temperature: float | None = None,
    mode: str = "natural",
    scale_at_incidence_point: bool = False,
) -> BoundarySpec:
    """Bench layout: heat sink underneath, natural convection elsewhere.

    The sink temperature defaults to the ambient temperature; callers running
    the experiment protocol pass the initial tissue temperature.
    """
    u_g = material.T_inf if sink_temperature is None else sink_temperature
    conv = Convection(material.h, material.T_inf, mode)
    conditions = {n: conv for n in FACE_SET_NAMES if n != "bottom"}
    conditions["bottom"] = HeatSink(u_g)
    spec = BoundarySpec(conditions, scale_at_incidence_point)
    spec.validate(mesh)
    return spec
