"""Finite-element simulation of laser heating in soft tissue.

Trilinear hexahedral elements, Crank-Nicolson time stepping, heat-sink /
flux / convection boundaries and a Gaussian-beam absorption source.
"""

from .assembly import (
    MaterialProperties,
    SystemMatrices,
    assemble,
    element_face_flux,
    element_mass,
    element_source,
    element_stiffness,
    gauss_rule,
)
from .boundary import (
    BoundarySpec,
    ConstantFlux,
    Convection,
    HeatSink,
    boundary_load,
    convection_flux,
    experiment_boundaries,
)
from .mesh import Mesh, build_grid, jacobian, map_to_physical, shape_gradients, shape_values
from .source import LaserParams, beam_width, intensity, nodal_source, volumetric_heating
from .stepper import CrankNicolson, SimulationState, SolverSettings, init_state, solve_linear, step

__version__ = "0.1.0"
