"""
Newton cooling of a small block
===============================

A 1 mm agar cube with convection on every face cools almost uniformly, so
its temperature follows the lumped law T_inf + (T0 - T_inf) exp(-t / tau)
with tau = c_v V / (h A).
"""

import numpy as np

from lasertherm import (
    BoundarySpec,
    Convection,
    CrankNicolson,
    SolverSettings,
    assemble,
    build_grid,
)
from lasertherm.boundary import BoundaryLoad
from lasertherm.mesh import FACE_SET_NAMES
from lasertherm.sim import preset

agar = preset("agar")
a = 0.1
mesh = build_grid((1, 1, 1), (a, a, a))
system = assemble(mesh, agar)
tau = agar.c_v * a / (6 * agar.h)
print(f"time constant tau = {tau:.3f} s")

# Convection load is evaluated from the previous step's temperatures.
load = BoundaryLoad(mesh, BoundarySpec({n: Convection(agar.h, agar.T_inf) for n in FACE_SET_NAMES}))
cn = CrankNicolson(system, SolverSettings(dt=tau / 200))
T0 = 60.0
state = cn.init_state(T0, load(np.full(mesh.n_nodes, T0)))

for k in range(1, 601):
    state = cn.step(state, load(state.d))
    if k % 100 == 0:
        exact = agar.T_inf + (T0 - agar.T_inf) * np.exp(-state.t / tau)
        print(f"t = {state.t:7.3f} s  FE {state.d.mean():.4f}  lumped {exact:.4f} degC")

# Switching to natural convection scales h by (T - T_inf)^(1/4), so the block
# cools faster while it is hot and slower as it approaches ambient.
