"""
Trilinear hexahedra and their element matrices
================================================

A single brick element, its eight shape functions and the mass and
conductance matrices that the assembler scatters into the global system.
"""

import numpy as np

from lasertherm import build_grid, element_mass, element_stiffness, jacobian, shape_values

# One element, 0.5 x 0.8 x 0.25 cm, anchored at the origin.
mesh = build_grid((1, 1, 1), (0.5, 0.8, 0.25))
print("corner coordinates\n", mesh.element_coords(0))

# Shape functions form a partition of unity anywhere in the reference cube.
xi = np.array([0.3, -0.7, 0.1])
N = shape_values(xi)
print("N(xi) =", np.round(N, 4), " sum =", N.sum())

# For an axis-aligned brick the Jacobian is diagonal: half the edge lengths.
J, det = jacobian(mesh, 0, xi)
print("J diagonal:", np.diag(J), " det J:", det, " (volume / 8 =", 0.5 * 0.8 * 0.25 / 8, ")")

# The consistent mass matrix with c_v = 1 sums to the element volume.
Me = element_mass(mesh, 0, 1.0)
print("sum(Me) =", Me.sum())

# The conductance matrix annihilates constants and gives kappa * V |grad u|^2
# for linear fields.
Ke = element_stiffness(mesh, 0, 0.0062)
x = mesh.element_coords(0)[:, 0]
print("|Ke @ 1| =", np.abs(Ke.sum(axis=1)).max())
print("x . Ke . x =", x @ Ke @ x, " kappa * V =", 0.0062 * 0.1)
