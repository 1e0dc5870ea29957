"""
Crank-Nicolson integration of ``M v + K d = F`` with Dirichlet elimination.

Only free nodes are unknowns. Prescribed nodes keep their temperature and a
zero rate; their coupling enters the right-hand side through ``K_fp``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import SystemMatrices

log = logging.getLogger(__name__)

# above this many unknowns 'auto' switches from sparse LU to CG; the
# time-step matrix is mass dominated, so CG needs only tens of iterations
DIRECT_NODE_LIMIT = 20_000
# the consistent mass matrix has a mesh-independent condition number
MASS_TOLERANCE = 1e-13


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverSettings:
    dt: float = 0.05
    method: str = "auto"
    tolerance: float = 1e-10
    max_iterations: int = 2000

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"time step must be positive, got {self.dt}")
        if not self.tolerance > 0:
            raise ValueError(f"solver tolerance must be positive, got {self.tolerance}")
        if self.method not in ("auto", "direct", "cg"):
            raise ValueError(f"unknown solver method {self.method!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def resolved_method(self, n: int) -> str:
        if self.method != "auto":
            return self.method
        return "direct" if n < DIRECT_NODE_LIMIT else "cg"


@dataclass(frozen=True, eq=False)
class SimulationState:
    t: float
    d: np.ndarray
    v: np.ndarray
    step_index: int = 0


class LinearSolver:
    """Reusable solver for one SPD matrix: LU factors or Jacobi-preconditioned CG."""

    def __init__(self, A: sp.spmatrix, settings: SolverSettings):
        self.A = sp.csc_matrix(A)
        self.settings = settings
        self.method = settings.resolved_method(A.shape[0])
        if self.method == "direct":
            try:
                # symmetric ordering keeps fill-in manageable on 3D meshes
                self._lu = spla.splu(self.A, permc_spec="MMD_AT_PLUS_A")
            except RuntimeError as exc:
                raise SolverError(f"factorization failed: {exc}") from exc
        else:
            diag = self.A.diagonal()
            if np.any(diag <= 0):
                raise SolverError("matrix has non-positive diagonal; not SPD")
            self._precond = sp.diags(1.0 / diag)
            self.A = self.A.tocsr()

    def solve(self, b: np.ndarray, x0: np.ndarray | None = None) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        bnorm = np.linalg.norm(b)
        if bnorm == 0:
            return np.zeros_like(b)
        if self.method == "direct":
            x = self._lu.solve(b)
            if not np.all(np.isfinite(x)):
                raise SolverError("direct solve produced non-finite values")
            return x
        iters = 0

        def count(_):
            nonlocal iters
            iters += 1

        x, info = spla.cg(
            self.A, b, x0=x0, rtol=self.settings.tolerance, atol=0.0,
            maxiter=self.settings.max_iterations, M=self._precond, callback=count,
        )
        resid = np.linalg.norm(self.A @ x - b) / bnorm
        log.debug("cg: %d iterations, relative residual %.3e", iters, resid)
        if info != 0:
            raise SolverError(
                f"CG did not converge: {iters} iterations, relative residual {resid:.3e}"
            )
        return x


def solve_linear(A, b, settings: SolverSettings | None = None) -> np.ndarray:
    """Solve ``A x = b`` for symmetric positive definite sparse ``A``."""
    return LinearSolver(A, settings or SolverSettings()).solve(b)


class CrankNicolson:
    """Time integrator holding the factorized ``M_ff + dt/2 K_ff``."""

    def __init__(self, system: SystemMatrices, settings: SolverSettings):
        self.system = system
        self.settings = settings
        f, p = system.free_nodes, system.prescribed_nodes
        M, K = system.M.tocsr(), system.K.tocsr()
        self.M_ff = M[f][:, f]
        self.K_ff = K[f][:, f]
        self.K_fp = K[f][:, p]
        self._mass_solver = None
        self._solver = LinearSolver(self.M_ff + 0.5 * settings.dt * self.K_ff, settings)

    def _coupling(self, d: np.ndarray) -> np.ndarray:
        # K_fp d_p; zero when there are no prescribed nodes
        if self.system.prescribed_nodes.size == 0:
            return 0.0
        return self.K_fp @ d[self.system.prescribed_nodes]

    def init_state(self, u0, F0, t0: float = 0.0) -> SimulationState:
        system = self.system
        d = np.array(np.broadcast_to(np.asarray(u0, float), (system.n_nodes,)))
        d[system.prescribed_nodes] = system.prescribed_values
        f = system.free_nodes
        rhs = np.asarray(F0, float)[f] - self.K_ff @ d[f] - self._coupling(d)
        if self._mass_solver is None:
            mass_settings = replace(
                self.settings, method="cg", tolerance=min(self.settings.tolerance, MASS_TOLERANCE)
            )
            self._mass_solver = LinearSolver(self.M_ff, mass_settings)
        v = np.zeros(system.n_nodes)
        v[f] = self._mass_solver.solve(rhs)
        return SimulationState(t0, d, v, 0)

    def step(self, state: SimulationState, F_next) -> SimulationState:
        f = self.system.free_nodes
        dt = self.settings.dt
        d, v = state.d, state.v
        predictor = d[f] + 0.5 * dt * v[f]
        rhs = np.asarray(F_next, float)[f] - self.K_ff @ predictor - self._coupling(d)
        v_new = np.zeros_like(v)
        v_new[f] = self._solver.solve(rhs, x0=v[f])
        d_new = d.copy()
        d_new[f] = d[f] + 0.5 * dt * (v_new[f] + v[f])
        if not np.all(np.isfinite(d_new)):
            raise SolverError(f"non-finite temperature at step {state.step_index + 1}")
        return replace(
            state,
            t=state.t + dt,
            d=d_new,
            v=v_new,
            step_index=state.step_index + 1,
        )


def init_state(system: SystemMatrices, u0, F0, settings: SolverSettings | None = None):
    """Initial temperatures and rates consistent with ``M v0 = F0 - K d0``."""
    return CrankNicolson(system, settings or SolverSettings()).init_state(u0, F0)


def step(state: SimulationState, system: SystemMatrices, F_next, settings: SolverSettings):
    """Advance one Crank-Nicolson step. Builds the factorization each call;
    loops should hold a :class:`CrankNicolson` instead."""
    return CrankNicolson(system, settings).step(state, F_next)
