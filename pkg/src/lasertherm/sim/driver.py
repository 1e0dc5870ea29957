"""
Run a configured simulation: mesh, matrices, loads, time loop and outputs.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..assembly import assemble, source_load
from ..boundary import BoundaryLoad
from ..mesh import Mesh, build_grid, shape_values
from ..source import NodalSource
from ..stepper import CrankNicolson, SimulationState
from .config import SimulationConfig
from .io import ProbeSeries, write_probe_csv, write_snapshot

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    probes: list[ProbeSeries]
    probe_csv: Path | None = None
    snapshots: list[Path] = field(default_factory=list)
    log_file: Path | None = None
    state: SimulationState | None = None
    mesh: Mesh | None = None


class PointProbe:
    """Trilinear interpolation of nodal values at a fixed physical point."""

    def __init__(self, mesh: Mesh, point):
        element, xi = mesh.locate(point)
        self.nodes = mesh.elements[element]
        self.weights = shape_values(xi)

    def __call__(self, d: np.ndarray) -> float:
        return float(self.weights @ d[self.nodes])


class Simulation:
    """Assembled problem ready to step; ``run`` wraps it with file output."""

    def __init__(self, config: SimulationConfig):
        self.config = config
        c = config
        self.mesh = build_grid(c.dims, c.extent, c.origin)
        c.boundary.validate(self.mesh)
        self.system = assemble(self.mesh, c.material, c.boundary.dirichlet())
        self.boundary_load = BoundaryLoad(self.mesh, c.boundary)
        self.source = NodalSource(self.mesh, c.laser, c.material.mu_a)
        self.integrator = CrankNicolson(self.system, c.solver)
        top = c.origin[2]
        self.probes = [PointProbe(self.mesh, (x, y, top)) for x, y in c.probes]
        self.incidence = PointProbe(self.mesh, (*c.laser.beam_center, top))

    def load(self, t: float, d: np.ndarray) -> np.ndarray:
        """Total nodal load at time ``t`` with convection lagged on ``d``."""
        T_ref = self.incidence(d) if self.config.boundary.scale_at_incidence_point else None
        return source_load(self.system, self.source(t)) + self.boundary_load(d, T_ref)

    def times(self) -> np.ndarray:
        dt = self.config.solver.dt
        return np.round(np.arange(self.config.n_steps + 1) * dt, 12)

    def initial_state(self) -> SimulationState:
        d0 = np.full(self.mesh.n_nodes, self.config.initial_temperature)
        d0[self.system.prescribed_nodes] = self.system.prescribed_values
        return self.integrator.init_state(d0, self.load(0.0, d0))

    def advance(self, state: SimulationState, t_next: float) -> SimulationState:
        return self.integrator.step(state, self.load(t_next, state.d))


def run(config: SimulationConfig, output_dir=None, write_files: bool = True) -> RunResult:
    """Execute the configured run and write probe CSV and snapshots."""
    out = Path(output_dir if output_dir is not None else config.output.directory)
    handler = None
    log_file = None
    if write_files:
        out.mkdir(parents=True, exist_ok=True)
        log_file = out / "run.log"
        handler = logging.FileHandler(log_file, mode="w")
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        handler.setLevel(logging.INFO)
    pkg_log = logging.getLogger("lasertherm")
    saved = pkg_log.level
    if handler is not None:
        pkg_log.addHandler(handler)
        # the run log always records INFO, whatever the console shows
        if pkg_log.getEffectiveLevel() > logging.INFO:
            pkg_log.setLevel(logging.INFO)
    try:
        return _run(config, out, write_files, log_file)
    finally:
        if handler is not None:
            pkg_log.removeHandler(handler)
            pkg_log.setLevel(saved)
            handler.close()


def _run(config, out, write_files, log_file) -> RunResult:
    started = time.perf_counter()
    sim = Simulation(config)
    mesh = sim.mesh
    log.info(
        "mesh %s elements, %d nodes; %d free, %d prescribed",
        "x".join(map(str, mesh.dims)), mesh.n_nodes,
        sim.system.free_nodes.size, sim.system.prescribed_nodes.size,
    )
    times = sim.times()
    n_steps = times.size - 1
    log.info("dt = %g s, %d steps, solver %s", config.solver.dt, n_steps, sim.integrator._solver.method)

    every = config.output.probe_every
    snap_every = config.output.snapshot_every
    sample_steps = [n for n in range(n_steps + 1) if n % every == 0 or n == n_steps]
    samples = np.empty((len(sample_steps), len(sim.probes)))
    snapshots: list[Path] = []
    if write_files and snap_every:
        (out / "snapshots").mkdir(exist_ok=True)

    def record(state, n, row):
        samples[row] = [p(state.d) for p in sim.probes]
        if write_files and snap_every and n % snap_every == 0:
            snapshots.extend(_snapshot(config, mesh, state.d, times[n], n, out))

    state = sim.initial_state()
    row = 0
    record(state, 0, row)
    row += 1
    for n in range(1, n_steps + 1):
        state = sim.advance(state, times[n])
        if sample_steps[row] == n:
            record(state, n, row)
            row += 1
    state = SimulationState(times[-1], state.d, state.v, state.step_index)

    sample_times = times[sample_steps]
    probes = [
        ProbeSeries(f"probe{i}", sample_times, samples[:, i]) for i in range(len(sim.probes))
    ]
    csv_path = None
    if write_files:
        csv_path = write_probe_csv(out / config.output.probe_csv, probes)
    log.info(
        "done in %.2f s; incidence peak %.4f degC",
        time.perf_counter() - started, samples[:, 0].max() if samples.size else float("nan"),
    )
    return RunResult(probes, csv_path, snapshots, log_file, state, mesh)


def _snapshot(config, mesh, d, t, n, out):
    if config.output.snapshot_field == "top":
        nx1, ny1, _ = mesh.node_dims
        values = d[: nx1 * ny1]
        node_dims = (nx1, ny1, 1)
        extent = (mesh.extent[0], mesh.extent[1], 0.0)
    else:
        values = d
        node_dims = mesh.node_dims
        extent = mesh.extent
    return write_snapshot(
        out / "snapshots" / f"{config.output.snapshot_field}_{n:06d}",
        values, node_dims, extent, mesh.origin, t, n,
        field=config.output.snapshot_field, vtk=config.output.snapshot_vtk,
    )


def resample(series: ProbeSeries, times) -> ProbeSeries:
    """Linear interpolation of ``series`` onto ``times`` inside its range."""
    times = np.asarray(times, dtype=float)
    lo, hi = series.times[0], series.times[-1]
    if times.size and (times[0] < lo - 1e-12 or times[-1] > hi + 1e-12):
        raise ValueError(f"{series.name}: requested times fall outside [{lo}, {hi}]")
    return ProbeSeries(series.name, times, np.interp(times, series.times, series.temperatures))


def rmse(a: ProbeSeries, b: ProbeSeries) -> float:
    """Root-mean-square temperature difference on a shared time grid."""
    if a.times.size == 0 or b.times.size == 0:
        raise ValueError("cannot compare empty series")
    if not np.array_equal(a.times, b.times):
        raise ValueError(
            "series have different time grids; resample one with resample() first"
        )
    diff = a.temperatures - b.temperatures
    return float(np.sqrt(np.mean(diff * diff)))


def compare(a: ProbeSeries, b: ProbeSeries) -> float:
    """RMSE of ``b`` resampled onto the part of ``a``'s grid that both cover."""
    lo = max(a.times[0], b.times[0])
    hi = min(a.times[-1], b.times[-1])
    if lo > hi:
        raise ValueError(f"{a.name} and {b.name} do not overlap in time")
    if np.array_equal(a.times, b.times):
        return rmse(a, b)
    mask = (a.times >= lo) & (a.times <= hi)
    a_cut = ProbeSeries(a.name, a.times[mask], a.temperatures[mask])
    return rmse(a_cut, resample(b, a_cut.times))
