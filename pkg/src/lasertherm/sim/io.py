"""Probe CSV and field snapshot files."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class ProbeSeries:
    name: str
    times: np.ndarray
    temperatures: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        T = np.asarray(self.temperatures, dtype=float)
        if t.shape != T.shape or t.ndim != 1:
            raise ValueError(f"{self.name}: times and temperatures must be 1-D and equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError(f"{self.name}: times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "temperatures", T)


def write_probe_csv(path, series: list[ProbeSeries]) -> Path:
    """One header row ``time_s,probe0_C,...`` and one row per sample."""
    path = Path(path)
    times = series[0].times
    for s in series[1:]:
        if not np.array_equal(s.times, times):
            raise ValueError("all probe series must share one time grid")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time_s"] + [f"{s.name}_C" for s in series])
        cols = np.column_stack([times] + [s.temperatures for s in series])
        for row in cols:
            w.writerow([repr(float(v)) for v in row])
    return path


def read_probe_csv(path) -> list[ProbeSeries]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "time_s":
        raise ValueError(f"{path}: expected header 'time_s,<probe>_C,...'")
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    if data.size == 0:
        raise ValueError(f"{path}: no samples")
    names = [h[:-2] if h.endswith("_C") else h for h in header[1:]]
    return [ProbeSeries(n, data[:, 0], data[:, i + 1]) for i, n in enumerate(names)]


def write_snapshot(stem, values, node_dims, extent, origin, t, step, field="top", vtk=False):
    """Write ``<stem>.bin`` (little-endian float64, x-fastest node order) and
    a ``<stem>.hdr`` key/value sidecar; optionally ``<stem>.vtk``."""
    stem = Path(stem)
    values = np.ascontiguousarray(values, dtype="<f8")
    paths = [stem.with_suffix(".bin"), stem.with_suffix(".hdr")]
    values.tofile(paths[0])
    with open(paths[1], "w") as fh:
        fh.write(f"field = {field}\n")
        fh.write("dtype = float64 little-endian\n")
        fh.write("order = lexicographic x-fastest\n")
        fh.write("dims = {} {} {}\n".format(*node_dims))
        fh.write("extent_cm = {} {} {}\n".format(*(repr(float(e)) for e in extent)))
        fh.write("origin_cm = {} {} {}\n".format(*(repr(float(o)) for o in origin)))
        fh.write(f"time_s = {float(t)!r}\n")
        fh.write(f"step = {int(step)}\n")
    if vtk:
        spacing = [
            e / (n - 1) if n > 1 else 1.0 for e, n in zip(extent, node_dims)
        ]
        p = stem.with_suffix(".vtk")
        with open(p, "w") as fh:
            fh.write("# vtk DataFile Version 3.0\n")
            fh.write(f"temperature t={float(t)!r} s\nASCII\nDATASET STRUCTURED_POINTS\n")
            fh.write("DIMENSIONS {} {} {}\n".format(*node_dims))
            fh.write("ORIGIN {} {} {}\n".format(*origin))
            fh.write("SPACING {} {} {}\n".format(*spacing))
            fh.write(f"POINT_DATA {values.size}\nSCALARS temperature_C double 1\nLOOKUP_TABLE default\n")
            np.savetxt(fh, values, fmt="%.17g")
        paths.append(p)
    return paths


def read_snapshot(stem):
    """Return ``(values, header dict)`` for a binary snapshot."""
    stem = Path(stem)
    header = {}
    with open(stem.with_suffix(".hdr")) as fh:
        for line in fh:
            key, _, value = line.partition("=")
            header[key.strip()] = value.strip()
    values = np.fromfile(stem.with_suffix(".bin"), dtype="<f8")
    return values, header
