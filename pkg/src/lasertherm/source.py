"""
Laser heating: Gaussian beam width, Lambert-Beer intensity and absorption.

Points are given in the mesh frame (cm). The beam frame has its origin at
``beam_center`` on the top surface with z along the optical axis into the
tissue, so depth is measured from the mesh's top surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Mesh

CO2_WAVELENGTH_CM = 10.6e-4


@dataclass(frozen=True)
class LaserParams:
    """Beam and exposure settings.

    power : W
    waist : beam waist w0, cm
    focal_distance : focal point to tissue surface, cm
    wavelength : cm
    beam_center : (x, y) on the tissue surface, cm
    schedule : ordered, non-overlapping (on, off) intervals in s; the beam is
        on for ``on <= t <= off`` so the last step of an exposure still heats
    normalization : "paper" uses 2P/(pi w) and exp(-2 r^2 / w) as published;
        "physical" uses the standard 2P/(pi w^2) and exp(-2 r^2 / w^2)
    """

    power: float
    waist: float
    focal_distance: float
    wavelength: float = CO2_WAVELENGTH_CM
    beam_center: tuple[float, float] = (0.0, 0.0)
    schedule: tuple[tuple[float, float], ...] = field(default=((0.0, 15.0),))
    normalization: str = "paper"

    def __post_init__(self):
        if self.power < 0:
            raise ValueError(f"laser power must be >= 0, got {self.power}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if not self.waist > 0:
            raise ValueError(f"beam waist must be positive, got {self.waist}")
        if self.focal_distance < 0:
            raise ValueError(f"focal distance must be >= 0, got {self.focal_distance}")
        if self.normalization not in ("paper", "physical"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        schedule = tuple((float(a), float(b)) for a, b in self.schedule)
        prev_off = -np.inf
        for on, off in schedule:
            if not on < off:
                raise ValueError(f"schedule interval ({on}, {off}) is empty or reversed")
            if on < prev_off:
                raise ValueError("schedule intervals must be ordered and non-overlapping")
            prev_off = off
        object.__setattr__(self, "schedule", schedule)
        object.__setattr__(self, "beam_center", tuple(float(c) for c in self.beam_center))

    def is_on(self, t: float) -> bool:
        return any(on <= t <= off for on, off in self.schedule)


def beam_width(z, laser: LaserParams):
    """Radial beam width w(z) in cm at depth ``z`` below the surface."""
    w0 = laser.waist
    zr = laser.wavelength * (laser.focal_distance + np.asarray(z, dtype=float))
    return w0 * np.sqrt(1.0 + (zr / (np.pi * w0**2)) ** 2)


def intensity(p, laser: LaserParams, mu_a: float):
    """Attenuated beam intensity in W/cm^2 at beam-frame points ``p``.

    ``p`` is (..., 3) with x, y relative to the beam axis and z the depth.
    """
    p = np.asarray(p, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    w = beam_width(z, laser)
    r2 = x * x + y * y
    if laser.normalization == "paper":
        peak = 2.0 * laser.power / (np.pi * w)
        radial = -2.0 * r2 / w
    else:
        peak = 2.0 * laser.power / (np.pi * w * w)
        radial = -2.0 * r2 / (w * w)
    return peak * np.exp(radial - mu_a * z)


def volumetric_heating(p, laser: LaserParams, mu_a: float):
    """Absorbed power density S = mu_a * I, W/cm^3."""
    return mu_a * intensity(p, laser, mu_a)


def beam_frame(mesh: Mesh, laser: LaserParams, points=None) -> np.ndarray:
    """Convert mesh-frame points (default: all nodes) to beam-frame points."""
    pts = mesh.nodes if points is None else np.asarray(points, dtype=float)
    cx, cy = laser.beam_center
    top = mesh.origin[2]
    return np.stack([pts[..., 0] - cx, pts[..., 1] - cy, pts[..., 2] - top], axis=-1)


def nodal_source(mesh: Mesh, laser: LaserParams, mu_a: float, t: float) -> np.ndarray:
    """Nodal heating densities (W/cm^3) at time ``t``; zero while the beam is off."""
    if not laser.is_on(t):
        return np.zeros(mesh.n_nodes)
    return volumetric_heating(beam_frame(mesh, laser), laser, mu_a)


class NodalSource:
    """Caches the on-state nodal field so gating is the only per-step work."""

    def __init__(self, mesh: Mesh, laser: LaserParams, mu_a: float):
        self.laser = laser
        self._on = volumetric_heating(beam_frame(mesh, laser), laser, mu_a)
        self._off = np.zeros_like(self._on)

    def __call__(self, t: float) -> np.ndarray:
        return self._on if self.laser.is_on(t) else self._off
