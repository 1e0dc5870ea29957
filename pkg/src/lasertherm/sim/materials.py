"""Tissue property presets and the water-content recipe."""

from __future__ import annotations

from ..assembly import MaterialProperties

PRESETS = {
    "agar": MaterialProperties(c_v=4.3, kappa=0.0062, mu_a=31.0, h=0.022, T_inf=24.0),
    "chicken": MaterialProperties(c_v=3.73, kappa=0.0049, mu_a=26.0, h=0.029, T_inf=24.0),
}


def preset(tissue: str) -> MaterialProperties:
    try:
        return PRESETS[tissue.lower()]
    except KeyError:
        raise ValueError(
            f"unknown tissue {tissue!r}; choose from {sorted(PRESETS)}"
        ) from None


def material_from_water_content(w: float, rho: float) -> tuple[float, float]:
    """Empirical (c_v, kappa) of a water-rich tissue.

    w is the water mass fraction and rho the density in g/cm^3. Returns c_v in
    J/(cm^3 degC) and kappa in W/(cm degC).
    """
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"water content must be in [0, 1], got {w}")
    if not rho > 0:
        raise ValueError(f"density must be positive, got {rho}")
    return (1.55 + 2.8 * w) * rho, 0.0006 + 0.0057 * w
