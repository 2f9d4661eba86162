"""Half-wave dipole field patterns with the dipole axis tilted in the x-z plane."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .geometry import UnitDirection

PRESETS = ("VV", "VH", "SLANT45")


@dataclass(frozen=True)
class DipoleElement:
    tilt: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.tilt):
            raise ValueError(f"tilt must be finite, got {self.tilt}")


@dataclass(frozen=True)
class PolarizationConfig:
    tx_tilts: tuple[float, ...]
    rx_tilts: tuple[float, ...]
    label: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "tx_tilts", tuple(float(t) for t in self.tx_tilts))
        object.__setattr__(self, "rx_tilts", tuple(float(t) for t in self.rx_tilts))
        for t in self.tx_tilts + self.rx_tilts:
            if not math.isfinite(t):
                raise ValueError(f"tilt must be finite, got {t}")

    def check_sizes(self, n_tx: int, n_rx: int):
        if len(self.tx_tilts) != n_tx or len(self.rx_tilts) != n_rx:
            raise ValueError(
                f"polarization {self.label!r} has {len(self.tx_tilts)}x{len(self.rx_tilts)} tilts "
                f"for a {n_tx}-element transmit and {n_rx}-element receive array")


def preset_config(name: str, S: int = 2, U: int = 2) -> PolarizationConfig:
    key = name.upper().replace("/", "").replace("±", "").replace("+-", "")
    if key in ("SLANT", "SLANT45", "45"):
        key = "SLANT45"
    if key not in PRESETS:
        raise ValueError(f"unknown polarization preset {name!r}; choose one of {PRESETS}")
    if S != 2 or U != 2:
        raise ValueError(f"presets are defined for 2x2 arrays, got S={S}, U={U}")
    tilts = {"VV": (0.0, 0.0), "VH": (0.0, math.pi / 2), "SLANT45": (math.pi / 4, -math.pi / 4)}[key]
    return PolarizationConfig(tilts, tilts, key)


def _angle_terms(elevation, azimuth, tilt):
    st, ct = np.sin(elevation), np.cos(elevation)
    sp, cp = np.sin(azimuth), np.cos(azimuth)
    sg, cg = math.sin(tilt), math.cos(tilt)
    xi = st * cp * sg + ct * cg
    return st, ct, sp, cp, sg, cg, xi


def field_pattern_v(d: UnitDirection, tilt: float) -> float:
    st, ct, sp, cp, sg, cg, xi = _angle_terms(d.elevation, d.azimuth, tilt)
    return float(abs((ct * cp * sg - st * cg) * kernels.dipole_factor(np.array([xi]))[0]))


def field_pattern_h(d: UnitDirection, tilt: float) -> float:
    st, ct, sp, cp, sg, cg, xi = _angle_terms(d.elevation, d.azimuth, tilt)
    return float(abs(sp * sg * kernels.dipole_factor(np.array([xi]))[0]))


def element_patterns(directions: np.ndarray, tilts: Sequence[float]) -> np.ndarray:
    """Patterns for unit vectors (N, 3) and per-element tilts.

    Returns shape (2, N, len(tilts)); index 0 is the vertical pattern, 1 the horizontal.
    """
    directions = np.asarray(directions, dtype=float)
    el = np.arctan2(np.hypot(directions[:, 0], directions[:, 1]), directions[:, 2])
    az = np.arctan2(directions[:, 1], directions[:, 0])
    out = np.empty((2, directions.shape[0], len(tilts)))
    for i, tilt in enumerate(tilts):
        st, ct, sp, cp, sg, cg, xi = _angle_terms(el, az, tilt)
        f = kernels.dipole_factor(xi)
        out[0, :, i] = np.abs((ct * cp * sg - st * cg) * f)
        out[1, :, i] = np.abs(sp * sg * f)
    return out
