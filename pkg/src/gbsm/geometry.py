"""Coordinates, ULA element placement and scatterer-to-element distances."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
# element_norm / radius above which the second-order distance expansion is flagged
EXPANSION_GUARD = 0.1

ANCHORS = ("center", "first")


@dataclass(frozen=True)
class UnitDirection:
    """A point on the unit sphere as (elevation, azimuth) in radians.

    Elevation is clipped into [0, pi] and azimuth reduced into [0, 2 pi).
    Use :func:`gbsm.motion.wrap_to_sphere` for angles that may have run past a pole.
    """

    elevation: float
    azimuth: float

    def __post_init__(self):
        el = float(self.elevation)
        az = float(self.azimuth)
        if not (math.isfinite(el) and math.isfinite(az)):
            raise ValueError(f"non-finite direction ({el}, {az})")
        el = min(max(el, 0.0), math.pi)
        az = az % TWO_PI
        if az >= TWO_PI:  # -tiny % 2pi rounds up to 2pi
            az = 0.0
        object.__setattr__(self, "elevation", el)
        object.__setattr__(self, "azimuth", az)

    @classmethod
    def from_degrees(cls, elevation_deg: float, azimuth_deg: float) -> "UnitDirection":
        return cls(math.radians(elevation_deg), math.radians(azimuth_deg))

    def degrees(self) -> tuple[float, float]:
        return math.degrees(self.elevation), math.degrees(self.azimuth)

    @classmethod
    def from_vector(cls, v) -> "UnitDirection":
        x, y, z = (float(c) for c in v)
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0:
            raise ValueError("zero vector has no direction")
        return cls(math.atan2(math.hypot(x, y), z), math.atan2(y, x))


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array.

    ``spacing`` is in wavelengths. ``anchor`` places the array relative to the
    sphere centre: ``"center"`` puts the array midpoint there, ``"first"`` puts
    element 0 there with the rest stepping along ``orientation``.
    """

    num_elements: int
    spacing: float
    orientation: UnitDirection = field(default_factory=lambda: UnitDirection(math.pi / 2, 0.0))
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    anchor: str = "center"

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 1:
            raise ValueError(f"num_elements must be a positive integer, got {self.num_elements}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be > 0 wavelengths, got {self.spacing}")
        if self.anchor not in ANCHORS:
            raise ValueError(f"anchor must be one of {ANCHORS}, got {self.anchor!r}")
        object.__setattr__(self, "num_elements", int(self.num_elements))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def index_offsets(self) -> np.ndarray:
        """Signed element positions along the axis, in units of spacing."""
        idx = np.arange(self.num_elements, dtype=float)
        if self.anchor == "center":
            idx -= (self.num_elements - 1) / 2.0
        return idx

    def with_spacing(self, spacing: float) -> "ArrayGeometry":
        return ArrayGeometry(self.num_elements, spacing, self.orientation, self.center, self.anchor)


@dataclass(frozen=True)
class RadialMotion:
    initial_radius: float
    radial_velocity: float = 0.0

    def __post_init__(self):
        if not self.initial_radius > 0:
            raise ValueError(f"initial_radius must be > 0, got {self.initial_radius}")


def unit_vector(d: UnitDirection) -> np.ndarray:
    se = math.sin(d.elevation)
    return np.array([se * math.cos(d.azimuth), se * math.sin(d.azimuth), math.cos(d.elevation)])


def unit_vectors(elevation, azimuth) -> np.ndarray:
    """Vectorised :func:`unit_vector`; returns shape ``elevation.shape + (3,)``."""
    elevation = np.asarray(elevation, dtype=float)
    azimuth = np.asarray(azimuth, dtype=float)
    se = np.sin(elevation)
    return np.stack([se * np.cos(azimuth), se * np.sin(azimuth), np.cos(elevation)], axis=-1)


def element_offset(g: ArrayGeometry, index: int, wavelength: float) -> np.ndarray:
    """Position of element ``index`` relative to the sphere centre, in metres."""
    if not 0 <= index < g.num_elements:
        raise IndexError(f"element index {index} out of range for {g.num_elements} elements")
    return g.index_offsets()[index] * g.spacing * wavelength * unit_vector(g.orientation)


def cos_alpha(element_dir: UnitDirection, scatterer_dir: UnitDirection) -> float:
    # plain dot product of the two unit vectors
    return float(np.clip(unit_vector(element_dir) @ unit_vector(scatterer_dir), -1.0, 1.0))


def exact_distance(radius, element_norm, cos_alpha):
    """Law-of-cosines distance between a scatterer on the sphere and an element."""
    d2 = radius * radius + element_norm * element_norm - 2.0 * radius * element_norm * cos_alpha
    return np.sqrt(np.maximum(d2, 0.0))


def _check_ratio(element_norm, radius):
    ratio = np.max(np.abs(element_norm)) / radius
    if ratio > EXPANSION_GUARD:
        log.warning("element offset / radius = %.3g exceeds %.2g; distance expansion is inaccurate",
                    ratio, EXPANSION_GUARD)


def approx_distance(radius, element_norm, cos_alpha):
    """Second-order expansion of :func:`exact_distance` for element_norm << radius.

    R - r c + r^2 (1 - c^2) / (2R). Dropping the r^2 / (2R) part leaves the
    separable phase term used for correlations; that part depends only on the
    element, not on the scatterer direction.
    """
    _check_ratio(element_norm, radius)
    x = element_norm * cos_alpha
    return radius - x + (element_norm * element_norm - x * x) / (2.0 * radius)


def path_phase_term(projection, radius):
    """x + x^2 / (2R) for signed projections x; differences of this give D_mn."""
    return projection + projection * projection / (2.0 * radius)


def signed_projections(g: ArrayGeometry, directions: np.ndarray, wavelength: float) -> np.ndarray:
    """Signed projection of every element offset onto unit ``directions``.

    ``directions`` has shape ``(..., 3)``; the result has shape ``(..., num_elements)``.
    """
    axis = unit_vector(g.orientation)
    step = g.index_offsets() * g.spacing * wavelength
    return (directions @ axis)[..., None] * step


def phase_distance_diff(g: ArrayGeometry, m: int, n: int, scatterer: UnitDirection,
                        radius: float, wavelength: float) -> float:
    """D_mn = (x_n - x_m) [1 + (x_n + x_m) / (2R)] with x_k the signed projection of element k.

    Equals the difference of the expanded distances of elements m and n once
    their direction-independent r^2 / (2R) parts are removed.
    """
    for i in (m, n):
        if not 0 <= i < g.num_elements:
            raise IndexError(f"element index {i} out of range for {g.num_elements} elements")
    if not radius > 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    _check_ratio(np.abs(g.index_offsets()) * g.spacing * wavelength, radius)
    x = signed_projections(g, unit_vector(scatterer), wavelength)
    xm, xn = x[m], x[n]
    return float((xn - xm) * (1.0 + (xn + xm) / (2.0 * radius)))
