"""Cluster motion: radial sphere growth and drifted Brownian paths on the sphere."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import RadialMotion, UnitDirection

TWO_PI = 2.0 * math.pi


class SphereCollapseError(ValueError):
    """The scatterer sphere radius reached zero or below."""


def radius_at(rm: RadialMotion, t: float) -> float:
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    r = rm.initial_radius + rm.radial_velocity * t
    if not r > 0:
        raise SphereCollapseError(f"scatterer sphere collapsed at t={t} s (radius {r} m)")
    return r


def brownian_path(rng: np.random.Generator, segments: int, dt: float) -> np.ndarray:
    """Standard Brownian motion sampled at m * dt, m = 0..segments; B[0] = 0."""
    if segments < 1 or not dt > 0:
        raise ValueError("need segments >= 1 and dt > 0")
    out = np.zeros(segments + 1)
    np.cumsum(rng.standard_normal(segments) * math.sqrt(dt), out=out[1:])
    return out


def wrap_angles(raw_elevation, raw_azimuth, pole_shift: bool = False):
    """Fold raw elevation into [0, pi] by reflection at the poles; azimuth modulo 2 pi.

    With ``pole_shift`` every pole crossing also turns the azimuth by pi, which
    gives the geometrically equivalent point. The default leaves azimuth alone.
    """
    el = np.asarray(raw_elevation, dtype=float)
    az = np.asarray(raw_azimuth, dtype=float)
    crossings = np.floor(el / math.pi)
    folded = np.mod(el, TWO_PI)
    folded = np.where(folded > math.pi, TWO_PI - folded, folded)
    if pole_shift:
        az = az + math.pi * np.mod(crossings, 2.0)
    az = np.mod(az, TWO_PI)
    az = np.where(az >= TWO_PI, 0.0, az)
    return folded, az


def wrap_to_sphere(raw_elevation: float, raw_azimuth: float, pole_shift: bool = False) -> UnitDirection:
    el, az = wrap_angles(raw_elevation, raw_azimuth, pole_shift)
    return UnitDirection(float(el), float(az))


@dataclass(frozen=True)
class MotionPathSpec:
    """Drift + Brownian path for one cluster mean.

    ``angular_rates`` and ``sigmas`` are (elevation, azimuth) pairs in rad/s and
    rad. Leaving ``angular_rates`` as None with a ``dest`` set picks the rates
    that reach ``dest`` at ``segments * dt``.
    """

    start: UnitDirection
    dest: Optional[UnitDirection] = None
    angular_rates: Optional[tuple[float, float]] = None
    sigmas: tuple[float, float] = (0.0, 0.0)
    segments: int = 100
    dt: float = 0.05

    def __post_init__(self):
        if int(self.segments) != self.segments or self.segments < 1:
            raise ValueError(f"segments must be a positive integer, got {self.segments}")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if len(self.sigmas) != 2 or min(self.sigmas) < 0:
            raise ValueError(f"sigmas must be two values >= 0, got {self.sigmas}")
        rates = self.angular_rates
        if rates is None:
            if self.dest is None:
                rates = (0.0, 0.0)
            else:
                horizon = self.segments * self.dt
                rates = ((self.dest.elevation - self.start.elevation) / horizon,
                         (self.dest.azimuth - self.start.azimuth) / horizon)
        if len(rates) != 2:
            raise ValueError(f"angular_rates must be a pair, got {rates}")
        object.__setattr__(self, "angular_rates", tuple(float(r) for r in rates))
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        object.__setattr__(self, "segments", int(self.segments))

    @property
    def horizon(self) -> float:
        return self.segments * self.dt

    @property
    def is_deterministic(self) -> bool:
        return self.sigmas[0] == 0.0 and self.sigmas[1] == 0.0

    def times(self) -> np.ndarray:
        return np.arange(self.segments + 1) * self.dt


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    raw_elevation: np.ndarray
    raw_azimuth: np.ndarray
    pole_shift: bool = False

    @property
    def samples(self) -> list[tuple[float, UnitDirection]]:
        el, az = wrap_angles(self.raw_elevation, self.raw_azimuth, self.pole_shift)
        return [(float(t), UnitDirection(e, a)) for t, e, a in zip(self.times, el, az)]

    def raw_at(self, t: float) -> tuple[float, float]:
        if t < self.times[0] or t > self.times[-1] * (1 + 1e-12):
            raise ValueError(f"t={t} s is outside the trajectory horizon [0, {self.times[-1]}]")
        return (float(np.interp(t, self.times, self.raw_elevation)),
                float(np.interp(t, self.times, self.raw_azimuth)))

    def direction_at(self, t: float) -> UnitDirection:
        """Direction at ``t``; raw angles are interpolated linearly between grid points."""
        return wrap_to_sphere(*self.raw_at(t), pole_shift=self.pole_shift)


def motion_path(spec: MotionPathSpec, rng: Optional[np.random.Generator] = None,
                pole_shift: bool = False) -> Trajectory:
    t = spec.times()
    w_el, w_az = spec.angular_rates
    s_el, s_az = spec.sigmas
    el = spec.start.elevation + w_el * t
    az = spec.start.azimuth + w_az * t
    if not spec.is_deterministic:
        if rng is None:
            raise ValueError("a random path needs an rng")
        el = el + s_el * brownian_path(rng, spec.segments, spec.dt)
        az = az + s_az * brownian_path(rng, spec.segments, spec.dt)
    return Trajectory(t, el, az, pole_shift)


def trajectory_bundle(spec: MotionPathSpec, rng: np.random.Generator, n_paths: int,
                      pole_shift: bool = False) -> list[Trajectory]:
    """``n_paths`` independent paths, path i driven by the i-th child stream of ``rng``."""
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    return [motion_path(spec, child, pole_shift) for child in rng.spawn(n_paths)]
