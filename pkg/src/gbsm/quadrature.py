"""Quadrature rules on the sphere.

Two rules live here:

* :func:`product_grid` -- Gauss-Legendre in elevation times a periodic
  trapezoid in azimuth over the global (elevation, azimuth) rectangle. It is
  the reference rule for normalisation checks and density maps.
* :func:`mixture_rule` -- per-component rule used by the correlation engine.
  Each VMF component is integrated in its own frame: Gauss-Legendre nodes on
  the component's polar-cosine CDF and a periodic trapezoid in roll angle.
  The nodes carry probability weights, so ``sum(w * g(x))`` is the expectation
  of ``g`` under the mixture, however concentrated a component is.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .directional import VmfComponent, VmfMixture, directions_about, polar_cosine


@dataclass(frozen=True)
class QuadratureSettings:
    n_polar: int = 64
    n_azimuth: int = 128
    rtol: float = 1e-4
    max_doublings: int = 3
    # False evaluates the base rule once with no convergence check
    adaptive: bool = True

    def __post_init__(self):
        if self.n_polar < 1 or self.n_azimuth < 1:
            raise ValueError("quadrature sizes must be >= 1")
        if self.max_doublings < 1:
            raise ValueError("max_doublings must be >= 1")

    def doubled(self, times: int = 1) -> "QuadratureSettings":
        f = 2 ** times
        return QuadratureSettings(self.n_polar * f, self.n_azimuth * f, self.rtol, self.max_doublings, self.adaptive)


@lru_cache(maxsize=64)
def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    x = half * x + 0.5 * (b + a)
    w = half * w
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def product_grid(n_elevation: int, n_azimuth: int):
    """Nodes and weights for integrals of f(elevation, azimuth) d(elevation) d(azimuth).

    Returns ``(elevation, azimuth, weights)`` as 2-D arrays of shape
    (n_elevation, n_azimuth).
    """
    el, wel = gauss_legendre(n_elevation, 0.0, math.pi)
    az = np.arange(n_azimuth) * (2.0 * math.pi / n_azimuth)
    waz = 2.0 * math.pi / n_azimuth
    E, A = np.meshgrid(el, az, indexing="ij")
    return E, A, np.broadcast_to(wel[:, None] * waz, E.shape)


def integrate_rectangle(f, n_elevation: int = 400, n_azimuth: int = 800) -> float:
    """Integrate a vectorised f(elevation, azimuth) over [0, pi] x [0, 2 pi)."""
    E, A, W = product_grid(n_elevation, n_azimuth)
    return float(np.sum(W * f(E, A)))


def component_rule(c: VmfComponent, n_polar: int, n_azimuth: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors (N, 3) and probability weights (N,) for one component."""
    v, wv = gauss_legendre(n_polar, 0.0, 1.0)
    psi = np.arange(n_azimuth) * (2.0 * math.pi / n_azimuth)
    w = polar_cosine(v, c.kappa)
    W, P = np.meshgrid(w, psi, indexing="ij")
    dirs = directions_about(c.mean, W.ravel(), P.ravel())
    weights = np.repeat(wv, n_azimuth) / n_azimuth
    return dirs, weights


def mixture_rule(mix: VmfMixture, settings: QuadratureSettings) -> tuple[np.ndarray, np.ndarray]:
    dirs, weights = [], []
    for c in mix:
        d, w = component_rule(c, settings.n_polar, settings.n_azimuth)
        dirs.append(d)
        weights.append(w * c.weight)
    return np.concatenate(dirs), np.concatenate(weights)
