"""Von Mises-Fisher clusters on the unit sphere.

Densities follow the (elevation, azimuth) rectangle convention: the sin(elevation)
Jacobian is part of the density, so integrating over d(elevation) d(azimuth)
gives one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import UnitDirection, unit_vector, unit_vectors

FOUR_PI = 4.0 * math.pi
WEIGHT_TOL = 1e-6


@dataclass(frozen=True)
class VmfComponent:
    mean: UnitDirection
    kappa: float
    weight: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa >= 0):
            raise ValueError(f"kappa must be finite and >= 0, got {self.kappa}")
        if not self.weight > 0:
            raise ValueError(f"weight must be > 0, got {self.weight}")


class VmfMixture:
    """Weighted set of VMF components; weights must sum to 1 within 1e-6."""

    def __init__(self, components: Sequence[VmfComponent]):
        components = tuple(components)
        if not components:
            raise ValueError("a mixture needs at least one component")
        total = math.fsum(c.weight for c in components)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"mixture weights sum to {total!r}, expected 1")
        if total != 1.0:
            components = tuple(VmfComponent(c.mean, c.kappa, c.weight / total) for c in components)
        self.components = components

    @classmethod
    def _trusted(cls, components) -> "VmfMixture":
        mix = cls.__new__(cls)
        mix.components = tuple(components)
        return mix

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __eq__(self, other):
        return isinstance(other, VmfMixture) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"VmfMixture({list(self.components)!r})"

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    @property
    def means(self) -> list[UnitDirection]:
        return [c.mean for c in self.components]

    @classmethod
    def single(cls, mean: UnitDirection, kappa: float) -> "VmfMixture":
        return cls([VmfComponent(mean, kappa, 1.0)])


def log_normalizer(kappa: float) -> float:
    """log of kappa / (4 pi sinh kappa), finite for every kappa >= 0."""
    if kappa == 0.0:
        return -math.log(FOUR_PI)
    # log sinh k = k + log(1 - e^{-2k}) - log 2
    log_sinh = kappa + math.log(-math.expm1(-2.0 * kappa)) - math.log(2.0)
    return math.log(kappa) - math.log(FOUR_PI) - log_sinh


def vmf_kernel(directions, mean: UnitDirection, kappa: float):
    """Jacobian-free density per unit solid angle at unit vectors ``directions`` (..., 3)."""
    cosang = np.asarray(directions) @ unit_vector(mean)
    return np.exp(log_normalizer(kappa) + kappa * cosang)


def vmf_density(elevation, azimuth, mean: UnitDirection, kappa: float):
    """Vectorised density over the (elevation, azimuth) rectangle."""
    elevation = np.asarray(elevation, dtype=float)
    azimuth = np.asarray(azimuth, dtype=float)
    e0, a0 = mean.elevation, mean.azimuth
    cosang = (math.sin(e0) * np.sin(elevation) * np.cos(azimuth - a0)
              + math.cos(e0) * np.cos(elevation))
    return np.exp(log_normalizer(kappa) + kappa * cosang) * np.sin(elevation)


def vmf_pdf(d: UnitDirection, c: VmfComponent) -> float:
    return float(vmf_density(d.elevation, d.azimuth, c.mean, c.kappa))


def mixture_density(elevation, azimuth, mix: VmfMixture):
    out = 0.0
    for c in mix:
        out = out + c.weight * vmf_density(elevation, azimuth, c.mean, c.kappa)
    return out


def mixture_pdf(d: UnitDirection, mix: VmfMixture) -> float:
    return float(mixture_density(d.elevation, d.azimuth, mix))


def polar_cosine(v, kappa: float):
    """Inverse CDF of the cosine between a VMF draw and its mean axis.

    ``v`` in (0, 1]; v = 1 maps to the mean axis. Also used as the node map of
    the per-component quadrature.
    """
    v = np.asarray(v, dtype=float)
    if kappa == 0.0:
        return 2.0 * v - 1.0
    if kappa < 1.0:
        w = -1.0 + np.log1p(v * math.expm1(2.0 * kappa)) / kappa
    else:
        w = 1.0 + np.log(v + (1.0 - v) * math.exp(-2.0 * kappa)) / kappa
    return np.clip(w, -1.0, 1.0)


def tangent_frame(mean: UnitDirection) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal (e1, e2, mu) with mu the mean direction."""
    mu = unit_vector(mean)
    helper = np.zeros(3)
    helper[np.argmin(np.abs(mu))] = 1.0
    e1 = np.cross(mu, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(mu, e1)
    return e1, e2, mu


def directions_about(mean: UnitDirection, w, psi) -> np.ndarray:
    """Unit vectors at polar cosine ``w`` and roll angle ``psi`` about ``mean``."""
    e1, e2, mu = tangent_frame(mean)
    w = np.asarray(w, dtype=float)[..., None]
    psi = np.asarray(psi, dtype=float)[..., None]
    sw = np.sqrt(np.maximum(1.0 - w * w, 0.0))
    return w * mu + sw * (np.cos(psi) * e1 + np.sin(psi) * e2)


def _vectors_to_directions(x: np.ndarray) -> list[UnitDirection]:
    el = np.arctan2(np.hypot(x[:, 0], x[:, 1]), x[:, 2])
    az = np.arctan2(x[:, 1], x[:, 0])
    return [UnitDirection(e, a) for e, a in zip(el, az)]


def sample_component_vectors(c: VmfComponent, rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` draws as unit vectors, shape (n, 3)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    v = 1.0 - rng.random(n)
    psi = rng.random(n) * (2.0 * math.pi)
    return directions_about(c.mean, polar_cosine(v, c.kappa), psi)


def sample_component(c: VmfComponent, rng: np.random.Generator, n: int) -> list[UnitDirection]:
    return _vectors_to_directions(sample_component_vectors(c, rng, n))


def sample_mixture_vectors(mix: VmfMixture, rng: np.random.Generator, n: int,
                           return_labels: bool = False):
    if n < 1:
        raise ValueError("n must be >= 1")
    labels = rng.choice(len(mix), size=n, p=mix.weights)
    out = np.empty((n, 3))
    for q, c in enumerate(mix):
        sel = np.flatnonzero(labels == q)
        if sel.size:
            out[sel] = sample_component_vectors(c, rng, sel.size)
    return (out, labels) if return_labels else out


def sample_mixture(mix: VmfMixture, rng: np.random.Generator, n: int) -> list[UnitDirection]:
    return _vectors_to_directions(sample_mixture_vectors(mix, rng, n))


def translate_mixture(mix: VmfMixture, new_means: Sequence[UnitDirection]) -> VmfMixture:
    """Same weights and concentrations, means moved to ``new_means``."""
    new_means = list(new_means)
    if len(new_means) != len(mix):
        raise ValueError(f"got {len(new_means)} means for {len(mix)} components")
    return VmfMixture._trusted(VmfComponent(m, c.kappa, c.weight) for m, c in zip(new_means, mix))


def mean_resultant(vectors: np.ndarray) -> tuple[float, UnitDirection]:
    """Length of the mean resultant vector and its direction."""
    r = np.asarray(vectors).mean(axis=0)
    return float(np.linalg.norm(r)), UnitDirection.from_vector(r)


__all__ = [
    "VmfComponent", "VmfMixture", "log_normalizer", "vmf_kernel", "vmf_density", "vmf_pdf",
    "mixture_density", "mixture_pdf", "polar_cosine", "tangent_frame", "directions_about",
    "sample_component", "sample_component_vectors", "sample_mixture", "sample_mixture_vectors",
    "translate_mixture", "mean_resultant", "unit_vectors",
]
