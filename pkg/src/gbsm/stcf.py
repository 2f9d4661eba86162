"""Space-time correlation of the polarized MIMO channel.

Each side contributes a Gram matrix per polarization,

    G[m, n] = E_p[ F_m F_n exp(-j k0 D_mn) ],

taken over that side's scatterer mixture. The unnormalized correlation of the
vec(H) entries (i = m*U + p) is a depolarization-weighted sum of Kronecker
products of transmit and receive Gram matrices; the normalized matrix divides
by the square roots of the diagonal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .antenna import element_patterns
from .directional import VmfMixture, sample_mixture_vectors, translate_mixture
from .geometry import ArrayGeometry, path_phase_term, signed_projections, _check_ratio
from .quadrature import QuadratureSettings, mixture_rule

POLS = {"v": 0, "h": 1}
# (receive pol, transmit pol) of the four channel components
TERM_POLS = ((0, 0), (0, 1), (1, 0), (1, 1))
PSD_TRIGGER = -1e-10


class QuadratureError(RuntimeError):
    """Side integral did not converge; ``estimates`` holds the last two values."""

    def __init__(self, message, estimates):
        super().__init__(message)
        self.estimates = estimates


class DegenerateCorrelationError(ValueError):
    """A channel coefficient has zero power, so its correlation is undefined."""


def xpd_from_db(db_value: float) -> float:
    """Linear E[1/X] for a ratio X quoted in dB."""
    return 10.0 ** (-db_value / 10.0)


@dataclass(frozen=True)
class DepolarizationStats:
    inv_xpd_v: float = 0.0
    inv_xpd_h: float = 0.0
    inv_cpr: float = 1.0

    def __post_init__(self):
        for name in ("inv_xpd_v", "inv_xpd_h", "inv_cpr"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if not self.inv_cpr > 0:
            raise ValueError("inv_cpr must be > 0")

    @classmethod
    def from_db(cls, xpd_v_db: float, xpd_h_db: float, cpr_db: float) -> "DepolarizationStats":
        return cls(xpd_from_db(xpd_v_db), xpd_from_db(xpd_h_db), xpd_from_db(cpr_db))

    def term_weights(self) -> np.ndarray:
        """Weights of the (v,v), (v,h), (h,v), (h,h) components, receive pol first."""
        return np.array([1.0, self.inv_xpd_v, self.inv_xpd_h * self.inv_cpr, self.inv_cpr])


@dataclass(frozen=True)
class SideSnapshot:
    mixture: VmfMixture
    radius: float
    geometry: ArrayGeometry
    tilts: tuple[float, ...]

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        object.__setattr__(self, "tilts", tuple(float(t) for t in self.tilts))
        if len(self.tilts) != self.geometry.num_elements:
            raise ValueError(f"{len(self.tilts)} tilts for {self.geometry.num_elements} elements")

    @property
    def size(self) -> int:
        return self.geometry.num_elements


@dataclass(frozen=True)
class CorrelationMatrix:
    """US x US normalized correlation of vec(H); row i <-> (tx m, rx p) with i = m*U + p."""

    entries: np.ndarray
    U: int
    S: int

    def __post_init__(self):
        n = self.U * self.S
        if self.entries.shape != (n, n):
            raise ValueError(f"expected {n}x{n} entries, got {self.entries.shape}")

    def index(self, p: int, m: int) -> int:
        return m * self.U + p

    def entry(self, p: int, m: int, q: int, n: int) -> complex:
        return complex(self.entries[self.index(p, m), self.index(q, n)])


# -- per-side Gram matrices ---------------------------------------------------

def _side_amplitudes(s: SideSnapshot, directions: np.ndarray, wavelength: float):
    """Phases (N, S) and patterns (2, N, S) at unit vectors ``directions``."""
    k0 = 2.0 * math.pi / wavelength
    _check_ratio(np.abs(s.geometry.index_offsets()) * s.geometry.spacing * wavelength, s.radius)
    x = signed_projections(s.geometry, directions, wavelength)
    phase = k0 * path_phase_term(x, s.radius)
    return phase, element_patterns(directions, s.tilts)


def _grams_at(s: SideSnapshot, wavelength: float, settings: QuadratureSettings) -> np.ndarray:
    dirs, w = mixture_rule(s.mixture, settings)
    phase, pats = _side_amplitudes(s, dirs, wavelength)
    out = np.empty((3, s.size, s.size), dtype=complex)
    out[0] = kernels.phased_gram(w, phase, pats[0])
    out[1] = kernels.phased_gram(w, phase, pats[1])
    out[2] = kernels.phased_gram(w, phase, np.ones_like(phase))
    return out


def side_grams(s: SideSnapshot, wavelength: float,
               settings: Optional[QuadratureSettings] = None) -> np.ndarray:
    """Gram matrices stacked as (v, h, isotropic), shape (3, S, S).

    The rule is refined by doubling until two successive estimates agree to
    ``settings.rtol`` (relative to the largest entry).
    """
    settings = settings or QuadratureSettings()
    prev = _grams_at(s, wavelength, settings)
    if not settings.adaptive:
        return prev
    for i in range(1, settings.max_doublings + 1):
        cur = _grams_at(s, wavelength, settings.doubled(i))
        scale = max(np.max(np.abs(cur)), np.finfo(float).tiny)
        change = np.max(np.abs(cur - prev))
        if change <= settings.rtol * scale:
            return cur
        if i < settings.max_doublings:
            prev = cur
    raise QuadratureError(
        f"side integral not converged after {settings.max_doublings} doublings "
        f"(last relative change {change / scale:.3g}, tolerance {settings.rtol:.3g})", (prev, cur))


def side_integral(s: SideSnapshot, pol: str, m: int, n: int, wavelength: float,
                  settings: Optional[QuadratureSettings] = None) -> complex:
    """Single-side factor for polarization ``pol`` ('v', 'h' or 'iso' for a unit pattern)."""
    for i in (m, n):
        if not 0 <= i < s.size:
            raise IndexError(f"element index {i} out of range for {s.size} elements")
    k = {"v": 0, "h": 1, "iso": 2}[pol]
    return complex(side_grams(s, wavelength, settings)[k, m, n])


# -- correlation ----------------------------------------------------------------

def unnormalized_correlation(tx: SideSnapshot, rx: SideSnapshot, depol: DepolarizationStats,
                             wavelength: float, settings: Optional[QuadratureSettings] = None,
                             grams: Optional[tuple[np.ndarray, np.ndarray]] = None) -> np.ndarray:
    gt, gr = grams if grams is not None else (side_grams(tx, wavelength, settings),
                                               side_grams(rx, wavelength, settings))
    out = np.zeros((tx.size * rx.size,) * 2, dtype=complex)
    for w, (pr, pt) in zip(depol.term_weights(), TERM_POLS):
        if w:
            out += w * np.kron(gt[pt], gr[pr])
    return out


def _normalize(e: np.ndarray) -> np.ndarray:
    d = np.real(np.diagonal(e))
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        bad = int(np.flatnonzero(~(d > 0))[0]) if np.any(~(d > 0)) else -1
        raise DegenerateCorrelationError(f"channel coefficient {bad} has zero power")
    s = np.sqrt(d)
    r = e / np.outer(s, s)
    np.fill_diagonal(r, 1.0)
    return r


def correlation_entry(p: int, m: int, q: int, n: int, tx: SideSnapshot, rx: SideSnapshot,
                      depol: DepolarizationStats, wavelength: float,
                      settings: Optional[QuadratureSettings] = None) -> complex:
    if (p, m) == (q, n):
        e = unnormalized_correlation(tx, rx, depol, wavelength, settings)
        i = m * rx.size + p
        if not np.real(e[i, i]) > 0:
            raise DegenerateCorrelationError(f"channel coefficient (rx {p}, tx {m}) has zero power")
        return 1.0 + 0.0j
    e = unnormalized_correlation(tx, rx, depol, wavelength, settings)
    U = rx.size
    i, j = m * U + p, n * U + q
    return complex(_normalize(e)[i, j])


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """Upper triangle mirrored onto the lower one."""
    up = np.triu(a, 1)
    return up + up.conj().T + np.diag(np.real(np.diagonal(a))).astype(a.dtype)


def psd_repair(a: np.ndarray, force: bool = False) -> np.ndarray:
    """Project onto the PSD cone with unit diagonal when an eigenvalue is below -1e-10."""
    a = hermitian_part(a)
    vals, vecs = np.linalg.eigh(a)
    if not force and vals.min() >= PSD_TRIGGER:
        return a
    vals = np.clip(vals, 0.0, None)
    b = (vecs * vals) @ vecs.conj().T
    s = np.sqrt(np.real(np.diagonal(b)))
    b = b / np.outer(s, s)
    return hermitian_part(b)


def correlation_matrix(tx: SideSnapshot, rx: SideSnapshot, depol: DepolarizationStats,
                       wavelength: float, settings: Optional[QuadratureSettings] = None,
                       grams: Optional[tuple[np.ndarray, np.ndarray]] = None) -> CorrelationMatrix:
    e = unnormalized_correlation(tx, rx, depol, wavelength, settings, grams)
    r = psd_repair(_normalize(e))
    return CorrelationMatrix(r, rx.size, tx.size)


def mean_correlation(R) -> float:
    """Average modulus of the strictly-upper entries."""
    a = R.entries if isinstance(R, CorrelationMatrix) else np.asarray(R)
    n = a.shape[0]
    if n < 2:
        raise ValueError("mean correlation needs at least two channel coefficients")
    iu = np.triu_indices(n, 1)
    return float(np.mean(np.abs(a[iu])))


def stcf_monte_carlo(tx: SideSnapshot, rx: SideSnapshot, depol: DepolarizationStats,
                     wavelength: float, n_scatterers: int, rng: np.random.Generator):
    """Discrete-scatterer estimate of the normalized correlation and its standard error.

    Draws ``n_scatterers`` transmit and receive scatterers from the two
    mixtures, pairs them, and averages the four-component products; the
    standard error uses the delta method for the normalized ratio.
    """
    if n_scatterers < 1000:
        raise ValueError("n_scatterers must be >= 1000")
    dt = sample_mixture_vectors(tx.mixture, rng, n_scatterers)
    dr = sample_mixture_vectors(rx.mixture, rng, n_scatterers)
    ph_t, pat_t = _side_amplitudes(tx, dt, wavelength)
    ph_r, pat_r = _side_amplitudes(rx, dr, wavelength)
    pol_r = np.array([t[0] for t in TERM_POLS])
    pol_t = np.array([t[1] for t in TERM_POLS])
    ybar, var = kernels.mc_moments(np.moveaxis(pat_t, 0, 1), ph_t, np.moveaxis(pat_r, 0, 1), ph_r,
                                   pol_t, pol_r, depol.term_weights())
    est = _normalize(ybar)
    se = np.sqrt(var / n_scatterers)
    np.fill_diagonal(se, 0.0)
    return est, se


# -- time evolution --------------------------------------------------------------

def snapshots_at(cfg, t: float, polarization, rx_means: Optional[Sequence] = None,
                 tx_spacing: Optional[float] = None, rx_spacing: Optional[float] = None):
    """Transmit and receive snapshots of a scenario at time ``t``."""
    from .motion import radius_at
    tx_geom = cfg.tx_array if tx_spacing is None else cfg.tx_array.with_spacing(tx_spacing)
    rx_geom = cfg.rx_array if rx_spacing is None else cfg.rx_array.with_spacing(rx_spacing)
    rx_mix = cfg.rx_mixture if rx_means is None else translate_mixture(cfg.rx_mixture, rx_means)
    tx = SideSnapshot(cfg.tx_mixture, radius_at(cfg.tx_motion, t), tx_geom, polarization.tx_tilts)
    rx = SideSnapshot(rx_mix, radius_at(cfg.rx_motion, t), rx_geom, polarization.rx_tilts)
    return tx, rx


def cluster_trajectories(cfg, rng: np.random.Generator, draws: int):
    """Per draw, one trajectory per receive cluster; None when clusters are static."""
    from .motion import motion_path
    if not cfg.cluster_paths:
        return None
    out = []
    for child in rng.spawn(draws):
        streams = child.spawn(len(cfg.cluster_paths))
        out.append([motion_path(spec, s) for spec, s in zip(cfg.cluster_paths, streams)])
    return out


def stcf_over_time(cfg, times: Sequence[float], trajectory_draws: Optional[int] = None,
                   rng: Optional[np.random.Generator] = None, polarization=None,
                   tx_spacing: Optional[float] = None, rx_spacing: Optional[float] = None,
                   trajectories=None) -> list[CorrelationMatrix]:
    """Correlation matrix at each time, averaged over random cluster paths when present."""
    pol = cfg.polarization if polarization is None else polarization
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    random_paths = bool(cfg.cluster_paths) and any(not p.is_deterministic for p in cfg.cluster_paths)
    draws = (trajectory_draws or cfg.n_trajectory_draws) if random_paths else 1
    if trajectories is None:
        trajectories = cluster_trajectories(cfg, rng, draws)
    if trajectories is not None:
        horizon = min(tr.times[-1] for bundle in trajectories for tr in bundle)
        for t in times:
            if t > horizon * (1 + 1e-12):
                raise ValueError(f"t={t} s is beyond the cluster path horizon {horizon} s")

    settings = cfg.quadrature
    out = []
    for t in times:
        if trajectories is None:
            tx, rx = snapshots_at(cfg, t, pol, None, tx_spacing, rx_spacing)
            out.append(correlation_matrix(tx, rx, cfg.depol, cfg.wavelength, settings))
            continue
        acc = None
        for bundle in trajectories:
            means = [tr.direction_at(t) for tr in bundle]
            tx, rx = snapshots_at(cfg, t, pol, means, tx_spacing, rx_spacing)
            r = correlation_matrix(tx, rx, cfg.depol, cfg.wavelength, settings).entries
            acc = r if acc is None else acc + r
        avg = acc / len(trajectories)
        if len(trajectories) > 1:
            avg = psd_repair(avg, force=True)
        out.append(CorrelationMatrix(avg, cfg.rx_array.num_elements, cfg.tx_array.num_elements))
    return out
