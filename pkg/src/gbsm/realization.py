"""Correlated channel draws and ergodic capacity."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .stcf import CorrelationMatrix, DepolarizationStats

# draws per independent random stream; fixed so results do not depend on how work is split
BLOCK = 1024
XPD_RULES = ("v", "h", "mean", "none")


@dataclass(frozen=True)
class ChannelDraw:
    matrix: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("channel draw has non-finite entries")


@dataclass(frozen=True)
class CapacityStats:
    mean: float
    std_error: float
    n_draws: int


def _entries(R) -> np.ndarray:
    return R.entries if isinstance(R, CorrelationMatrix) else np.asarray(R)


def matrix_sqrt_psd(R) -> np.ndarray:
    """Hermitian square root of a Hermitian PSD matrix."""
    a = _entries(R)
    scale = max(np.max(np.abs(a)), 1.0)
    if np.max(np.abs(a - a.conj().T)) > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian")
    vals, vecs = np.linalg.eigh(0.5 * (a + a.conj().T))
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) entries: real and imaginary parts each with variance 1/2."""
    g = rng.standard_normal(tuple(shape) + (2,))
    return (g[..., 0] + 1j * g[..., 1]) * math.sqrt(0.5)


def realize_channels(R, U: int, S: int, rng: np.random.Generator, n: int,
                     sqrt_r: Optional[np.ndarray] = None) -> np.ndarray:
    """``n`` channel matrices, shape (n, U, S); vec is column-stacking."""
    a = _entries(R)
    if a.shape != (U * S, U * S):
        raise ValueError(f"correlation is {a.shape}, expected {(U * S, U * S)}")
    root = matrix_sqrt_psd(a) if sqrt_r is None else sqrt_r
    v = complex_gaussian(rng, (n, U * S)) @ root.T
    # vec index i = s*U + u, so each row reshapes to (S, U) then transposes
    return np.swapaxes(v.reshape(n, S, U), 1, 2)


def realize_channel(R, U: int, S: int, rng: np.random.Generator) -> ChannelDraw:
    return ChannelDraw(realize_channels(R, U, S, rng, 1)[0])


def capacity(H, snr: float, S: Optional[int] = None) -> float:
    """log2 det(I + snr/S H H^H) in bps/Hz."""
    h = H.matrix if isinstance(H, ChannelDraw) else np.asarray(H, dtype=complex)
    if snr < 0:
        raise ValueError("snr must be >= 0")
    S = h.shape[1] if S is None else S
    return max(float(kernels.capacity_batch(h[None], snr / S)[0]), 0.0)


def effective_snr(rho0: float, inv_xpd: float) -> float:
    if rho0 < 0 or inv_xpd < 0:
        raise ValueError("rho0 and inv_xpd must be >= 0")
    return rho0 / (1.0 + inv_xpd)


def select_inv_xpd(depol: Optional[DepolarizationStats], rule: str) -> float:
    """Which E[1/XPD] feeds the SNR reduction: 'v', 'h', their 'mean', or 'none'."""
    if rule not in XPD_RULES:
        raise ValueError(f"xpd rule must be one of {XPD_RULES}, got {rule!r}")
    if depol is None or rule == "none":
        return 0.0
    if rule == "v":
        return depol.inv_xpd_v
    if rule == "h":
        return depol.inv_xpd_h
    return 0.5 * (depol.inv_xpd_v + depol.inv_xpd_h)


def default_xpd_rule(polarization_label: str) -> str:
    return "v" if polarization_label.upper() == "VV" else "mean"


def capacity_samples(R, U: int, S: int, snr: float, n_draws: int, rng: np.random.Generator) -> np.ndarray:
    """Instantaneous capacities of ``n_draws`` channel draws.

    Draw blocks of :data:`BLOCK` use the spawned child streams of ``rng`` in order.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    root = matrix_sqrt_psd(R)
    n_blocks = -(-n_draws // BLOCK)
    out = np.empty(n_draws)
    for b, child in enumerate(rng.spawn(n_blocks)):
        lo = b * BLOCK
        hi = min(lo + BLOCK, n_draws)
        h = realize_channels(R, U, S, child, hi - lo, sqrt_r=root)
        out[lo:hi] = kernels.capacity_batch(h, snr / S)
    return np.maximum(out, 0.0)


def ergodic_capacity(R, U: int, S: int, rho0: float, depol: Optional[DepolarizationStats],
                     n_draws: int, rng: np.random.Generator, xpd_rule: str = "v") -> CapacityStats:
    snr = effective_snr(rho0, select_inv_xpd(depol, xpd_rule))
    c = capacity_samples(R, U, S, snr, n_draws, rng)
    se = float(np.std(c, ddof=1) / math.sqrt(n_draws)) if n_draws > 1 else 0.0
    return CapacityStats(float(np.mean(c)), se, n_draws)
