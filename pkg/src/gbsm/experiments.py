"""Batch drivers that turn a scenario into CSV datasets.

Every driver returns ``(header, rows)``. Random streams are keyed on
(scenario seed, driver, time) so a row never depends on which other rows were
requested or on how many workers computed them.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .antenna import PolarizationConfig, preset_config
from .config import ScenarioConfig
from .directional import mixture_density, translate_mixture
from .motion import MotionPathSpec, motion_path, trajectory_bundle, wrap_angles
from .realization import ergodic_capacity
from .stcf import (cluster_trajectories, correlation_matrix, mean_correlation, snapshots_at,
                   stcf_monte_carlo, stcf_over_time)

STCF_KEY, CAPACITY_KEY, AOA_KEY, MOTION_KEY, XVAL_KEY = 1, 2, 3, 4, 5
FLOAT_FORMAT = ".12g"


def derived_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys)))


def _time_key(t: float) -> int:
    return int(round(t * 1e6))


def resolve_polarizations(cfg: ScenarioConfig, names: Optional[Sequence] = None) -> list[PolarizationConfig]:
    if not names:
        return [cfg.polarization]
    out = []
    for n in names:
        if isinstance(n, PolarizationConfig):
            out.append(n)
        else:
            out.append(preset_config(n, cfg.tx_array.num_elements, cfg.rx_array.num_elements))
    return out


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _trajectories(cfg: ScenarioConfig, draws: Optional[int] = None):
    random_paths = any(not p.is_deterministic for p in cfg.cluster_paths)
    n = (draws or cfg.n_trajectory_draws) if random_paths else 1
    return cluster_trajectories(cfg, derived_rng(cfg.seed, STCF_KEY), n)


def _entry_columns(n: int) -> list[str]:
    return [f"abs_r_{i}_{j}" for i in range(n) for j in range(i + 1, n)]


def run_stcf_sweep(cfg: ScenarioConfig, times: Sequence[float], rx_spacings: Optional[Sequence[float]] = None,
                   tx_spacings: Optional[Sequence[float]] = None, polarizations=None,
                   trajectory_draws: Optional[int] = None, workers: int = 1):
    times = sorted(float(t) for t in times)
    rx_spacings = sorted(rx_spacings) if rx_spacings else [cfg.rx_array.spacing]
    tx_spacings = sorted(tx_spacings) if tx_spacings else [cfg.tx_array.spacing]
    pols = resolve_polarizations(cfg, polarizations)
    trajs = _trajectories(cfg, trajectory_draws)
    n = cfg.tx_array.num_elements * cfg.rx_array.num_elements
    iu = np.triu_indices(n, 1)

    items = [(pol, ts, rs) for pol in pols for ts in tx_spacings for rs in rx_spacings]

    def work(item):
        pol, ts, rs = item
        return stcf_over_time(cfg, times, polarization=pol, tx_spacing=ts, rx_spacing=rs, trajectories=trajs)

    header = ["time_s", "tx_spacing_wl", "rx_spacing_wl", "polarization", "mean_corr"] + _entry_columns(n)
    rows = []
    for (pol, ts, rs), mats in zip(items, _map(work, items, workers)):
        for t, R in zip(times, mats):
            rows.append([t, ts, rs, pol.label, mean_correlation(R)] + list(np.abs(R.entries[iu])))
    return header, rows


def run_capacity_sweep(cfg: ScenarioConfig, times: Sequence[float], snr_db_list: Sequence[float],
                       polarizations=None, n_draws: Optional[int] = None,
                       trajectory_draws: Optional[int] = None, workers: int = 1):
    times = sorted(float(t) for t in times)
    snrs = sorted(float(s) for s in snr_db_list)
    pols = resolve_polarizations(cfg, polarizations)
    trajs = _trajectories(cfg, trajectory_draws)
    n_draws = n_draws or cfg.n_channel_draws
    U, S = cfg.rx_array.num_elements, cfg.tx_array.num_elements

    def work(pol):
        mats = stcf_over_time(cfg, times, polarization=pol, trajectories=trajs)
        out = []
        for t, R in zip(times, mats):
            for snr in snrs:
                # same channel draws for every SNR and polarization at a given time
                rng = derived_rng(cfg.seed, CAPACITY_KEY, _time_key(t))
                stats = ergodic_capacity(R, U, S, 10.0 ** (snr / 10.0), cfg.depol, n_draws, rng,
                                         xpd_rule=cfg.xpd_rule(pol))
                out.append([t, snr, pol.label, stats.mean, stats.std_error])
        return out

    header = ["time_s", "snr_db", "polarization", "ergodic_capacity_bpshz", "std_error"]
    rows = [r for block in _map(work, pols, workers) for r in block]
    return header, rows


def aoa_grid(resolution: tuple[int, int]):
    n_el, n_az = resolution
    if n_el < 16 or n_az < 16:
        raise ValueError(f"grid resolution must be at least 16x16, got {n_el}x{n_az}")
    el = np.linspace(0.0, 180.0, n_el)
    az = np.arange(n_az) * (360.0 / n_az)
    return el, az


def aoa_density(cfg: ScenarioConfig, t: float, resolution=(181, 360), trajectories=None) -> np.ndarray:
    """Receive mixture density on the (elevation, azimuth) degree grid at time ``t``."""
    el, az = aoa_grid(resolution)
    E, A = np.meshgrid(np.radians(el), np.radians(az), indexing="ij")
    if trajectories is None:
        return mixture_density(E, A, cfg.rx_mixture)
    acc = np.zeros_like(E)
    for bundle in trajectories:
        mix = translate_mixture(cfg.rx_mixture, [tr.direction_at(t) for tr in bundle])
        acc += mixture_density(E, A, mix)
    return acc / len(trajectories)


def run_aoa_map(cfg: ScenarioConfig, times: Sequence[float], grid_resolution=(181, 360),
                trajectory_draws: Optional[int] = None):
    times = sorted(float(t) for t in times)
    el, az = aoa_grid(grid_resolution)
    trajs = _trajectories(cfg, trajectory_draws)
    rows = []
    for t in times:
        dens = aoa_density(cfg, t, grid_resolution, trajs)
        for i, e in enumerate(el):
            for j, a in enumerate(az):
                rows.append([t, e, a, dens[i, j]])
    return ["time_s", "elevation_deg", "azimuth_deg", "density"], rows


def demo_path_spec(cfg: ScenarioConfig) -> MotionPathSpec:
    """Path of the heaviest receive cluster, or a drift-only demo path if clusters are static."""
    q = int(np.argmax(cfg.rx_mixture.weights))
    if cfg.cluster_paths:
        return cfg.cluster_paths[q]
    return MotionPathSpec(cfg.rx_mixture.components[q].mean, angular_rates=(math.radians(45.0), 0.0),
                          sigmas=(math.radians(2.0), math.radians(2.0)), segments=100, dt=0.05)


def run_motion_demo(cfg: ScenarioConfig, n_paths: int):
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    spec = demo_path_spec(cfg)
    paths = [motion_path(replace(spec, sigmas=(0.0, 0.0)))]
    paths += trajectory_bundle(spec, derived_rng(cfg.seed, MOTION_KEY), n_paths)
    rows = []
    for pid, tr in enumerate(paths):
        el, az = wrap_angles(tr.raw_elevation, tr.raw_azimuth)
        for t, e, a in zip(tr.times, np.degrees(el), np.degrees(az)):
            rows.append([pid, t, e, a])
    return ["path_id", "time_s", "elevation_deg", "azimuth_deg"], rows


@dataclass
class CrossValidationReport:
    header: list
    rows: list
    passed: bool


def cross_validate(cfg: ScenarioConfig, n_scatterers: int, t: float = 0.0, polarization=None,
                   n_sigma: float = 3.0) -> CrossValidationReport:
    """Compare every quadrature correlation entry with the scatterer Monte Carlo estimate."""
    if n_scatterers < 10_000:
        raise ValueError("n_scatterers must be >= 10^4")
    pol = resolve_polarizations(cfg, [polarization] if polarization else None)[0]
    means = None
    if cfg.cluster_paths:
        means = [motion_path(replace(p, sigmas=(0.0, 0.0))).direction_at(t) for p in cfg.cluster_paths]
    tx, rx = snapshots_at(cfg, t, pol, means)
    quad = correlation_matrix(tx, rx, cfg.depol, cfg.wavelength, cfg.quadrature).entries
    mc, se = stcf_monte_carlo(tx, rx, cfg.depol, cfg.wavelength, n_scatterers,
                              derived_rng(cfg.seed, XVAL_KEY))
    rows = []
    ok = True
    n = quad.shape[0]
    for i in range(n):
        for j in range(n):
            diff = abs(quad[i, j] - mc[i, j])
            good = bool(diff <= n_sigma * se[i, j] + 1e-12)
            ok &= good
            rows.append([i, j, quad[i, j].real, quad[i, j].imag, mc[i, j].real, mc[i, j].imag,
                         se[i, j], diff, "pass" if good else "FAIL"])
    header = ["i", "j", "quad_re", "quad_im", "mc_re", "mc_im", "std_error", "abs_diff", "status"]
    return CrossValidationReport(header, rows, ok)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), FLOAT_FORMAT)
    return str(v)


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv(header, rows))
