import math
from dataclasses import replace

import numpy as np
import pytest

from gbsm.antenna import element_patterns, preset_config
from gbsm.config import builtin_scenario
from gbsm.directional import VmfComponent, VmfMixture, mixture_density, sample_mixture_vectors
from gbsm.geometry import ArrayGeometry, RadialMotion, UnitDirection, element_offset, unit_vectors
from gbsm.motion import MotionPathSpec
from gbsm.quadrature import QuadratureSettings, product_grid
from gbsm.stcf import (CorrelationMatrix, DegenerateCorrelationError, DepolarizationStats, QuadratureError,
                       SideSnapshot, correlation_entry, correlation_matrix, mean_correlation, psd_repair,
                       side_integral, stcf_monte_carlo, stcf_over_time, xpd_from_db)

LAM = 0.3
D = math.radians
DEPOL = DepolarizationStats.from_db(9, 9, 2)


def side(mix, radius=2.0, spacing=0.1, tilts=(0.0, 0.0), orient=(90, 0), anchor="first"):
    g = ArrayGeometry(len(tilts), spacing, UnitDirection(D(orient[0]), D(orient[1])), anchor=anchor)
    return SideSnapshot(mix, radius, g, tilts)


def one_cluster(kappa, el=90, az=0):
    return VmfMixture.single(UnitDirection(D(el), D(az)), kappa)


TWO_CLUSTERS = VmfMixture([VmfComponent(UnitDirection(D(80), D(40)), 6.0, 0.6),
                           VmfComponent(UnitDirection(D(120), D(250)), 20.0, 0.4)])


def test_xpd_conversion():
    assert math.isclose(xpd_from_db(9), 0.12589254117941673)
    assert xpd_from_db(0) == 1.0
    assert math.isclose(xpd_from_db(2), 0.6309573444801932)
    d = DepolarizationStats.from_db(9, 9, 2)
    assert np.allclose(d.term_weights(), [1, 0.125892541, 0.125892541 * 0.630957344, 0.630957344])
    with pytest.raises(ValueError):
        DepolarizationStats(inv_cpr=0.0)


def test_isotropic_self_term_is_one():
    s = side(TWO_CLUSTERS)
    for m in range(2):
        assert abs(side_integral(s, "iso", m, m, LAM) - 1.0) < 1e-6


def test_swap_gives_conjugate():
    s = side(TWO_CLUSTERS, tilts=(0.3, 1.2))
    for pol in ("v", "h", "iso"):
        a, b = side_integral(s, pol, 0, 1, LAM), side_integral(s, pol, 1, 0, LAM)
        assert abs(a - b.conjugate()) < 1e-10
    with pytest.raises(IndexError):
        side_integral(s, "v", 0, 2, LAM)


def _brute_force(s, pol, m, n, n_el=600, n_az=1200):
    # global (elevation, azimuth) product grid, phase built from element offsets directly
    E, A, W = product_grid(n_el, n_az)
    dirs = unit_vectors(E.ravel(), A.ravel())
    dens = mixture_density(E, A, s.mixture).ravel()
    pats = element_patterns(dirs, s.tilts)[{"v": 0, "h": 1}[pol]]
    k0 = 2 * math.pi / LAM
    xm = dirs @ element_offset(s.geometry, m, LAM)
    xn = dirs @ element_offset(s.geometry, n, LAM)
    dmn = (xn - xm) * (1 + (xn + xm) / (2 * s.radius))
    return complex(np.sum(W.ravel() * dens * pats[:, m] * pats[:, n] * np.exp(-1j * k0 * dmn)))


@pytest.mark.parametrize("mix", [one_cluster(1.0), one_cluster(10.0, 60, 200), TWO_CLUSTERS])
@pytest.mark.parametrize("pol", ["v", "h"])
def test_side_integral_matches_global_grid(mix, pol):
    s = side(mix, radius=10.0, spacing=0.7, tilts=(0.4, -0.9), orient=(70, 30))
    want = _brute_force(s, pol, 0, 1)
    # default rule honours its 1e-4 refinement tolerance; a tighter rule gets much closer
    assert abs(side_integral(s, pol, 0, 1, LAM) - want) < 1e-4
    tight = QuadratureSettings(1024, 1024, adaptive=False)
    assert abs(side_integral(s, pol, 0, 1, LAM, tight) - want) < 1e-6


def test_side_integral_matches_scatterer_sum():
    s = side(one_cluster(10.0), spacing=0.5)
    n = 1_000_000
    d = sample_mixture_vectors(s.mixture, np.random.default_rng(8), n)
    pats = element_patterns(d, s.tilts)[0]
    k0 = 2 * math.pi / LAM
    x0, x1 = d @ element_offset(s.geometry, 0, LAM), d @ element_offset(s.geometry, 1, LAM)
    y = pats[:, 0] * pats[:, 1] * np.exp(-1j * k0 * (x1 - x0) * (1 + (x1 + x0) / (2 * s.radius)))
    mc, se = y.mean(), math.sqrt((y.real.var() + y.imag.var()) / n)
    assert abs(side_integral(s, "v", 0, 1, LAM) - mc) < 3 * se


def test_non_convergence_raises_with_estimates():
    s = side(one_cluster(0.01), radius=50.0, spacing=30.0)
    with pytest.raises(QuadratureError) as err:
        side_integral(s, "v", 0, 1, LAM, QuadratureSettings(2, 2, rtol=1e-12, max_doublings=1))
    prev, cur = err.value.estimates
    assert prev.shape == cur.shape == (3, 2, 2)
    assert not np.allclose(prev, cur)
    assert "tolerance" in str(err.value)


def test_correlation_entry_identities():
    tx, rx = side(one_cluster(10.0)), side(TWO_CLUSTERS, tilts=(D(45), D(-45)))
    assert correlation_entry(1, 0, 1, 0, tx, rx, DEPOL, LAM) == 1.0
    a = correlation_entry(0, 0, 1, 1, tx, rx, DEPOL, LAM)
    b = correlation_entry(1, 1, 0, 0, tx, rx, DEPOL, LAM)
    assert abs(a - b.conjugate()) < 1e-12
    R = correlation_matrix(tx, rx, DEPOL, LAM)
    assert abs(R.entry(0, 0, 1, 1) - a) < 1e-12


def test_degenerate_power_raises():
    tx, rx = side(one_cluster(1.0)), side(one_cluster(1.0))
    zero = np.zeros((3, 2, 2), dtype=complex)
    with pytest.raises(DegenerateCorrelationError):
        correlation_matrix(tx, rx, DEPOL, LAM, grams=(zero, zero))


@pytest.mark.parametrize("pol", ["VV", "VH", "SLANT45"])
def test_matrix_contract(pol):
    c = preset_config(pol)
    tx = side(one_cluster(10.0), tilts=c.tx_tilts)
    rx = side(TWO_CLUSTERS, tilts=c.rx_tilts, spacing=0.5)
    R = correlation_matrix(tx, rx, DEPOL, LAM).entries
    assert np.allclose(np.diag(R), 1.0, atol=1e-10)
    assert np.allclose(R, R.conj().T, atol=1e-10)
    assert np.linalg.eigvalsh(R).min() >= -1e-12


def test_wide_spacing_broad_mixture_decorrelates():
    tx = side(one_cluster(0.01), radius=100.0, spacing=10.0)
    rx = side(one_cluster(0.01), radius=100.0, spacing=10.0)
    R = correlation_matrix(tx, rx, DepolarizationStats(), LAM).entries
    off = np.abs(R[~np.eye(4, dtype=bool)])
    assert off.max() < 0.1


def test_psd_repair_projects():
    a = np.array([[1, 0.9, 0.9], [0.9, 1, -0.9], [0.9, -0.9, 1]], dtype=complex)
    assert np.linalg.eigvalsh(a).min() < 0
    b = psd_repair(a)
    assert np.linalg.eigvalsh(b).min() >= -1e-12
    assert np.allclose(np.diag(b), 1.0)
    good = np.eye(3, dtype=complex)
    assert np.array_equal(psd_repair(good), good)


def test_mean_correlation_examples():
    assert mean_correlation(np.eye(4)) == 0.0
    assert mean_correlation(np.ones((4, 4))) == 1.0
    a = np.full((4, 4), 0.5 * np.exp(0.3j))
    np.fill_diagonal(a, 1.0)
    assert math.isclose(mean_correlation(a), 0.5)
    with pytest.raises(ValueError):
        mean_correlation(np.ones((1, 1)))


@pytest.mark.parametrize("mix", [one_cluster(1.0), TWO_CLUSTERS])
def test_matrix_matches_monte_carlo(mix):
    c = preset_config("SLANT45")
    tx = side(one_cluster(10.0), tilts=c.tx_tilts, spacing=0.3)
    rx = side(mix, tilts=c.rx_tilts, spacing=0.4)
    R = correlation_matrix(tx, rx, DEPOL, LAM).entries
    est, se = stcf_monte_carlo(tx, rx, DEPOL, LAM, 1_000_000, np.random.default_rng(21))
    assert np.all(np.abs(R - est) <= 3 * se + 1e-12)
    assert np.array_equal(np.diag(est), np.ones(4)) and np.all(np.diag(se) == 0)


def test_monte_carlo_error_scaling():
    tx, rx = side(one_cluster(3.0)), side(TWO_CLUSTERS, spacing=0.5)
    _, s1 = stcf_monte_carlo(tx, rx, DEPOL, LAM, 100_000, np.random.default_rng(1))
    _, s2 = stcf_monte_carlo(tx, rx, DEPOL, LAM, 200_000, np.random.default_rng(2))
    off = ~np.eye(4, dtype=bool)
    ratio = np.median(s2[off] / s1[off])
    assert abs(ratio - 1 / math.sqrt(2)) < 0.05
    with pytest.raises(ValueError):
        stcf_monte_carlo(tx, rx, DEPOL, LAM, 10, np.random.default_rng(1))


def _static_cfg():
    cfg = builtin_scenario("default")
    return replace(cfg, tx_motion=RadialMotion(1.0, 0.0), rx_motion=RadialMotion(1.0, 0.0))


def test_static_scene_is_time_constant():
    mats = stcf_over_time(_static_cfg(), [0.0, 1.0, 3.0])
    assert np.array_equal(mats[0].entries, mats[1].entries)
    assert np.array_equal(mats[0].entries, mats[2].entries)


def test_deterministic_paths_ignore_draw_count():
    cfg = _static_cfg()
    paths = tuple(MotionPathSpec(c.mean, angular_rates=(D(10), D(-5)), segments=20, dt=0.1)
                  for c in cfg.rx_mixture)
    cfg = replace(cfg, cluster_paths=paths)
    a = stcf_over_time(cfg, [0.5, 1.5], trajectory_draws=1)
    b = stcf_over_time(cfg, [0.5, 1.5], trajectory_draws=7)
    for x, y in zip(a, b):
        assert np.array_equal(x.entries, y.entries)
    assert not np.allclose(a[0].entries, a[1].entries)
    with pytest.raises(ValueError):
        stcf_over_time(cfg, [2.5])


def test_receding_single_cluster_gains_correlation():
    cfg = builtin_scenario("default")
    cfg = replace(cfg, rx_mixture=one_cluster(10.0, 90, 330))
    r0, r2 = stcf_over_time(cfg, [0.0, 2.0])
    assert mean_correlation(r2) > mean_correlation(r0)


def test_correlation_matrix_index_layout():
    R = CorrelationMatrix(np.arange(16, dtype=complex).reshape(4, 4), 2, 2)
    assert R.index(1, 0) == 1 and R.index(0, 1) == 2
    assert R.entry(1, 0, 0, 1) == 6
