import csv
import io
import math
from dataclasses import replace

import numpy as np
import pytest
import yaml

from gbsm import cli
from gbsm.config import builtin_scenario, serialize_scenario
from gbsm.experiments import (aoa_density, cross_validate, run_aoa_map, run_capacity_sweep, run_motion_demo,
                              run_stcf_sweep, to_csv)
from gbsm.motion import MotionPathSpec
from gbsm.quadrature import QuadratureSettings

D = math.radians


@pytest.fixture(scope="module")
def default():
    return builtin_scenario("default")


def _rows(header, rows):
    return list(csv.DictReader(io.StringIO(to_csv(header, rows))))


def test_stcf_sweep_cardinality_and_columns(default):
    h, rows = run_stcf_sweep(default, [1.0], polarizations=["VV", "VH", "SLANT45"])
    assert len(rows) == 3 and [r[3] for r in rows] == ["VV", "VH", "SLANT45"]
    assert h[:5] == ["time_s", "tx_spacing_wl", "rx_spacing_wl", "polarization", "mean_corr"]
    assert len(h) == 5 + 6
    for r in rows:
        assert math.isclose(r[4], np.mean(r[5:]))


def test_stcf_sweep_orderings(default):
    _, rows = run_stcf_sweep(default, [0.0, 2.0], rx_spacings=[0.1, 1.0])
    by = {(r[0], r[2]): r[4] for r in rows}
    assert by[(2.0, 0.1)] > by[(0.0, 0.1)]
    assert by[(2.0, 1.0)] < by[(2.0, 0.1)]


def test_capacity_sweep(default):
    h, rows = run_capacity_sweep(default, [2.0], [10.0, 20.0], ["VV", "VH"], n_draws=2000)
    assert h == ["time_s", "snr_db", "polarization", "ergodic_capacity_bpshz", "std_error"]
    cap = {(r[2], r[1]): r[3] for r in rows}
    assert cap[("VH", 10.0)] >= cap[("VV", 10.0)]
    assert cap[("VV", 20.0)] > cap[("VV", 10.0)] and cap[("VH", 20.0)] > cap[("VH", 10.0)]


def test_capacity_zero_snr(default):
    _, rows = run_capacity_sweep(default, [0.0, 1.0], [-math.inf], n_draws=100)
    assert all(r[3] == 0.0 for r in rows)


def _argmax_deg(cfg, t, trajectories=None):
    dens = aoa_density(cfg, t, (181, 360), trajectories)
    i, j = np.unravel_index(np.argmax(dens), dens.shape)
    return i * 1.0, j * 1.0


def test_aoa_peak_at_dominant_cluster(default):
    assert _argmax_deg(default, 0.0) == (90.0, 330.0)
    h, rows = run_aoa_map(default, [0.0], (19, 36))
    assert h == ["time_s", "elevation_deg", "azimuth_deg", "density"] and len(rows) == 19 * 36
    with pytest.raises(ValueError):
        run_aoa_map(default, [0.0], (8, 36))


def test_aoa_peak_follows_drift(default):
    paths = tuple(MotionPathSpec(c.mean, angular_rates=(D(45), D(-45)), segments=100, dt=0.05)
                  for c in default.rx_mixture)
    cfg = replace(default, cluster_paths=paths)
    h, rows = run_aoa_map(cfg, [1.0])
    top = max(rows, key=lambda r: r[3])
    assert abs(top[1] - 135) <= 3 and abs(top[2] - 285) <= 3


def test_aoa_peak_decays_under_brownian_motion():
    cfg = builtin_scenario("brownian")
    _, rows = run_aoa_map(cfg, [0.0, 5.0], (91, 180), trajectory_draws=32)
    peak = {t: max(r[3] for r in rows if r[0] == t) for t in (0.0, 5.0)}
    assert peak[5.0] < peak[0.0]


def test_motion_demo():
    cfg = builtin_scenario("brownian")
    h, rows = run_motion_demo(cfg, 3)
    assert h == ["path_id", "time_s", "elevation_deg", "azimuth_deg"]
    p0 = [r for r in rows if r[0] == 0]
    assert p0[0][1] == 0.0 and np.allclose(p0[0][2:], (90, 330))
    at1 = next(r for r in p0 if math.isclose(r[1], 1.0))
    assert math.isclose(at1[2], 135.0)
    assert {r[0] for r in rows} == {0, 1, 2, 3}
    assert to_csv(h, rows) == to_csv(*run_motion_demo(cfg, 3))
    with pytest.raises(ValueError):
        run_motion_demo(cfg, 0)


def test_motion_demo_static_scenario_uses_drift_demo(default):
    _, rows = run_motion_demo(default, 1)
    at1 = next(r for r in rows if r[0] == 0 and math.isclose(r[1], 1.0))
    assert math.isclose(at1[2], 135.0)


def test_cross_validate(default):
    rep = cross_validate(default, 1_000_000)
    assert len(rep.rows) == 16 and rep.passed
    coarse = replace(default, quadrature=QuadratureSettings(4, 128, adaptive=False))
    bad = cross_validate(coarse, 1_000_000)
    assert not bad.passed and any(r[-1] == "FAIL" for r in bad.rows)
    with pytest.raises(ValueError):
        cross_validate(default, 5000)


def test_csv_format():
    text = to_csv(["a", "b", "c"], [[1, 0.1 + 0.2, "x"], [2, 1e-20, "y"]])
    assert text == "a,b,c\n1,0.3,x\n2,1e-20,y\n"


# -- CLI ------------------------------------------------------------------------

def test_cli_validate(capsys):
    assert cli.main(["validate"]) == 0
    assert "valid" in capsys.readouterr().out


def test_cli_invalid_scenario(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("wavelength_m: 0.3\nrx: {mixture: [{mean_deg: [90, 0], kappa: -2, weight: 1}]}\n")
    assert cli.main(["validate", "--scenario", str(p)]) == 1
    assert "rx.mixture[0].kappa" in capsys.readouterr().err
    assert cli.main(["validate", "--scenario", str(tmp_path / "missing.yaml")]) == 1


def test_cli_quadrature_failure(tmp_path):
    doc = yaml.safe_load(serialize_scenario(builtin_scenario("default")))
    doc["quadrature"] = {"n_polar": 2, "n_azimuth": 2, "rtol": 1e-12, "max_doublings": 1}
    p = tmp_path / "q.yaml"
    p.write_text(yaml.safe_dump(doc))
    assert cli.main(["stcf", "--scenario", str(p), "--out", str(tmp_path), "--times", "0"]) == 2


def test_cli_cross_validate_exit_codes(tmp_path):
    assert cli.main(["cross-validate", "--out", str(tmp_path), "--n-scatterers", "200000"]) == 0
    doc = yaml.safe_load(serialize_scenario(builtin_scenario("default")))
    doc["quadrature"] = {"n_polar": 4, "n_azimuth": 128, "adaptive": False}
    p = tmp_path / "coarse.yaml"
    p.write_text(yaml.safe_dump(doc))
    assert cli.main(["cross-validate", "--scenario", str(p), "--out", str(tmp_path)]) == 3
    rows = list(csv.DictReader(open(tmp_path / "cross_validation.csv")))
    assert len(rows) == 16 and any(r["status"] == "FAIL" for r in rows)


def test_cli_outputs(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["stcf", "--out", str(out), "--times", "0,2", "--spacings", "0.1,1",
                     "--polarizations", "VV,VH"]) == 0
    assert cli.main(["capacity", "--out", str(out), "--times", "2", "--snrs", "10,20", "--draws", "500"]) == 0
    assert cli.main(["aoa-map", "--out", str(out), "--times", "0", "--resolution", "19x36"]) == 0
    assert cli.main(["motion-demo", "--out", str(out), "--scenario", "builtin:brownian", "--n-paths", "2"]) == 0
    for name, n in [("stcf.csv", 8), ("capacity.csv", 2), ("aoa_map.csv", 19 * 36), ("motion_demo.csv", 303)]:
        lines = (out / name).read_text().splitlines()
        assert len(lines) == n + 1


def test_cli_seed_override_changes_capacity(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["capacity", "--out", str(a), "--times", "0", "--draws", "500"])
    cli.main(["capacity", "--out", str(b), "--times", "0", "--draws", "500", "--seed", "7"])
    assert (a / "capacity.csv").read_text() != (b / "capacity.csv").read_text()


def test_cli_bad_arguments(tmp_path):
    assert cli.main(["stcf", "--out", str(tmp_path), "--polarizations", "XX"]) == 1
    assert cli.main(["stcf", "--out", str(tmp_path), "--workers", "0"]) == 1
    with pytest.raises(SystemExit) as err:
        cli.main(["stcf", "--times", "a,b"])
    assert err.value.code == 1
