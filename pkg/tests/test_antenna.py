import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gbsm.antenna import PolarizationConfig, element_patterns, field_pattern_h, field_pattern_v, preset_config
from gbsm.geometry import UnitDirection, unit_vectors


def test_vertical_dipole_broadside_and_null():
    for az in (0.0, 1.3, 5.0):
        assert math.isclose(field_pattern_v(UnitDirection(math.pi / 2, az), 0.0), 1.0)
    assert field_pattern_v(UnitDirection(0.0, 0.0), 0.0) == 0.0
    assert field_pattern_v(UnitDirection(1e-8, 0.0), 0.0) < 1e-7


@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi))
def test_vertical_dipole_has_no_horizontal_part(el, az):
    assert field_pattern_h(UnitDirection(el, az), 0.0) == 0.0


def test_horizontal_pattern_substitution():
    assert math.isclose(field_pattern_h(UnitDirection(math.pi / 2, math.pi / 2), math.pi / 2), 1.0)


def test_patterns_continuous_near_dipole_axis():
    # approach the tilted dipole axis (xi -> 1) and compare with the closed form evaluated in long double
    tilt = math.pi / 4
    axis_el = math.pi / 2 - tilt
    el = axis_el + np.linspace(-1e-4, 1e-4, 2001)
    d = unit_vectors(el, np.zeros_like(el))
    pats = element_patterns(d, [tilt])
    st_, ct = np.sin(el).astype(np.longdouble), np.cos(el).astype(np.longdouble)
    sg, cg = np.longdouble(math.sin(tilt)), np.longdouble(math.cos(tilt))
    xi = st_ * sg + ct * cg
    e = 1 - xi
    f = np.where(e > 0, np.sin(np.pi * e / 2) / np.where(e > 0, e, 1) / (1 + xi), np.pi / 4)
    want = np.abs((ct * sg - st_ * cg) * f).astype(float)
    assert np.max(np.abs(pats[0, :, 0] - want)) < 1e-6
    assert np.all(np.isfinite(pats))


def test_element_patterns_match_scalar():
    r = np.random.default_rng(0)
    el, az = r.uniform(0, math.pi, 50), r.uniform(0, 2 * math.pi, 50)
    tilts = [0.0, 0.7, math.pi / 2]
    p = element_patterns(unit_vectors(el, az), tilts)
    for k in range(50):
        d = UnitDirection(el[k], az[k])
        for i, t in enumerate(tilts):
            assert math.isclose(p[0, k, i], field_pattern_v(d, t), abs_tol=1e-12)
            assert math.isclose(p[1, k, i], field_pattern_h(d, t), abs_tol=1e-12)


def test_presets():
    assert preset_config("VV").tx_tilts == (0.0, 0.0)
    vh = preset_config("VH")
    assert vh.tx_tilts == vh.rx_tilts == (0.0, math.pi / 2)
    sl = preset_config("SLANT45")
    assert sl.tx_tilts == sl.rx_tilts == (math.pi / 4, -math.pi / 4)
    with pytest.raises(ValueError):
        preset_config("HH")
    with pytest.raises(ValueError):
        preset_config("VV", 3, 2)


def test_custom_config_size_check():
    c = PolarizationConfig((0.0,), (0.0, 1.0))
    c.check_sizes(1, 2)
    with pytest.raises(ValueError):
        c.check_sizes(2, 2)
    with pytest.raises(ValueError):
        PolarizationConfig((float("nan"),), (0.0,))
