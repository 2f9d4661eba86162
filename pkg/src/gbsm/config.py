"""Scenario documents (YAML) and their validated in-memory form.

All angles in the document are degrees, dB quantities carry a ``_db`` suffix,
lengths are metres and array spacings are in wavelengths. See
``docs/scenario.md`` for the full schema.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Any, Optional

import yaml

from .antenna import PolarizationConfig, preset_config
from .directional import VmfComponent, VmfMixture
from .geometry import ANCHORS, ArrayGeometry, RadialMotion, UnitDirection
from .motion import MotionPathSpec
from .quadrature import QuadratureSettings
from .realization import XPD_RULES, default_xpd_rule
from .stcf import DepolarizationStats, xpd_from_db

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_SEED = 20240611
DEFAULT_SPACING_WL = 0.1
DEFAULT_RADIUS_M = 1.0
DEFAULT_SNR_DB = 10.0
DEFAULT_XPD_DB = 9.0
DEFAULT_CPR_DB = 2.0
DEFAULT_CHANNEL_DRAWS = 10_000
DEFAULT_TRAJECTORY_DRAWS = 16

# single transmit cluster at (90, 0) deg with kappa 10
DEFAULT_TX_MIXTURE = [{"mean_deg": [90.0, 0.0], "kappa": 10.0, "weight": 1.0}]

# Hand-made ten-cluster receive mixture. The dominant cluster sits at (90, 330) deg
# so the density peak matches the published AoA map; the rest are placeholders.
DEFAULT_RX_MIXTURE = [
    {"mean_deg": [90.0, 330.0], "kappa": 20.0, "weight": 0.25},
    {"mean_deg": [80.0, 30.0], "kappa": 10.0, "weight": 0.12},
    {"mean_deg": [100.0, 75.0], "kappa": 15.0, "weight": 0.08},
    {"mean_deg": [70.0, 120.0], "kappa": 8.0, "weight": 0.10},
    {"mean_deg": [95.0, 160.0], "kappa": 30.0, "weight": 0.07},
    {"mean_deg": [110.0, 200.0], "kappa": 12.0, "weight": 0.09},
    {"mean_deg": [85.0, 240.0], "kappa": 50.0, "weight": 0.06},
    {"mean_deg": [60.0, 280.0], "kappa": 6.0, "weight": 0.08},
    {"mean_deg": [130.0, 20.0], "kappa": 25.0, "weight": 0.07},
    {"mean_deg": [75.0, 180.0], "kappa": 5.0, "weight": 0.08},
]


class ScenarioError(ValueError):
    """A scenario document violates the schema; the message names the field."""


@dataclass(frozen=True)
class ScenarioConfig:
    wavelength: float
    tx_array: ArrayGeometry
    rx_array: ArrayGeometry
    tx_motion: RadialMotion
    rx_motion: RadialMotion
    tx_mixture: VmfMixture
    rx_mixture: VmfMixture
    polarization: PolarizationConfig
    depol_db: tuple[float, float, float] = (DEFAULT_XPD_DB, DEFAULT_XPD_DB, DEFAULT_CPR_DB)
    snr_db: float = DEFAULT_SNR_DB
    xpd_for_snr: str = "auto"
    n_channel_draws: int = DEFAULT_CHANNEL_DRAWS
    n_trajectory_draws: int = DEFAULT_TRAJECTORY_DRAWS
    seed: int = DEFAULT_SEED
    cluster_paths: tuple[MotionPathSpec, ...] = ()
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    name: str = "scenario"

    @property
    def depol(self) -> DepolarizationStats:
        return DepolarizationStats.from_db(*self.depol_db)

    @property
    def rho0(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)

    def xpd_rule(self, polarization: Optional[PolarizationConfig] = None) -> str:
        if self.xpd_for_snr != "auto":
            return self.xpd_for_snr
        return default_xpd_rule((polarization or self.polarization).label)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        return _to_document(self)


# -- parsing ------------------------------------------------------------------

def _get(doc: dict, key: str, path: str, default=None, required: bool = False):
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: expected a mapping, got {type(doc).__name__}")
    if key not in doc or doc[key] is None:
        if required:
            raise ScenarioError(f"{path}.{key}: required field is missing".lstrip("."))
        return default
    return doc[key]


def _number(value, path: str, *, minimum=None, exclusive=False, integer=False) -> float:
    if isinstance(value, str):
        # YAML 1.1 reads exponents without a sign (1e9) as strings
        try:
            value = float(value) if not integer else int(float(value))
        except ValueError:
            raise ScenarioError(f"{path}: expected a number, got {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ScenarioError(f"{path}: must be finite, got {value!r}")
    if integer and int(value) != value:
        raise ScenarioError(f"{path}: must be an integer, got {value!r}")
    if minimum is not None:
        if exclusive and not value > minimum:
            raise ScenarioError(f"{path}: must be > {minimum}, got {value!r}")
        if not exclusive and not value >= minimum:
            raise ScenarioError(f"{path}: must be >= {minimum}, got {value!r}")
    return int(value) if integer else float(value)


def _flag(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise ScenarioError(f"{path}: expected true or false, got {value!r}")
    return value


def _pair(value, path: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioError(f"{path}: expected a pair [elevation, azimuth], got {value!r}")
    return _number(value[0], f"{path}[0]"), _number(value[1], f"{path}[1]")


def _direction(value, path: str) -> UnitDirection:
    el, az = _pair(value, path)
    if not 0.0 <= el <= 180.0:
        raise ScenarioError(f"{path}: elevation must lie in [0, 180] deg, got {el}")
    return UnitDirection.from_degrees(el, az)


def _array(doc, path: str) -> ArrayGeometry:
    doc = doc or {}
    n = _number(_get(doc, "elements", path, 2), f"{path}.elements", minimum=1, integer=True)
    spacing = _number(_get(doc, "spacing_wl", path, DEFAULT_SPACING_WL), f"{path}.spacing_wl",
                      minimum=0.0, exclusive=True)
    orient = _direction(_get(doc, "orientation_deg", path, [90.0, 0.0]), f"{path}.orientation_deg")
    center = _get(doc, "center_m", path, [0.0, 0.0, 0.0])
    if not isinstance(center, (list, tuple)) or len(center) != 3:
        raise ScenarioError(f"{path}.center_m: expected three coordinates, got {center!r}")
    center = tuple(_number(c, f"{path}.center_m[{i}]") for i, c in enumerate(center))
    anchor = _get(doc, "anchor", path, "first")
    if anchor not in ANCHORS:
        raise ScenarioError(f"{path}.anchor: must be one of {ANCHORS}, got {anchor!r}")
    return ArrayGeometry(n, spacing, orient, center, anchor)


def _motion(doc, path: str) -> RadialMotion:
    doc = doc or {}
    r0 = _number(_get(doc, "initial_radius_m", path, DEFAULT_RADIUS_M), f"{path}.initial_radius_m",
                 minimum=0.0, exclusive=True)
    v = _number(_get(doc, "radial_velocity_mps", path, 0.0), f"{path}.radial_velocity_mps")
    return RadialMotion(r0, v)


def _mixture(items, path: str) -> VmfMixture:
    if not isinstance(items, list) or not items:
        raise ScenarioError(f"{path}: expected a non-empty list of components")
    comps = []
    for i, item in enumerate(items):
        p = f"{path}[{i}]"
        mean = _direction(_get(item, "mean_deg", p, required=True), f"{p}.mean_deg")
        kappa = _number(_get(item, "kappa", p, required=True), f"{p}.kappa", minimum=0.0)
        weight = _number(_get(item, "weight", p, required=True), f"{p}.weight", minimum=0.0, exclusive=True)
        comps.append(VmfComponent(mean, kappa, weight))
    total = math.fsum(c.weight for c in comps)
    if abs(total - 1.0) > 1e-6:
        raise ScenarioError(f"{path}: component weights sum to {total:.9g}, must sum to 1")
    return VmfMixture(comps)


def _path_spec(doc, path: str, start: UnitDirection) -> MotionPathSpec:
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: expected a mapping")
    if doc.get("start_deg") is not None:
        start = _direction(doc["start_deg"], f"{path}.start_deg")
    dest = None
    if doc.get("dest_deg") is not None:
        dest = _direction(doc["dest_deg"], f"{path}.dest_deg")
    rates = doc.get("rates_deg_s")
    if rates is not None:
        rates = tuple(math.radians(r) for r in _pair(rates, f"{path}.rates_deg_s"))
    sig = _pair(_get(doc, "sigmas_deg", path, [0.0, 0.0]), f"{path}.sigmas_deg")
    if min(sig) < 0:
        raise ScenarioError(f"{path}.sigmas_deg: must be >= 0, got {list(sig)}")
    segments = _number(_get(doc, "segments", path, 100), f"{path}.segments", minimum=1, integer=True)
    dt = _number(_get(doc, "dt_s", path, 0.05), f"{path}.dt_s", minimum=0.0, exclusive=True)
    return MotionPathSpec(start, dest, rates, tuple(math.radians(s) for s in sig), segments, dt)


def _polarization(value, n_tx: int, n_rx: int) -> PolarizationConfig:
    if isinstance(value, str):
        try:
            return preset_config(value, n_tx, n_rx)
        except ValueError as exc:
            raise ScenarioError(f"polarization: {exc}") from None
    if isinstance(value, dict):
        tx = _get(value, "tx_tilts_deg", "polarization", required=True)
        rx = _get(value, "rx_tilts_deg", "polarization", required=True)
        if not isinstance(tx, list) or not isinstance(rx, list):
            raise ScenarioError("polarization: tilt lists expected")
        pc = PolarizationConfig(
            [math.radians(_number(t, f"polarization.tx_tilts_deg[{i}]")) for i, t in enumerate(tx)],
            [math.radians(_number(t, f"polarization.rx_tilts_deg[{i}]")) for i, t in enumerate(rx)],
            str(value.get("label", "custom")))
        try:
            pc.check_sizes(n_tx, n_rx)
        except ValueError as exc:
            raise ScenarioError(f"polarization: {exc}") from None
        return pc
    raise ScenarioError(f"polarization: expected a preset name or a mapping, got {value!r}")


def config_from_dict(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping at top level")
    known = {"name", "wavelength_m", "carrier_frequency_hz", "seed", "tx", "rx", "polarization",
             "depolarization", "snr_db", "xpd_for_snr", "n_channel_draws", "n_trajectory_draws",
             "quadrature"}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ScenarioError(f"{unknown[0]}: unknown field")

    wl = doc.get("wavelength_m")
    fc = doc.get("carrier_frequency_hz")
    if wl is None and fc is None:
        raise ScenarioError("wavelength_m: one of wavelength_m or carrier_frequency_hz is required")
    if wl is not None and fc is not None:
        raise ScenarioError("wavelength_m: give either wavelength_m or carrier_frequency_hz, not both")
    if wl is not None:
        wavelength = _number(wl, "wavelength_m", minimum=0.0, exclusive=True)
    else:
        wavelength = SPEED_OF_LIGHT / _number(fc, "carrier_frequency_hz", minimum=0.0, exclusive=True)

    tx = _get(doc, "tx", "", {})
    rx = _get(doc, "rx", "", {})
    tx_array = _array(_get(tx, "array", "tx"), "tx.array")
    rx_array = _array(_get(rx, "array", "rx"), "rx.array")
    tx_mix = _mixture(_get(tx, "mixture", "tx", DEFAULT_TX_MIXTURE), "tx.mixture")
    rx_mix = _mixture(_get(rx, "mixture", "rx", DEFAULT_RX_MIXTURE), "rx.mixture")

    paths: list[MotionPathSpec] = []
    if rx.get("cluster_paths") is not None and rx.get("cluster_motion") is not None:
        raise ScenarioError("rx.cluster_paths: give either cluster_paths or cluster_motion, not both")
    if rx.get("cluster_paths") is not None:
        items = rx["cluster_paths"]
        if not isinstance(items, list) or len(items) != len(rx_mix):
            raise ScenarioError(f"rx.cluster_paths: need one entry per receive cluster ({len(rx_mix)})")
        paths = [_path_spec(d, f"rx.cluster_paths[{i}]", c.mean)
                 for i, (d, c) in enumerate(zip(items, rx_mix))]
    elif rx.get("cluster_motion") is not None:
        paths = [_path_spec(rx["cluster_motion"], "rx.cluster_motion", c.mean) for c in rx_mix]

    depol = _get(doc, "depolarization", "", {})
    depol_db = tuple(_number(_get(depol, k, "depolarization", d), f"depolarization.{k}")
                     for k, d in (("xpd_v_db", DEFAULT_XPD_DB), ("xpd_h_db", DEFAULT_XPD_DB),
                                  ("cpr_db", DEFAULT_CPR_DB)))

    xpd_rule = _get(doc, "xpd_for_snr", "", "auto")
    if xpd_rule not in XPD_RULES + ("auto",):
        raise ScenarioError(f"xpd_for_snr: must be one of {XPD_RULES + ('auto',)}, got {xpd_rule!r}")

    q = _get(doc, "quadrature", "", {})
    quad = QuadratureSettings(
        _number(_get(q, "n_polar", "quadrature", 64), "quadrature.n_polar", minimum=1, integer=True),
        _number(_get(q, "n_azimuth", "quadrature", 128), "quadrature.n_azimuth", minimum=1, integer=True),
        _number(_get(q, "rtol", "quadrature", 1e-4), "quadrature.rtol", minimum=0.0, exclusive=True),
        _number(_get(q, "max_doublings", "quadrature", 3), "quadrature.max_doublings", minimum=1, integer=True),
        _flag(_get(q, "adaptive", "quadrature", True), "quadrature.adaptive"))

    seed = _number(_get(doc, "seed", "", DEFAULT_SEED), "seed", minimum=0, integer=True)
    if seed >= 2 ** 64:
        raise ScenarioError(f"seed: must fit in 64 bits, got {seed}")

    return ScenarioConfig(
        wavelength=wavelength,
        tx_array=tx_array,
        rx_array=rx_array,
        tx_motion=_motion(_get(tx, "motion", "tx"), "tx.motion"),
        rx_motion=_motion(_get(rx, "motion", "rx"), "rx.motion"),
        tx_mixture=tx_mix,
        rx_mixture=rx_mix,
        polarization=_polarization(_get(doc, "polarization", "", "VV"),
                                   tx_array.num_elements, rx_array.num_elements),
        depol_db=depol_db,
        snr_db=_number(_get(doc, "snr_db", "", DEFAULT_SNR_DB), "snr_db"),
        xpd_for_snr=xpd_rule,
        n_channel_draws=_number(_get(doc, "n_channel_draws", "", DEFAULT_CHANNEL_DRAWS),
                                "n_channel_draws", minimum=1, integer=True),
        n_trajectory_draws=_number(_get(doc, "n_trajectory_draws", "", DEFAULT_TRAJECTORY_DRAWS),
                                   "n_trajectory_draws", minimum=1, integer=True),
        seed=seed,
        cluster_paths=tuple(paths),
        quadrature=quad,
        name=str(_get(doc, "name", "", "scenario")),
    )


def parse_scenario(text: str) -> ScenarioConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"document: not valid YAML ({exc})") from None
    return config_from_dict(doc if doc is not None else {})


def load_scenario(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def builtin_scenario(name: str = "default") -> ScenarioConfig:
    """Load a scenario shipped with the package ('default' or 'brownian')."""
    res = resources.files("gbsm.scenarios").joinpath(f"{name}.yaml")
    if not res.is_file():
        raise ScenarioError(f"scenario: no built-in scenario named {name!r}")
    return parse_scenario(res.read_text(encoding="utf-8"))


# -- serialization --------------------------------------------------------------

def _deg_pair(d: UnitDirection) -> list[float]:
    return [math.degrees(d.elevation), math.degrees(d.azimuth)]


def _array_doc(g: ArrayGeometry) -> dict:
    return {"elements": g.num_elements, "spacing_wl": g.spacing,
            "orientation_deg": _deg_pair(g.orientation), "center_m": list(g.center), "anchor": g.anchor}


def _mixture_doc(mix: VmfMixture) -> list:
    return [{"mean_deg": _deg_pair(c.mean), "kappa": c.kappa, "weight": c.weight} for c in mix]


def _to_document(cfg: ScenarioConfig) -> dict[str, Any]:
    pol: Any
    if cfg.polarization.label in ("VV", "VH", "SLANT45"):
        pol = cfg.polarization.label
    else:
        pol = {"tx_tilts_deg": [math.degrees(t) for t in cfg.polarization.tx_tilts],
               "rx_tilts_deg": [math.degrees(t) for t in cfg.polarization.rx_tilts],
               "label": cfg.polarization.label}
    rx: dict[str, Any] = {
        "array": _array_doc(cfg.rx_array),
        "motion": {"initial_radius_m": cfg.rx_motion.initial_radius,
                   "radial_velocity_mps": cfg.rx_motion.radial_velocity},
        "mixture": _mixture_doc(cfg.rx_mixture),
    }
    if cfg.cluster_paths:
        rx["cluster_paths"] = [
            {"start_deg": _deg_pair(p.start),
             "rates_deg_s": [math.degrees(r) for r in p.angular_rates],
             "sigmas_deg": [math.degrees(s) for s in p.sigmas],
             "segments": p.segments, "dt_s": p.dt}
            for p in cfg.cluster_paths]
    return {
        "name": cfg.name,
        "wavelength_m": cfg.wavelength,
        "seed": cfg.seed,
        "tx": {"array": _array_doc(cfg.tx_array),
               "motion": {"initial_radius_m": cfg.tx_motion.initial_radius,
                          "radial_velocity_mps": cfg.tx_motion.radial_velocity},
               "mixture": _mixture_doc(cfg.tx_mixture)},
        "rx": rx,
        "polarization": pol,
        "depolarization": dict(zip(("xpd_v_db", "xpd_h_db", "cpr_db"), cfg.depol_db)),
        "snr_db": cfg.snr_db,
        "xpd_for_snr": cfg.xpd_for_snr,
        "n_channel_draws": cfg.n_channel_draws,
        "n_trajectory_draws": cfg.n_trajectory_draws,
        "quadrature": {"n_polar": cfg.quadrature.n_polar, "n_azimuth": cfg.quadrature.n_azimuth,
                       "rtol": cfg.quadrature.rtol, "max_doublings": cfg.quadrature.max_doublings,
                       "adaptive": cfg.quadrature.adaptive},
    }


def serialize_scenario(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(_to_document(cfg), sort_keys=False)


__all__ = ["ScenarioConfig", "ScenarioError", "parse_scenario", "load_scenario", "builtin_scenario",
           "serialize_scenario", "config_from_dict", "xpd_from_db", "DEFAULT_SEED"]
