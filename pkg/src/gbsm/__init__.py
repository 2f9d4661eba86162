"""Geometry-based stochastic MIMO channel model with moving scatterer clusters."""
from .antenna import DipoleElement, PolarizationConfig, element_patterns, field_pattern_h, field_pattern_v, preset_config
from .config import ScenarioConfig, ScenarioError, builtin_scenario, load_scenario, parse_scenario, serialize_scenario
from .directional import (VmfComponent, VmfMixture, mixture_density, sample_component, sample_mixture,
                          translate_mixture, vmf_density)
from .geometry import (ArrayGeometry, RadialMotion, UnitDirection, approx_distance, element_offset, exact_distance,
                       phase_distance_diff)
from .motion import MotionPathSpec, SphereCollapseError, Trajectory, motion_path, radius_at, wrap_angles
from .quadrature import QuadratureSettings
from .realization import CapacityStats, ChannelDraw, capacity, effective_snr, ergodic_capacity, realize_channel
from .stcf import (CorrelationMatrix, DegenerateCorrelationError, DepolarizationStats, QuadratureError, SideSnapshot,
                   correlation_entry, correlation_matrix, mean_correlation, side_integral, stcf_monte_carlo,
                   stcf_over_time)

__version__ = "0.1.0"
