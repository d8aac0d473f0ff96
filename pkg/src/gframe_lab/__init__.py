"""Numerical laboratory for (P, Q)-controlled continuous g-frames on discretized measure spaces."""

from .controlled import Controller, controlled_bounds, controlled_frame_operator, controlled_quadratic_form
from .duals import canonical_dual, check_duality, dual_frame_operator, dual_parametrization, kernel_sampler
from .gframe import GFrameFamily, frame_bounds, frame_operator
from .measure import CoefficientFamily, DiscretizedMeasureSpace, uniform_interval_space
from .scenarios import Scenario, example_1_5, load_scenario, save_scenario

__version__ = "0.1.0"
