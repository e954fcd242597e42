"""Bearing-based distributed localization and formation tracking for unicycle agents."""

from .errors import (
    AnchorWithoutPosition,
    CollisionFailure,
    ConfigError,
    DegenerateEdge,
    InvalidGraph,
    InvalidScenario,
    MissingBearing,
    NonFiniteState,
)
from .graph import FormationGraph, default_topology
from .geometry import EPS_DEG, anchor_matrix, bearing, bearing_laplacian, projector
from .dynamics import AgentState, ControlInput, heading_perp, heading_vector, unicycle_rhs
from .estimator import EstimatorGains, error_system_matrix, estimation_error, estimator_rhs
from .controller import ControlLawInput, control_law, tracking_error
from .reference import ReferenceSample, ScenarioSpec, desired_bearing, sample
from .sim import SimConfig, SimTrace, SystemState, check_initial_conditions, coupled_rhs, integrate, metrics

__version__ = "0.1.0"

__all__ = [
    "AgentState",
    "AnchorWithoutPosition",
    "CollisionFailure",
    "ConfigError",
    "ControlInput",
    "ControlLawInput",
    "DegenerateEdge",
    "EPS_DEG",
    "EstimatorGains",
    "FormationGraph",
    "InvalidGraph",
    "InvalidScenario",
    "MissingBearing",
    "NonFiniteState",
    "ReferenceSample",
    "ScenarioSpec",
    "SimConfig",
    "SimTrace",
    "SystemState",
    "anchor_matrix",
    "bearing",
    "bearing_laplacian",
    "check_initial_conditions",
    "control_law",
    "coupled_rhs",
    "default_topology",
    "desired_bearing",
    "error_system_matrix",
    "estimation_error",
    "estimator_rhs",
    "heading_perp",
    "heading_vector",
    "integrate",
    "metrics",
    "projector",
    "sample",
    "tracking_error",
    "unicycle_rhs",
]
