"""Cooperative simultaneous interception by heterogeneous pursuers.

Pursuers flying different guidance laws (deviated pursuit, true
proportional navigation, or user plugins) agree on a common time-to-go over
a directed communication graph within a user-chosen convergence time.
"""

from .engagement import AgentState, ChannelMode, EngagementView, derive_view, state_derivatives, wrap_angle
from .errors import (
    ConfigError,
    DegenerateGeometryError,
    GuidanceError,
    ObservationRangeError,
    SalvoError,
    SingularSpeedError,
    TopologyError,
)
from .graph import DirectedTopology, GainVerdict, MirrorSpectrum, build_topology, mirror_spectrum, validate_gains
from .guidance import (
    DPG,
    TPNG,
    CRule,
    GuidanceAssignment,
    GuidanceLaw,
    GuidancePlugin,
    LawKind,
    Switch,
    TgoAffine,
    apply_morph,
    command,
    coupling,
    evaluate_law,
    register_plugin,
    unregister_plugin,
)
from .prescribed_time import GAIN_CLAMP, ScalingFunction, consensus_gain
from .scenario import Scenario, load_scenario, run_scenario
from .sim import G0, Event, Gains, RunRecord, RunSummary, SimConfig, Snapshot, run, step

__all__ = [
    "AgentState",
    "ChannelMode",
    "ConfigError",
    "CRule",
    "DegenerateGeometryError",
    "DirectedTopology",
    "DPG",
    "EngagementView",
    "Event",
    "G0",
    "GAIN_CLAMP",
    "GainVerdict",
    "Gains",
    "GuidanceAssignment",
    "GuidanceError",
    "GuidanceLaw",
    "GuidancePlugin",
    "LawKind",
    "MirrorSpectrum",
    "ObservationRangeError",
    "RunRecord",
    "RunSummary",
    "SalvoError",
    "Scenario",
    "ScalingFunction",
    "SimConfig",
    "SingularSpeedError",
    "Snapshot",
    "Switch",
    "TgoAffine",
    "TopologyError",
    "TPNG",
    "apply_morph",
    "build_topology",
    "command",
    "consensus_gain",
    "coupling",
    "derive_view",
    "evaluate_law",
    "load_scenario",
    "mirror_spectrum",
    "register_plugin",
    "run",
    "run_scenario",
    "state_derivatives",
    "step",
    "unregister_plugin",
    "validate_gains",
    "wrap_angle",
]
