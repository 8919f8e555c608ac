"""Agent-based simulation of mobility choices.

Each agent is a small constraint-satisfaction network of needs and transport
options that settles to a preference.  Agents talk to neighbours in a
homophilous social graph and are exposed to policy media campaigns.
"""

__version__ = "0.1.0"

from .coherence import (CoherenceNetwork, Decision, NetworkError, SettleParams,
                        SettleReport, build_network, decide, settle)
from .kinds import ACTION_LABELS, NEED_LABELS, ScenarioKind
from .population import (Agent, Demographics, Population, TypeProfile,
                         generate_population, load_population, save_population,
                         tally_shares)
from .socialnet import SocialGraph, build_graph, neighbors, similarity
from .influence import (InfluenceTables, MediaCampaign, apply_media,
                        default_campaign, exchange)
from .calibration import CalibrationResult, calibrate_profiles
from .engine import (ModalShareSeries, ScenarioConfig, SweepResult,
                     compare_scenarios, run_replicate, run_scenario, run_sweep)

__all__ = [
    "ACTION_LABELS", "Agent", "CalibrationResult", "CoherenceNetwork",
    "Decision", "Demographics", "InfluenceTables", "MediaCampaign",
    "ModalShareSeries", "NEED_LABELS", "NetworkError", "Population",
    "ScenarioConfig", "ScenarioKind", "SettleParams", "SettleReport",
    "SocialGraph", "SweepResult", "TypeProfile", "apply_media",
    "build_graph", "build_network", "calibrate_profiles", "compare_scenarios",
    "decide", "default_campaign", "exchange", "generate_population",
    "load_population", "neighbors", "run_replicate", "run_scenario",
    "run_sweep", "save_population", "settle", "similarity", "tally_shares",
]
