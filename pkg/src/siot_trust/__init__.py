"""Trust quantification and attack simulation for Social-IoT networks."""

from .behavior import BehaviorModel, Kind, RecommendationPolicy, default_policies
from .engine import TrustEngine, TrustSnapshot, run
from .graph import Network, SocialProfile
from .trace import GeneratorConfig, Trace, TraceEvent, generate_trace, load_trace, write_trace
from .trust import (
    MEAN,
    WS1,
    WS2,
    InteractionCounts,
    Label,
    TrustFeatures,
    WeightScheme,
    classify,
    direct_trust,
    final_trust,
)

__version__ = "0.1.0"

__all__ = [
    "BehaviorModel", "Kind", "RecommendationPolicy", "default_policies", "TrustEngine",
    "TrustSnapshot", "run",
    "Network", "SocialProfile", "GeneratorConfig", "Trace", "TraceEvent", "generate_trace",
    "load_trace", "write_trace", "MEAN", "WS1", "WS2", "InteractionCounts", "Label",
    "TrustFeatures", "WeightScheme", "classify", "direct_trust", "final_trust",
]
