"""Trace-driven ccNUMA multi-socket LLC simulator with MOESI coherence and
a remote-sharing-biased replacement policy."""

from .adaptive import AdaptiveConfig, AdaptiveState
from .address_map import ConfigError, TopologyConfig
from .coherence import CoherenceSystem, FillOutcome, ServiceSource, Writeback
from .engine import InvariantError, LatencyModel, SimStats, SocketStats, compare, run
from .replacement import (
    CacheSet,
    CounterEvent,
    LlcLine,
    MoesiState,
    PolicyConfig,
    PolicyKind,
    VictimDecision,
)
from .workload import (
    AccessRecord,
    GeneratorKind,
    GeneratorSpec,
    Op,
    TraceError,
    format_trace,
    generate,
    parse_trace,
)

__all__ = [
    "AccessRecord",
    "AdaptiveConfig",
    "AdaptiveState",
    "CacheSet",
    "CoherenceSystem",
    "ConfigError",
    "CounterEvent",
    "FillOutcome",
    "GeneratorKind",
    "GeneratorSpec",
    "InvariantError",
    "LatencyModel",
    "LlcLine",
    "MoesiState",
    "Op",
    "PolicyConfig",
    "PolicyKind",
    "ServiceSource",
    "SimStats",
    "SocketStats",
    "TopologyConfig",
    "TraceError",
    "VictimDecision",
    "Writeback",
    "compare",
    "format_trace",
    "generate",
    "parse_trace",
    "run",
]
