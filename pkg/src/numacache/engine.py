"""Trace-driven simulation loop, latency accounting, and statistics."""

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .adaptive import AdaptiveConfig, AdaptiveState
from .address_map import ConfigError, TopologyConfig
from .coherence import CoherenceSystem, ServiceSource
from .replacement import CounterEvent, PolicyConfig, PolicyKind
from .workload import AccessRecord, Op


class InvariantError(RuntimeError):
    """A coherence invariant broke mid-run (validation mode)."""


@dataclass
class LatencyModel:
    """Abstract per-access cycle costs. Defaults are configuration values,
    not measurements; the only baked-in assumption is the ordering that
    makes remote transfers expensive."""

    llc_hit: int = 30
    remote_c2c: int = 150
    local_dram: int = 200
    remote_dram: int = 350

    def __post_init__(self):
        if not self.llc_hit < self.remote_c2c <= self.remote_dram:
            raise ConfigError("need llc_hit < remote_c2c <= remote_dram")
        if not self.local_dram < self.remote_dram:
            raise ConfigError("need local_dram < remote_dram")

    def cost(self, source: ServiceSource) -> int:
        return {
            ServiceSource.LOCAL_HIT: self.llc_hit,
            ServiceSource.REMOTE_C2C: self.remote_c2c,
            ServiceSource.LOCAL_DRAM: self.local_dram,
            ServiceSource.REMOTE_DRAM: self.remote_dram,
        }[source]


@dataclass
class SocketStats:
    accesses: int = 0
    hits: int = 0
    misses: int = 0
    remote_c2c: int = 0
    local_dram: int = 0
    remote_dram: int = 0
    writebacks: int = 0
    bias_events: int = 0
    counter_resets: int = 0
    total_cost: int = 0
    window_fractions: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accesses": self.accesses,
            "hits": self.hits,
            "misses": self.misses,
            "misses_by_source": {
                "remote_c2c": self.remote_c2c,
                "local_dram": self.local_dram,
                "remote_dram": self.remote_dram,
            },
            "writebacks": self.writebacks,
            "bias_events": self.bias_events,
            "counter_resets": self.counter_resets,
            "total_cost": self.total_cost,
            "window_fractions": list(self.window_fractions),
        }


@dataclass
class SimStats:
    per_socket: list[SocketStats]
    # (seq, socket, new flag) for every actual bias flip
    adaptive_toggles: list[tuple[int, int, bool]] = field(default_factory=list)

    def _sum(self, attr: str) -> int:
        return sum(getattr(s, attr) for s in self.per_socket)

    @property
    def accesses(self) -> int:
        return self._sum("accesses")

    @property
    def hits(self) -> int:
        return self._sum("hits")

    @property
    def misses(self) -> int:
        return self._sum("misses")

    @property
    def total_cost(self) -> int:
        return self._sum("total_cost")

    def to_dict(self) -> dict:
        return {
            "accesses": self.accesses,
            "hits": self.hits,
            "misses": self.misses,
            "misses_by_source": {
                "remote_c2c": self._sum("remote_c2c"),
                "local_dram": self._sum("local_dram"),
                "remote_dram": self._sum("remote_dram"),
            },
            "writebacks": self._sum("writebacks"),
            "bias_events": self._sum("bias_events"),
            "counter_resets": self._sum("counter_resets"),
            "total_cost": self.total_cost,
            "adaptive_toggles": [
                {"seq": seq, "socket": socket, "bias": flag}
                for seq, socket, flag in self.adaptive_toggles
            ],
            "per_socket": [s.to_dict() for s in self.per_socket],
        }


def run(
    trace: Iterable[AccessRecord],
    topo: TopologyConfig,
    policy: PolicyConfig,
    adaptive: Optional[AdaptiveConfig] = None,
    lat: Optional[LatencyModel] = None,
    validate: bool = False,
) -> SimStats:
    """Drive a trace through a fresh system and accumulate statistics.

    The windowed remote-miss tracking runs for every policy kind (it is
    pure bookkeeping); only BIASED_ADAPTIVE lets it steer the bias.
    """
    adaptive = adaptive if adaptive is not None else AdaptiveConfig()
    lat = lat if lat is not None else LatencyModel()
    policy.thresholds(topo.llc_assoc)  # fail fast on bad thresholds

    system = CoherenceSystem(topo, policy)
    controllers = [AdaptiveState(adaptive) for _ in range(topo.num_sockets)]
    per_socket = [SocketStats() for _ in range(topo.num_sockets)]
    toggles: list[tuple[int, int, bool]] = []

    for rec in trace:
        if rec.socket >= topo.num_sockets:
            raise ConfigError(f"record {rec.seq}: socket {rec.socket} out of range")
        if rec.core >= topo.cores_per_socket:
            raise ConfigError(f"record {rec.seq}: core {rec.core} out of range")

        if policy.kind is PolicyKind.BIASED_ALWAYS:
            bias = True
        elif policy.kind is PolicyKind.BIASED_ADAPTIVE:
            bias = controllers[rec.socket].is_bias_enabled()
        else:
            bias = False

        if rec.op is Op.READ:
            outcome = system.handle_read(rec.socket, rec.addr, bias)
        else:
            outcome = system.handle_write(rec.socket, rec.addr, bias)

        stats = per_socket[rec.socket]
        stats.accesses += 1
        stats.total_cost += lat.cost(outcome.service_source)
        if outcome.service_source is ServiceSource.LOCAL_HIT:
            stats.hits += 1
        else:
            stats.misses += 1
            if outcome.service_source is ServiceSource.REMOTE_C2C:
                stats.remote_c2c += 1
            elif outcome.service_source is ServiceSource.LOCAL_DRAM:
                stats.local_dram += 1
            else:
                stats.remote_dram += 1
            stats.writebacks += len(outcome.evictions)
            if outcome.victim is not None:
                if outcome.victim.biased:
                    stats.bias_events += 1
                if outcome.victim.counter_event in (
                    CounterEvent.RESET_LOCAL,
                    CounterEvent.RESET_REMOTE,
                ):
                    stats.counter_resets += 1

            is_remote = outcome.service_source is ServiceSource.REMOTE_C2C or (
                adaptive.count_remote_dram
                and outcome.service_source is ServiceSource.REMOTE_DRAM
            )
            controller = controllers[rec.socket]
            before = controller.is_bias_enabled()
            closed = controller.record_miss(is_remote)
            if closed is not None and closed != before:
                toggles.append((rec.seq, rec.socket, closed))

        if validate:
            violations = system.check_global_invariants()
            if violations:
                raise InvariantError(
                    f"after record {rec.seq}: " + "; ".join(violations)
                )

    for socket, controller in enumerate(controllers):
        per_socket[socket].window_fractions = list(controller.window_fractions)
    return SimStats(per_socket, toggles)


def compare(
    trace: Iterable[AccessRecord],
    topo: TopologyConfig,
    policies: list[PolicyConfig],
    adaptive: Optional[AdaptiveConfig] = None,
    lat: Optional[LatencyModel] = None,
    validate: bool = False,
) -> dict:
    """Run each policy over the same trace on a fresh system; deltas are
    relative to the first policy."""
    if not policies:
        raise ConfigError("compare needs at least one policy")
    trace = list(trace)
    results = [
        (p.kind.value, run(trace, topo, p, adaptive, lat, validate)) for p in policies
    ]
    base = results[0][1]
    return {
        "policies": [
            {"policy": name, "stats": stats.to_dict()} for name, stats in results
        ],
        "deltas": [
            {
                "policy": name,
                "misses": stats.misses - base.misses,
                "remote_c2c": stats._sum("remote_c2c") - base._sum("remote_c2c"),
                "total_cost": stats.total_cost - base.total_cost,
            }
            for name, stats in results
        ],
    }
