"""LLC victim selection: plain LRU and the remote-sharing-biased policy.

Each set keeps two saturating counters of how often the bias has fired,
split by whether the protected line's home node was local or remote.
"""

import enum
from dataclasses import dataclass
from typing import Callable, Optional


class MoesiState(enum.Enum):
    MODIFIED = "M"
    OWNER = "O"
    EXCLUSIVE = "E"
    SHARED = "S"
    INVALID = "I"


class PolicyKind(enum.Enum):
    LRU_ONLY = "lru"
    BIASED_ALWAYS = "biased"
    BIASED_ADAPTIVE = "adaptive"


class CounterEvent(enum.Enum):
    NONE = "none"
    INCREMENT_LOCAL = "inc_local"
    INCREMENT_REMOTE = "inc_remote"
    RESET_LOCAL = "reset_local"
    RESET_REMOTE = "reset_remote"


@dataclass
class PolicyConfig:
    kind: PolicyKind = PolicyKind.LRU_ONLY
    # None -> derive from associativity: floor(A/4) and floor(A/2), min 1
    t_local: Optional[int] = None
    t_remote: Optional[int] = None

    def thresholds(self, assoc: int) -> tuple[int, int]:
        t_local = self.t_local if self.t_local is not None else max(1, assoc // 4)
        t_remote = self.t_remote if self.t_remote is not None else max(1, assoc // 2)
        if not (1 <= t_local <= assoc and 1 <= t_remote <= assoc):
            raise ValueError(f"thresholds must be in [1, {assoc}]")
        return t_local, t_remote


@dataclass
class LlcLine:
    tag: int = 0
    state: MoesiState = MoesiState.INVALID
    remote_shared: bool = False  # installed Shared via remote cache-to-cache
    recency: int = 0  # 0 = MRU; meaningful only while the line is valid

    @property
    def valid(self) -> bool:
        return self.state is not MoesiState.INVALID


@dataclass
class VictimDecision:
    way: int
    biased: bool  # a non-shared line was chosen over the LRU shared line
    counter_event: CounterEvent


class CacheSet:
    """One set of an LLC: A ways plus the two per-set bias counters."""

    def __init__(self, assoc: int):
        if assoc < 2:
            raise ValueError("associativity must be >= 2")
        self.ways = [LlcLine() for _ in range(assoc)]
        self.local_home_counter = 0   # biased replacements, home node local
        self.remote_home_counter = 0  # biased replacements, home node remote

    @property
    def assoc(self) -> int:
        return len(self.ways)

    def find(self, tag: int) -> Optional[int]:
        for i, line in enumerate(self.ways):
            if line.valid and line.tag == tag:
                return i
        return None

    def first_invalid(self) -> Optional[int]:
        for i, line in enumerate(self.ways):
            if not line.valid:
                return i
        return None

    def touch(self, way: int) -> None:
        """Move a valid way to MRU; ranks above it shift down by one."""
        line = self.ways[way]
        if not line.valid:
            raise RuntimeError(f"touch on invalid way {way}")
        old = line.recency
        for other in self.ways:
            if other.valid and other.recency < old:
                other.recency += 1
        line.recency = 0

    def fill(self, way: int, tag: int, state: MoesiState, remote_shared: bool) -> None:
        """Install a line at MRU. The remote_shared bit only sticks on
        Shared installs."""
        line = self.ways[way]
        if line.valid:
            raise RuntimeError(f"fill on occupied way {way}")
        for other in self.ways:
            if other.valid:
                other.recency += 1
        line.tag = tag
        line.state = state
        line.remote_shared = remote_shared and state is MoesiState.SHARED
        line.recency = 0

    def drop(self, way: int) -> None:
        """Invalidate a way and close the recency gap it leaves."""
        line = self.ways[way]
        if not line.valid:
            raise RuntimeError(f"drop on invalid way {way}")
        old = line.recency
        for other in self.ways:
            if other.valid and other.recency > old:
                other.recency -= 1
        line.state = MoesiState.INVALID
        line.remote_shared = False


def lru_way(cset: CacheSet) -> int:
    """Worst-recency valid way."""
    way = None
    worst = -1
    for i, line in enumerate(cset.ways):
        if line.valid and line.recency > worst:
            worst = line.recency
            way = i
    if way is None:
        raise RuntimeError("no valid way to evict")
    return way


def select_victim(
    cset: CacheSet,
    local_socket: int,
    home_of: Callable[[int], int],
    cfg: PolicyConfig,
    bias_enabled: bool,
) -> VictimDecision:
    """Pick a victim from a full set, updating the bias counters.

    The LRU line is the default. When the bias is active and the LRU line
    is a remote-shared line, the per-home-class counter decides: below its
    threshold we protect the shared line and evict the deepest non-shared
    way instead (counter increments); at the threshold the shared line goes
    after all and the counter resets.
    """
    candidate = lru_way(cset)
    if (
        cfg.kind is PolicyKind.LRU_ONLY
        or not bias_enabled
        or not cset.ways[candidate].remote_shared
    ):
        return VictimDecision(candidate, False, CounterEvent.NONE)

    t_local, t_remote = cfg.thresholds(cset.assoc)
    home_is_local = home_of(candidate) == local_socket
    counter = cset.local_home_counter if home_is_local else cset.remote_home_counter
    threshold = t_local if home_is_local else t_remote

    if counter < threshold:
        alt = None
        worst = -1
        for i, line in enumerate(cset.ways):
            if line.valid and not line.remote_shared and line.recency > worst:
                worst = line.recency
                alt = i
        if alt is None:
            # every way is remote-shared: nothing to protect against
            return VictimDecision(candidate, False, CounterEvent.NONE)
        if home_is_local:
            cset.local_home_counter += 1
            return VictimDecision(alt, True, CounterEvent.INCREMENT_LOCAL)
        cset.remote_home_counter += 1
        return VictimDecision(alt, True, CounterEvent.INCREMENT_REMOTE)

    if home_is_local:
        cset.local_home_counter = 0
        return VictimDecision(candidate, False, CounterEvent.RESET_LOCAL)
    cset.remote_home_counter = 0
    return VictimDecision(candidate, False, CounterEvent.RESET_REMOTE)
