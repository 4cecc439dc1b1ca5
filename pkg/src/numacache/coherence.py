"""Directory-based MOESI coherence across per-socket inclusive LLCs.

One LLC per socket; cores issue reads and writes straight to it. Every
access completes atomically: snoop, supply, state change, install, and any
eviction happen before the next access starts. DRAM is an infinite backing
store; only coherence state is tracked, not data.
"""

import enum
from dataclasses import dataclass, field
from typing import Optional

from .address_map import (
    TopologyConfig,
    home_node,
    line_address,
    line_tag,
    rebuild_line_address,
    set_index,
)
from .replacement import (
    CacheSet,
    MoesiState,
    PolicyConfig,
    VictimDecision,
    select_victim,
)


class ServiceSource(enum.Enum):
    LOCAL_HIT = "local_hit"
    REMOTE_C2C = "remote_c2c"
    LOCAL_DRAM = "local_dram"
    REMOTE_DRAM = "remote_dram"


@dataclass
class Writeback:
    home: int       # socket whose DRAM receives the dirty line
    line_addr: int


@dataclass
class FillOutcome:
    service_source: ServiceSource
    installed_state: MoesiState
    set_remote_shared: bool
    evictions: list[Writeback] = field(default_factory=list)
    victim: Optional[VictimDecision] = None


@dataclass
class DirectoryEntry:
    owner: Optional[int] = None  # socket holding the line in M, O, or E
    sharers: set[int] = field(default_factory=set)


class CoherenceSystem:
    """All sockets' LLCs plus the global directory."""

    def __init__(self, topo: TopologyConfig, policy: Optional[PolicyConfig] = None):
        self.topo = topo
        self.policy = policy if policy is not None else PolicyConfig()
        self.llcs = [
            [CacheSet(topo.llc_assoc) for _ in range(topo.llc_sets)]
            for _ in range(topo.num_sockets)
        ]
        self.directory: dict[int, DirectoryEntry] = {}

    # -- accesses ---------------------------------------------------------

    def handle_read(
        self, requestor: int, addr: int, bias_enabled: bool = True
    ) -> FillOutcome:
        line = line_address(addr, self.topo)
        si = set_index(addr, self.topo)
        tag = line_tag(addr, self.topo)
        cset = self.llcs[requestor][si]

        way = cset.find(tag)
        if way is not None:
            cset.touch(way)
            return FillOutcome(ServiceSource.LOCAL_HIT, cset.ways[way].state, False)

        home = home_node(addr, self.topo)
        entry = self.directory.get(line)
        if entry is None or not entry.sharers:
            # cold fill from the home DRAM
            source = self._dram_source(requestor, home)
            state, bit = MoesiState.EXCLUSIVE, False
        elif entry.owner is not None:
            supplier = entry.owner
            sline = self._line_of(supplier, si, tag)
            if sline.state is MoesiState.MODIFIED:
                sline.state = MoesiState.OWNER
                state, bit = MoesiState.SHARED, True
            elif sline.state is MoesiState.OWNER:
                state, bit = MoesiState.SHARED, True
            else:  # Exclusive supplier degrades; nobody owns the clean line
                sline.state = MoesiState.SHARED
                entry.owner = None
                state, bit = MoesiState.SHARED, False
            source = ServiceSource.REMOTE_C2C
        else:
            # only Shared copies exist; memory owns the line
            source = self._dram_source(requestor, home)
            state, bit = MoesiState.SHARED, False

        evictions, victim = self._install(requestor, si, tag, state, bit, bias_enabled)
        entry = self.directory.setdefault(line, DirectoryEntry())
        entry.sharers.add(requestor)
        if state is MoesiState.EXCLUSIVE:
            entry.owner = requestor
        return FillOutcome(source, state, bit, evictions, victim)

    def handle_write(
        self, requestor: int, addr: int, bias_enabled: bool = True
    ) -> FillOutcome:
        line = line_address(addr, self.topo)
        si = set_index(addr, self.topo)
        tag = line_tag(addr, self.topo)
        cset = self.llcs[requestor][si]

        way = cset.find(tag)
        if way is not None:
            lline = cset.ways[way]
            if lline.state in (MoesiState.SHARED, MoesiState.OWNER):
                # upgrade: invalidate every other copy
                self._invalidate_others(line, si, tag, keep=requestor)
            lline.state = MoesiState.MODIFIED
            lline.remote_shared = False
            cset.touch(way)
            entry = self.directory[line]
            entry.owner = requestor
            entry.sharers = {requestor}
            return FillOutcome(ServiceSource.LOCAL_HIT, MoesiState.MODIFIED, False)

        home = home_node(addr, self.topo)
        entry = self.directory.get(line)
        if entry is not None and entry.owner is not None:
            # dirty or exclusive holder ships the line and invalidates
            source = ServiceSource.REMOTE_C2C
        else:
            source = self._dram_source(requestor, home)
        if entry is not None:
            self._invalidate_others(line, si, tag, keep=requestor)

        evictions, victim = self._install(
            requestor, si, tag, MoesiState.MODIFIED, False, bias_enabled
        )
        entry = self.directory.setdefault(line, DirectoryEntry())
        entry.owner = requestor
        entry.sharers = {requestor}
        return FillOutcome(source, MoesiState.MODIFIED, False, evictions, victim)

    def evict_line(self, socket: int, set_id: int, way: int) -> Optional[Writeback]:
        """Drop a line from an LLC; dirty (M/O) lines write back home.

        Remaining Shared copies of an evicted Owner line keep their
        remote-shared bits, which go stale by design (silent write-back).
        """
        cset = self.llcs[socket][set_id]
        lline = cset.ways[way]
        if not lline.valid:
            raise RuntimeError(f"evict of invalid way {way} in set {set_id}")
        line = rebuild_line_address(lline.tag, set_id, self.topo)
        writeback = None
        if lline.state in (MoesiState.MODIFIED, MoesiState.OWNER):
            writeback = Writeback(home_node(line, self.topo), line)
        entry = self.directory[line]
        entry.sharers.discard(socket)
        if entry.owner == socket:
            entry.owner = None
        if not entry.sharers:
            del self.directory[line]
        cset.drop(way)
        return writeback

    # -- invariant checking -----------------------------------------------

    def check_global_invariants(self) -> list[str]:
        """Empty list iff the global MOESI and directory invariants hold."""
        violations = []
        holders: dict[int, list[tuple[int, MoesiState, bool]]] = {}
        t_local, t_remote = self.policy.thresholds(self.topo.llc_assoc)

        for socket, llc in enumerate(self.llcs):
            for set_id, cset in enumerate(llc):
                ranks = sorted(l.recency for l in cset.ways if l.valid)
                if ranks != list(range(len(ranks))):
                    violations.append(
                        f"socket {socket} set {set_id}: recency ranks {ranks} "
                        "are not a prefix permutation"
                    )
                if not 0 <= cset.local_home_counter <= t_local:
                    violations.append(
                        f"socket {socket} set {set_id}: local-home counter "
                        f"{cset.local_home_counter} out of [0, {t_local}]"
                    )
                if not 0 <= cset.remote_home_counter <= t_remote:
                    violations.append(
                        f"socket {socket} set {set_id}: remote-home counter "
                        f"{cset.remote_home_counter} out of [0, {t_remote}]"
                    )
                for line in cset.ways:
                    if not line.valid:
                        if line.remote_shared:
                            violations.append(
                                f"socket {socket} set {set_id}: invalid line "
                                "with remote_shared set"
                            )
                        continue
                    if line.remote_shared and line.state is not MoesiState.SHARED:
                        violations.append(
                            f"socket {socket} set {set_id}: remote_shared on "
                            f"{line.state.value} line"
                        )
                    addr = rebuild_line_address(line.tag, set_id, self.topo)
                    holders.setdefault(addr, []).append(
                        (socket, line.state, line.remote_shared)
                    )

        for addr, held in holders.items():
            exclusive = [s for s, st, _ in held if st in (MoesiState.MODIFIED, MoesiState.EXCLUSIVE)]
            owners = [s for s, st, _ in held if st is MoesiState.OWNER]
            if exclusive and len(held) > 1:
                violations.append(
                    f"line {addr:#x}: M/E at socket {exclusive[0]} coexists "
                    "with other copies"
                )
            if len(exclusive) > 1:
                violations.append(f"line {addr:#x}: multiple M/E holders")
            if len(owners) > 1:
                violations.append(f"line {addr:#x}: multiple Owner holders")
            if owners and any(
                st not in (MoesiState.OWNER, MoesiState.SHARED) for _, st, _ in held
            ):
                violations.append(
                    f"line {addr:#x}: Owner coexists with a non-Shared copy"
                )
            entry = self.directory.get(addr)
            if entry is None:
                violations.append(f"line {addr:#x}: cached but absent from directory")
                continue
            actual = {s for s, _, _ in held}
            if entry.sharers != actual:
                violations.append(
                    f"line {addr:#x}: directory sharers {sorted(entry.sharers)} "
                    f"!= holders {sorted(actual)}"
                )
            actual_owner = (exclusive + owners)[0] if exclusive or owners else None
            if entry.owner != actual_owner:
                violations.append(
                    f"line {addr:#x}: directory owner {entry.owner} "
                    f"!= actual {actual_owner}"
                )

        for addr in self.directory:
            if addr not in holders:
                violations.append(f"line {addr:#x}: stale directory entry")
        return violations

    # -- helpers ----------------------------------------------------------

    @staticmethod
    def _dram_source(requestor: int, home: int) -> ServiceSource:
        return ServiceSource.LOCAL_DRAM if home == requestor else ServiceSource.REMOTE_DRAM

    def _line_of(self, socket: int, set_id: int, tag: int):
        cset = self.llcs[socket][set_id]
        way = cset.find(tag)
        if way is None:
            raise RuntimeError(
                f"directory names socket {socket} for a line it does not hold"
            )
        return cset.ways[way]

    def _invalidate_others(self, line: int, set_id: int, tag: int, keep: int) -> None:
        entry = self.directory[line]
        for socket in sorted(entry.sharers):
            if socket == keep:
                continue
            cset = self.llcs[socket][set_id]
            way = cset.find(tag)
            if way is None:
                raise RuntimeError(
                    f"directory names socket {socket} for a line it does not hold"
                )
            cset.drop(way)
        entry.sharers &= {keep}
        if entry.owner is not None and entry.owner != keep:
            entry.owner = None
        if not entry.sharers:
            del self.directory[line]

    def _install(
        self,
        socket: int,
        set_id: int,
        tag: int,
        state: MoesiState,
        remote_shared: bool,
        bias_enabled: bool,
    ) -> tuple[list[Writeback], Optional[VictimDecision]]:
        cset = self.llcs[socket][set_id]
        evictions: list[Writeback] = []
        victim = None
        way = cset.first_invalid()
        if way is None:
            def home_of(w: int) -> int:
                addr = rebuild_line_address(cset.ways[w].tag, set_id, self.topo)
                return home_node(addr, self.topo)

            victim = select_victim(cset, socket, home_of, self.policy, bias_enabled)
            way = victim.way
            writeback = self.evict_line(socket, set_id, way)
            if writeback is not None:
                evictions.append(writeback)
        cset.fill(way, tag, state, remote_shared)
        return evictions, victim
