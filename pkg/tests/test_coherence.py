import random

import pytest

from numacache.address_map import ConfigError, TopologyConfig
from numacache.coherence import CoherenceSystem, ServiceSource
from numacache.replacement import MoesiState, PolicyConfig, PolicyKind

TOPO = TopologyConfig(num_sockets=2, llc_sets=4, llc_assoc=4,
                      line_size_bytes=64, address_width=32)

# top bit selects the home socket under this topology
HOME1 = 1 << 31


def system(policy=None):
    return CoherenceSystem(TOPO, policy)


def state_of(sys_, socket, addr):
    si = (addr >> 6) & 3
    way = sys_.llcs[socket][si].find(addr >> 8)
    return None if way is None else sys_.llcs[socket][si].ways[way]


class TestRead:
    def test_cold_fill_local_home(self):
        sys_ = system()
        out = sys_.handle_read(0, 0x1000)
        assert out.service_source is ServiceSource.LOCAL_DRAM
        assert out.installed_state is MoesiState.EXCLUSIVE
        assert not out.set_remote_shared

    def test_cold_fill_remote_home(self):
        sys_ = system()
        out = sys_.handle_read(0, HOME1 | 0x1000)
        assert out.service_source is ServiceSource.REMOTE_DRAM
        assert out.installed_state is MoesiState.EXCLUSIVE

    def test_modified_supplier_becomes_owner(self):
        sys_ = system()
        sys_.handle_write(1, 0x1000)
        out = sys_.handle_read(0, 0x1000)
        assert out.service_source is ServiceSource.REMOTE_C2C
        assert out.installed_state is MoesiState.SHARED
        assert out.set_remote_shared
        assert state_of(sys_, 1, 0x1000).state is MoesiState.OWNER
        assert state_of(sys_, 0, 0x1000).remote_shared

    def test_owner_supplier_stays_owner(self):
        sys_ = system()
        sys_.handle_write(1, 0x1000)
        sys_.handle_read(0, 0x1000)  # 1 -> Owner
        # evict socket 0's copy by filling its set, then re-read
        for i in range(1, 5):
            sys_.handle_read(0, 0x1000 + i * 0x100)
        assert state_of(sys_, 0, 0x1000) is None
        out = sys_.handle_read(0, 0x1000)
        assert out.service_source is ServiceSource.REMOTE_C2C
        assert out.set_remote_shared
        assert state_of(sys_, 1, 0x1000).state is MoesiState.OWNER

    def test_exclusive_supplier_degrades_no_bit(self):
        sys_ = system()
        sys_.handle_read(1, 0x1000)  # Exclusive at socket 1
        out = sys_.handle_read(0, 0x1000)
        assert out.service_source is ServiceSource.REMOTE_C2C
        assert out.installed_state is MoesiState.SHARED
        assert not out.set_remote_shared
        assert state_of(sys_, 1, 0x1000).state is MoesiState.SHARED

    def test_only_shared_copies_memory_supplies(self):
        sys_ = system()
        sys_.handle_read(1, 0x1000)       # E at 1
        sys_.handle_read(0, 0x1000)       # E degrades, both S
        # evict socket 0's copy, then read from socket 0 again
        for i in range(1, 5):
            sys_.handle_read(0, 0x1000 + i * 0x100)
        out = sys_.handle_read(0, 0x1000)
        assert out.service_source is ServiceSource.LOCAL_DRAM
        assert out.installed_state is MoesiState.SHARED
        assert not out.set_remote_shared

    def test_local_hit(self):
        sys_ = system()
        sys_.handle_read(0, 0x1000)
        out = sys_.handle_read(0, 0x1000)
        assert out.service_source is ServiceSource.LOCAL_HIT
        assert not out.evictions


class TestWrite:
    def test_exclusive_upgrades_silently(self):
        sys_ = system()
        sys_.handle_read(0, 0x1000)
        out = sys_.handle_write(0, 0x1000)
        assert out.service_source is ServiceSource.LOCAL_HIT
        assert state_of(sys_, 0, 0x1000).state is MoesiState.MODIFIED

    def test_upgrade_invalidates_remote_owner(self):
        sys_ = system()
        sys_.handle_write(1, 0x1000)
        sys_.handle_read(0, 0x1000)  # 0: S bit=1, 1: Owner
        out = sys_.handle_write(0, 0x1000)
        assert out.service_source is ServiceSource.LOCAL_HIT
        line = state_of(sys_, 0, 0x1000)
        assert line.state is MoesiState.MODIFIED
        assert not line.remote_shared
        assert state_of(sys_, 1, 0x1000) is None

    def test_cold_write_remote_home(self):
        sys_ = system()
        out = sys_.handle_write(0, HOME1 | 0x2000)
        assert out.service_source is ServiceSource.REMOTE_DRAM
        assert out.installed_state is MoesiState.MODIFIED
        assert not out.set_remote_shared

    def test_write_miss_remote_modified_supplies(self):
        sys_ = system()
        sys_.handle_write(1, 0x1000)
        out = sys_.handle_write(0, 0x1000)
        assert out.service_source is ServiceSource.REMOTE_C2C
        assert state_of(sys_, 1, 0x1000) is None

    def test_write_miss_shared_copies_invalidated(self):
        sys_ = system()
        sys_.handle_read(1, 0x1000)
        sys_.handle_read(0, 0x1000)
        out = sys_.handle_write(1, 0x1000)
        # socket 1 already holds it Shared -> upgrade hit
        assert out.service_source is ServiceSource.LOCAL_HIT
        assert state_of(sys_, 0, 0x1000) is None


class TestEvict:
    def test_modified_writes_back_home(self):
        sys_ = system()
        addr = HOME1 | 0x1000
        sys_.handle_write(0, addr)
        si = (addr >> 6) & 3
        way = sys_.llcs[0][si].find(addr >> 8)
        wb = sys_.evict_line(0, si, way)
        assert wb is not None and wb.home == 1

    def test_shared_drops_silently(self):
        sys_ = system()
        sys_.handle_read(1, 0x1000)
        sys_.handle_read(0, 0x1000)
        way = sys_.llcs[0][0].find(0x10)
        assert sys_.evict_line(0, 0, way) is None

    def test_owner_eviction_leaves_stale_bit(self):
        sys_ = system()
        sys_.handle_write(1, 0x1000)
        sys_.handle_read(0, 0x1000)  # 0: S bit=1, 1: O
        way = sys_.llcs[1][0].find(0x10)
        wb = sys_.evict_line(1, 0, way)
        assert wb is not None
        line = state_of(sys_, 0, 0x1000)
        assert line.state is MoesiState.SHARED
        assert line.remote_shared  # stale by design

    def test_evict_invalid_way_is_caller_bug(self):
        sys_ = system()
        with pytest.raises(RuntimeError):
            sys_.evict_line(0, 0, 0)


class TestInvariants:
    def test_fresh_system_clean(self):
        assert system().check_global_invariants() == []

    def test_random_trace_clean(self):
        sys_ = system(PolicyConfig(PolicyKind.BIASED_ALWAYS))
        rng = random.Random(42)
        for _ in range(10_000):
            socket = rng.randrange(2)
            addr = rng.randrange(64) * 64 | (rng.randrange(2) << 31)
            if rng.random() < 0.5:
                sys_.handle_read(socket, addr)
            else:
                sys_.handle_write(socket, addr)
        assert sys_.check_global_invariants() == []

    def test_injected_double_owner_detected(self):
        sys_ = system()
        sys_.handle_write(0, 0x1000)
        # corrupt: a second Modified copy of the same line at socket 1
        sys_.handle_write(1, 0x2000)
        sys_.llcs[1][0].ways[0].tag = 0x10
        violations = sys_.check_global_invariants()
        assert violations

    def test_directory_mismatch_detected(self):
        sys_ = system()
        sys_.handle_read(0, 0x1000)
        sys_.directory[0x1000].sharers.add(1)
        assert sys_.check_global_invariants()

    def test_address_out_of_range(self):
        with pytest.raises(ConfigError):
            system().handle_read(0, 1 << 32)
