"""Physical address decomposition: home node, set index, tag."""

from dataclasses import dataclass


class ConfigError(ValueError):
    """Raised for invalid topology parameters or out-of-range addresses."""


def _log2_exact(n: int, name: str) -> int:
    if n < 1 or n & (n - 1):
        raise ConfigError(f"{name} must be a power of two, got {n}")
    return n.bit_length() - 1


@dataclass(frozen=True)
class TopologyConfig:
    num_sockets: int = 2
    cores_per_socket: int = 1
    llc_sets: int = 16
    llc_assoc: int = 4
    line_size_bytes: int = 64
    address_width: int = 32

    def __post_init__(self):
        _log2_exact(self.num_sockets, "num_sockets")
        _log2_exact(self.llc_sets, "llc_sets")
        _log2_exact(self.line_size_bytes, "line_size_bytes")
        if self.cores_per_socket < 1:
            raise ConfigError("cores_per_socket must be >= 1")
        if self.llc_assoc < 2:
            raise ConfigError("llc_assoc must be >= 2")
        if self.socket_bits + self.set_bits + self.offset_bits > self.address_width:
            raise ConfigError(
                "socket, set, and line-offset bits exceed the address width"
            )

    @property
    def socket_bits(self) -> int:
        return self.num_sockets.bit_length() - 1

    @property
    def set_bits(self) -> int:
        return self.llc_sets.bit_length() - 1

    @property
    def offset_bits(self) -> int:
        return self.line_size_bytes.bit_length() - 1


def check_address(addr: int, topo: TopologyConfig) -> None:
    if addr < 0 or addr >> topo.address_width:
        raise ConfigError(
            f"address {addr:#x} does not fit in {topo.address_width} bits"
        )


def line_address(addr: int, topo: TopologyConfig) -> int:
    """Address with the low line-offset bits masked off."""
    check_address(addr, topo)
    return addr & ~(topo.line_size_bytes - 1)


def home_node(addr: int, topo: TopologyConfig) -> int:
    """Socket whose DRAM backs this line: the topmost address bits."""
    check_address(addr, topo)
    if topo.num_sockets == 1:
        return 0
    return addr >> (topo.address_width - topo.socket_bits)


def set_index(addr: int, topo: TopologyConfig) -> int:
    check_address(addr, topo)
    return (addr >> topo.offset_bits) & (topo.llc_sets - 1)


def line_tag(addr: int, topo: TopologyConfig) -> int:
    """Bits above the set index; together with the set index it rebuilds
    the line address (home bits are part of the tag)."""
    check_address(addr, topo)
    return addr >> (topo.offset_bits + topo.set_bits)


def rebuild_line_address(tag: int, set_id: int, topo: TopologyConfig) -> int:
    return (tag << (topo.offset_bits + topo.set_bits)) | (set_id << topo.offset_bits)
