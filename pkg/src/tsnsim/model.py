"""Domain types and schedule arithmetic.

All times and durations are integer nanoseconds. Rates are bits per second.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

NUM_QUEUES = 8
ALL_OPEN = 0xFF
# Sentinel returned by next_gate_close when a gate never closes.
NEVER = math.inf

L1_OVERHEAD_BYTES = 20
DEFAULT_SIZE_BOUNDS = (64, 1522)

END_STATION = "end_station"
BRIDGE = "bridge"


class ConfigError(ValueError):
    """Raised when a configuration is malformed or fails validation."""

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


@dataclass(slots=True)
class Frame:
    stream_id: str
    seq: int
    size: int
    priority: int
    created_at: int
    # Stream whose forwarding entries and PSFP handle the frame uses.
    # Differs from stream_id only for injected (synthetic) frames.
    route: str = ""
    synthetic: bool = False
    arrivals: list = field(default_factory=list)

    def __post_init__(self):
        if not self.route:
            self.route = self.stream_id

    @property
    def key(self):
        return (self.stream_id, self.seq)


@dataclass(frozen=True)
class StreamSpec:
    stream_id: str
    talker: str
    listener: str
    path: tuple
    period: int
    send_offset: int
    frame_size: int
    priority: int = 7
    frames_per_period: int = 1

    @property
    def hops(self):
        """Directed links traversed, talker first."""
        nodes = (self.talker, *self.path, self.listener)
        return list(zip(nodes, nodes[1:]))


@dataclass(frozen=True)
class GclEntry:
    start: int
    end: int
    gates: int


@dataclass(frozen=True)
class GateControlList:
    cycle_time: int
    entries: tuple
    base_time: int = 0
    _starts: tuple = field(init=False, repr=False, compare=False)
    _closes: tuple = field(init=False, repr=False, compare=False)
    _changes: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_starts", tuple(e.start for e in entries))
        closes = []
        changes = []
        for q in range(NUM_QUEUES):
            bit = 1 << q
            closes.append(tuple(
                e.start for i, e in enumerate(entries)
                if not e.gates & bit and entries[i - 1].gates & bit
            ))
        for i, e in enumerate(entries):
            if len(entries) > 1 and e.gates != entries[i - 1].gates:
                changes.append(e.start)
        object.__setattr__(self, "_closes", tuple(closes))
        object.__setattr__(self, "_changes", tuple(changes))

    @classmethod
    def always_open(cls, cycle_time=1_000_000):
        return cls(cycle_time, (GclEntry(0, cycle_time, ALL_OPEN),))

    def phase(self, t):
        return (t - self.base_time) % self.cycle_time

    def entry_at(self, t):
        return self.entries[bisect_right(self._starts, self.phase(t)) - 1]

    def next_change(self, t):
        """Earliest time > t at which the gate vector changes, or None."""
        if not self._changes:
            return None
        p = self.phase(t)
        i = bisect_right(self._changes, p)
        if i < len(self._changes):
            return t + self._changes[i] - p
        return t + self.cycle_time - p + self._changes[0]


@dataclass(frozen=True)
class Link:
    node_a: str
    node_b: str
    rate: int = 1_000_000_000
    propagation_delay: int = 0


@dataclass(frozen=True)
class Topology:
    nodes: dict  # node id -> END_STATION | BRIDGE
    links: tuple
    # (bridge, stream_id) -> next node; prefilled, never learned.
    forwarding: dict = field(default_factory=dict)

    def link_between(self, a, b):
        for link in self.links:
            if {link.node_a, link.node_b} == {a, b}:
                return link
        return None

    def is_bridge(self, node):
        return self.nodes.get(node) == BRIDGE

    def ports(self):
        """Directed (node, peer, link) triples; every link is full duplex."""
        out = []
        for link in self.links:
            out.append((link.node_a, link.node_b, link))
            out.append((link.node_b, link.node_a, link))
        return out


@dataclass(frozen=True)
class SimConfig:
    topology: Topology
    streams: tuple = ()
    gcls: dict = field(default_factory=dict)  # port id "A->B" -> GateControlList
    psfp: dict = field(default_factory=dict)  # bridge -> psfp.PsfpConfig
    scenario: object = None  # faults.FaultScenario
    sim_end: int = 1_000_000
    queue_capacity: int = 0
    processing_delay: int = 0
    include_l1_overhead: bool = False
    frame_size_bounds: tuple = DEFAULT_SIZE_BOUNDS
    name: str = ""

    def stream(self, stream_id):
        for s in self.streams:
            if s.stream_id == stream_id:
                return s
        raise KeyError(stream_id)


def port_id(node, peer):
    return f"{node}->{peer}"


def split_port_id(pid):
    node, _, peer = pid.partition("->")
    return node, peer


def hyperperiod(streams):
    periods = [s.period for s in streams]
    if not periods:
        raise ConfigError("hyperperiod of an empty stream list is undefined")
    if any(p <= 0 for p in periods):
        raise ConfigError("stream periods must be positive")
    return math.lcm(*periods)


def gate_state_at(gcl, t):
    return gcl.entry_at(t).gates


def gate_open(gcl, queue, t):
    return bool(gcl.entry_at(t).gates >> queue & 1)


def next_gate_close(gcl, queue, t):
    """Earliest t' > t at which `queue`'s gate goes from open to closed.

    Returns NEVER when the gate is open for the whole cycle.
    """
    if not gate_open(gcl, queue, t):
        raise ValueError(f"gate of queue {queue} is closed at t={t}")
    closes = gcl._closes[queue]
    if not closes:
        return NEVER
    p = gcl.phase(t)
    i = bisect_right(closes, p)
    if i < len(closes):
        return t + closes[i] - p
    return t + gcl.cycle_time - p + closes[0]


def transmission_time(size, rate, l1_overhead=False):
    """Serialization delay in ns, rounded up to whole nanoseconds."""
    bits = (size + (L1_OVERHEAD_BYTES if l1_overhead else 0)) * 8
    return -(-bits * 1_000_000_000 // rate)


def coverage_problems(intervals, cycle_time):
    """Check that sorted (start, end) pairs tile [0, cycle_time) exactly."""
    problems = []
    if cycle_time <= 0:
        return ["cycle_time must be positive"]
    cursor = 0
    for start, end in intervals:
        if not 0 <= start < end <= cycle_time:
            problems.append(f"entry [{start}, {end}) outside 0 <= start < end <= {cycle_time}")
            continue
        if start > cursor:
            problems.append(f"GCL gap [{cursor}, {start}) uncovered")
        elif start < cursor:
            problems.append(f"GCL overlap [{start}, {min(cursor, end)})")
        cursor = max(cursor, end)
    if cursor < cycle_time:
        problems.append(f"GCL gap [{cursor}, {cycle_time}) uncovered")
    return problems
