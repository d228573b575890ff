"""Per-stream filtering and policing at bridge ingress.

Stream filters are matched in ascending order (first match wins), then the
referenced stream gate is consulted and, optionally, a color-blind
two-rate three-color meter.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

GREEN = "green"
YELLOW = "yellow"
RED = "red"

# Token credits are kept in units of 1/(8e9) byte so that refilling at
# `rate` bit/s over `dt` ns adds exactly rate * dt credits.
CREDITS_PER_BYTE = 8 * 1_000_000_000


@dataclass(frozen=True)
class StreamGateEntry:
    start: int
    end: int
    open: bool
    ipv: int | None = None


@dataclass(frozen=True)
class StreamGate:
    gate_id: str
    cycle_time: int
    entries: tuple
    base_time: int = 0
    _starts: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "_starts", tuple(e.start for e in self.entries))

    def entry_at(self, t):
        phase = (t - self.base_time) % self.cycle_time
        return self.entries[bisect_right(self._starts, phase) - 1]


@dataclass
class FlowMeter:
    meter_id: str
    cir: int
    cbs: int
    eir: int
    ebs: int
    drop_yellow: bool = False
    last_update: int = 0
    committed_credits: int = field(default=-1, repr=False)
    excess_credits: int = field(default=-1, repr=False)

    def __post_init__(self):
        # buckets start full
        if self.committed_credits < 0:
            self.committed_credits = self.cbs * CREDITS_PER_BYTE
        if self.excess_credits < 0:
            self.excess_credits = self.ebs * CREDITS_PER_BYTE

    @property
    def committed_tokens(self):
        return self.committed_credits / CREDITS_PER_BYTE

    @property
    def excess_tokens(self):
        return self.excess_credits / CREDITS_PER_BYTE


@dataclass
class StreamFilter:
    order: int
    gate_ref: str
    match_stream: str | None = None  # None is the wildcard
    match_priority: int | None = None
    max_sdu: int | None = None
    meter_ref: str | None = None
    matched: int = 0
    passed: int = 0
    dropped: int = 0

    def matches(self, frame):
        return ((self.match_stream is None or self.match_stream == frame.route)
                and (self.match_priority is None or self.match_priority == frame.priority))


@dataclass
class PsfpConfig:
    filters: list
    gates: dict
    meters: dict = field(default_factory=dict)
    fail_closed: bool = False
    unmatched: int = 0

    def __post_init__(self):
        self.filters = sorted(self.filters, key=lambda f: f.order)


def meter_frame(meter, size, t):
    if t < meter.last_update:
        raise RuntimeError(f"meter {meter.meter_id}: time went backwards ({t} < {meter.last_update})")
    dt = t - meter.last_update
    meter.last_update = t
    meter.committed_credits = min(meter.committed_credits + meter.cir * dt,
                                  meter.cbs * CREDITS_PER_BYTE)
    meter.excess_credits = min(meter.excess_credits + meter.eir * dt,
                               meter.ebs * CREDITS_PER_BYTE)
    need = size * CREDITS_PER_BYTE
    if need <= meter.committed_credits:
        meter.committed_credits -= need
        return GREEN
    if need <= meter.excess_credits:
        meter.excess_credits -= need
        return YELLOW
    return RED


def filter_frame(config, frame, t, on_meter=None):
    """Return (True, effective_priority) or (False, drop reason).

    `on_meter(meter_id, color)` is called whenever a meter classifies a frame.
    """
    flt = next((f for f in config.filters if f.matches(frame)), None)
    if flt is None:
        config.unmatched += 1
        if config.fail_closed:
            return False, "psfp_no_match"
        return True, frame.priority
    flt.matched += 1

    def drop(reason):
        flt.dropped += 1
        return False, reason

    if flt.max_sdu is not None and frame.size > flt.max_sdu:
        return drop("psfp_max_sdu")
    entry = config.gates[flt.gate_ref].entry_at(t)
    if not entry.open:
        return drop("psfp_gate_closed")
    prio = frame.priority if entry.ipv is None else entry.ipv
    if flt.meter_ref is not None:
        meter = config.meters[flt.meter_ref]
        color = meter_frame(meter, frame.size, t)
        if on_meter is not None:
            on_meter(meter.meter_id, color)
        if color == RED:
            return drop("psfp_meter_red")
        if color == YELLOW and meter.drop_yellow:
            return drop("psfp_meter_yellow")
    flt.passed += 1
    return True, prio
