"""Deterministic discrete-event kernel.

Events at equal timestamps are dispatched by kind rank, then by insertion
order. All nodes share one perfect clock.
"""
from __future__ import annotations

import heapq
import logging
from enum import IntEnum

from . import faults
from .model import ConfigError, Frame
from .psfp import filter_frame
from .tas import DROPPED_OVERFLOW, EgressPort
from .trace import (ARRIVE, DELIVER, DROP, EMIT, ENQUEUE, TX_END, TX_START, FrameEvent,
                    GateEvent, MeterEvent, TraceLog)

log = logging.getLogger(__name__)


class Kind(IntEnum):
    TX_COMPLETE = 0
    GATE_TRANSITION = 1
    PSFP_GATE_TRANSITION = 2
    FRAME_ARRIVAL = 3
    ENQUEUE = 4  # bridge egress enqueue after processing_delay > 0
    TALKER_EMIT = 5
    SIM_END = 6


class SchedulingError(RuntimeError):
    pass


class EventQueue:
    def __init__(self):
        self.now = 0
        self._heap = []
        self._seq = 0

    def schedule(self, time, kind, payload=None):
        if time < self.now:
            raise SchedulingError(f"{kind.name} scheduled at {time} < now={self.now}")
        heapq.heappush(self._heap, (time, kind, self._seq, payload))
        self._seq += 1

    def pop(self):
        time, kind, _, payload = heapq.heappop(self._heap)
        self.now = time
        return time, kind, payload

    def pending(self):
        return [(t, k, p) for t, k, _, p in sorted(self._heap)]

    def __len__(self):
        return len(self._heap)


def base_emissions(stream, until):
    """Unperturbed emissions in [0, until): frames_per_period frames at k*period + send_offset."""
    out = []
    seq = 0
    t = stream.send_offset
    while t < until:
        for _ in range(stream.frames_per_period):
            out.append((t, Frame(stream.stream_id, seq, stream.frame_size, stream.priority, t)))
            seq += 1
        t += stream.period
    return out


def emit_talker_frames(stream, scenario=None, until=None, periods=None):
    """Emission schedule of one talker stream with the scenario's faults applied."""
    if until is None:
        if periods is None:
            raise ValueError("pass until or periods")
        until = stream.send_offset + (periods - 1) * stream.period + 1
    base = base_emissions(stream, until)
    if scenario is None:
        return base
    return faults.apply(scenario.for_stream(stream.stream_id), base,
                        stream_ids=[stream.stream_id], streams={stream.stream_id: stream})


class Simulator:
    """One run over a validated SimConfig. Use `run()` for the common case."""

    def __init__(self, config, sample_occupancy=False):
        self.config = config
        self.events = EventQueue()
        self.trace = TraceLog()
        self.topology = config.topology
        self.ports = {}
        for node, peer, link in self.topology.ports():
            pid = f"{node}->{peer}"
            self.ports[pid] = EgressPort(
                node, peer, link.rate, gcl=config.gcls.get(pid),
                propagation_delay=link.propagation_delay,
                capacity=config.queue_capacity, l1_overhead=config.include_l1_overhead)
        self.trace.ports = tuple(sorted(self.ports))
        self.forwarding = dict(self.topology.forwarding)
        self.first_hop = {}
        self.talkers = {s.stream_id: s.talker for s in config.streams}
        for s in config.streams:
            self.first_hop[s.stream_id] = s.hops[0][1]
            for node, nxt in s.hops[1:]:
                self.forwarding.setdefault((node, s.stream_id), nxt)
        self.counters = {"forwarding_error": 0, "psfp": 0, "overflow": 0}
        # live byte counters sampled after each port event (for cross-checks)
        self.occupancy_samples = [] if sample_occupancy else None
        self._fe = self.trace.frame_events.append

    # -- helpers -----------------------------------------------------------

    def _record(self, t, node, frame, event, queue=None, detail=""):
        self._fe(FrameEvent(t, node, frame.stream_id, frame.seq, event, queue, frame.size, detail))

    def _sample(self, port, queue, t):
        if self.occupancy_samples is not None:
            self.occupancy_samples.append((t, port.port_id, queue, port.occupancy[queue]))

    def _drop(self, t, node, frame, reason, queue=None):
        self._record(t, node, frame, DROP, queue, reason)

    def _enqueue(self, port, frame, queue, t):
        if port.enqueue(frame, queue, t) == DROPPED_OVERFLOW:
            self.counters["overflow"] += 1
            self._drop(t, port.port_id, frame, "overflow", queue)
            return
        self._record(t, port.port_id, frame, ENQUEUE, queue)
        self._sample(port, queue, t)
        self._try_transmit(port, t)

    def _try_transmit(self, port, t):
        started = port.try_transmit(t)
        if started is None:
            return
        q, frame, duration = started
        self._record(t, port.port_id, frame, TX_START, q)
        self.events.schedule(t + duration, Kind.TX_COMPLETE, port)

    # -- event handlers ----------------------------------------------------

    def _on_emit(self, t, frame):
        talker_port = self.ports[f"{self.talkers[frame.route]}->{self.first_hop[frame.route]}"]
        self._record(t, talker_port.node, frame, EMIT)
        frame.arrivals.append((talker_port.node, t))
        self._enqueue(talker_port, frame, frame.priority, t)

    def _on_tx_complete(self, t, port):
        q, frame = port.complete(t)
        self._record(t, port.port_id, frame, TX_END, q)
        self._sample(port, q, t)
        self.events.schedule(t + port.propagation_delay, Kind.FRAME_ARRIVAL, (port.peer, frame))
        self._try_transmit(port, t)

    def _on_arrival(self, t, node, frame):
        frame.arrivals.append((node, t))
        if not self.topology.is_bridge(node):
            self._record(t, node, frame, DELIVER)
            return
        self._record(t, node, frame, ARRIVE)
        queue = frame.priority
        unit = self.config.psfp.get(node)
        if unit is not None:
            ok, result = filter_frame(unit, frame, t, on_meter=lambda m, c: self.trace.meter_events.append(
                MeterEvent(t, f"{node}/{m}", c)))
            if not ok:
                self.counters["psfp"] += 1
                self._drop(t, node, frame, result)
                return
            queue = result
        nxt = self.forwarding.get((node, frame.route))
        if nxt is None or f"{node}->{nxt}" not in self.ports:
            self.counters["forwarding_error"] += 1
            self._drop(t, node, frame, "forwarding_error")
            return
        port = self.ports[f"{node}->{nxt}"]
        delay = self.config.processing_delay
        if delay:
            self.events.schedule(t + delay, Kind.ENQUEUE, (port, frame, queue))
        else:
            self._enqueue(port, frame, queue, t)

    def _on_gate_transition(self, t, port):
        for q, is_open in port.on_gate_transition(t):
            self.trace.gate_events.append(GateEvent(t, port.port_id, q, is_open))
        self._try_transmit(port, t)
        nxt = port.gcl.next_change(t)
        if nxt is not None and nxt <= self.config.sim_end:
            self.events.schedule(nxt, Kind.GATE_TRANSITION, port)

    # -- driver ------------------------------------------------------------

    def emissions(self):
        cfg = self.config
        streams = {s.stream_id: s for s in cfg.streams}
        base = []
        for s in cfg.streams:
            base.extend(base_emissions(s, cfg.sim_end))
        base.sort(key=lambda e: (e[0], e[1].stream_id, e[1].seq))
        return faults.apply(cfg.scenario, base, stream_ids=streams, streams=streams)

    def run(self):
        cfg = self.config
        ev = self.events
        for pid in sorted(self.ports):
            port = self.ports[pid]
            if port.gcl is None:
                continue
            for q in range(8):
                self.trace.gate_events.append(GateEvent(0, pid, q, bool(port.gates >> q & 1)))
            nxt = port.gcl.next_change(0)
            if nxt is not None and nxt <= cfg.sim_end:
                ev.schedule(nxt, Kind.GATE_TRANSITION, port)
        for t, frame in self.emissions():
            if t < cfg.sim_end:
                ev.schedule(t, Kind.TALKER_EMIT, frame)
        ev.schedule(cfg.sim_end, Kind.SIM_END)

        while ev:
            t, kind, payload = ev.pop()
            if kind is Kind.TX_COMPLETE:
                self._on_tx_complete(t, payload)
            elif kind is Kind.FRAME_ARRIVAL:
                self._on_arrival(t, *payload)
            elif kind is Kind.GATE_TRANSITION:
                self._on_gate_transition(t, payload)
            elif kind is Kind.TALKER_EMIT:
                self._on_emit(t, payload)
            elif kind is Kind.ENQUEUE:
                port, frame, queue = payload
                self._enqueue(port, frame, queue, t)
            elif kind is Kind.SIM_END:
                break
        log.debug("run %s finished at %d with %d pending events", cfg.name, ev.now, len(ev))
        return self.trace

    def in_flight(self):
        """Frames held in ports or propagating when the run stopped."""
        held = sum(p.frames_held() for p in self.ports.values())
        moving = sum(1 for _, k, _ in self.events.pending() if k in (Kind.FRAME_ARRIVAL, Kind.ENQUEUE))
        return held + moving


def run(config, validate=True):
    """Simulate `config` until sim_end and return its TraceLog."""
    if validate:
        from .validator import validate_config
        problems = validate_config(config)
        if problems:
            raise ConfigError(f"configuration invalid: {problems[0].message}", problems)
    return Simulator(config).run()
