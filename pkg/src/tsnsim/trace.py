"""Simulation observables, derived series and CSV export."""
from __future__ import annotations

import csv
import os
from bisect import bisect_right
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .model import NUM_QUEUES

EMIT = "emit"
ARRIVE = "arrive"
ENQUEUE = "enqueue"
TX_START = "tx_start"
TX_END = "tx_end"
DELIVER = "deliver"
DROP = "drop"

FRAME_COLUMNS = ("time_ns", "node", "stream_id", "seq", "event", "queue", "size_bytes", "detail")
LATENCY_COLUMNS = ("stream_id", "seq", "emit_ns", "deliver_ns", "latency_ns", "dropped")
GATE_COLUMNS = ("time_ns", "port", "queue", "state")
METER_COLUMNS = ("time_ns", "meter", "color")


class QueryError(KeyError):
    pass


class TraceIOError(OSError):
    pass


class FrameEvent(NamedTuple):
    time: int
    node: str  # node id, or port id "A->B" for enqueue/tx events
    stream_id: str
    seq: int
    event: str
    queue: int | None
    size: int
    detail: str


class GateEvent(NamedTuple):
    time: int
    port: str
    queue: int
    open: bool


class MeterEvent(NamedTuple):
    time: int
    meter: str
    color: str


class LatencyRecord(NamedTuple):
    seq: int
    emit_ns: int
    deliver_ns: int | None
    latency_ns: int | None
    dropped: bool


@dataclass
class TraceLog:
    frame_events: list = field(default_factory=list)
    gate_events: list = field(default_factory=list)
    meter_events: list = field(default_factory=list)
    # port ids present in the simulated topology; not part of equality
    ports: tuple = field(default=(), compare=False)

    def streams(self):
        return sorted({e.stream_id for e in self.frame_events if e.event == EMIT})

    def accounting(self):
        """Per-stream lifecycle counts: emitted, delivered, dropped[reason], in_flight."""
        emitted = defaultdict(int)
        delivered = defaultdict(int)
        dropped = defaultdict(Counter)
        for e in self.frame_events:
            if e.event == EMIT:
                emitted[e.stream_id] += 1
            elif e.event == DELIVER:
                delivered[e.stream_id] += 1
            elif e.event == DROP:
                dropped[e.stream_id][e.detail] += 1
        out = {}
        for sid in sorted(emitted):
            drops = dict(sorted(dropped[sid].items()))
            out[sid] = {
                "emitted": emitted[sid],
                "delivered": delivered[sid],
                "dropped": drops,
                "in_flight": emitted[sid] - delivered[sid] - sum(drops.values()),
            }
        return out


@dataclass
class OccupancySeries:
    port: str
    queue: int
    samples: list  # (time_ns, bytes) breakpoints, linear in between

    def value_at(self, t):
        """Occupancy just after all events at time t."""
        times = [s[0] for s in self.samples]
        i = bisect_right(times, t) - 1
        if i < 0:
            return 0
        t0, v0 = self.samples[i]
        if i + 1 == len(self.samples):
            return v0
        t1, v1 = self.samples[i + 1]
        if t1 == t0:
            return v0
        return v0 + (v1 - v0) * Fraction(t - t0, t1 - t0)

    def peak(self, start=None, end=None):
        vals = [v for t, v in self.samples
                if (start is None or t >= start) and (end is None or t < end)]
        if start is not None:
            vals.append(self.value_at(start))
        return max(vals, default=0)


def occupancy_series(log, port, queue, stream_id=None):
    """Piecewise-linear queue occupancy: step up on enqueue, linear drain while transmitting."""
    if not 0 <= queue < NUM_QUEUES:
        raise QueryError(f"queue {queue} out of range")
    events = [e for e in log.frame_events
              if e.node == port and e.queue == queue
              and e.event in (ENQUEUE, TX_START, TX_END)
              and (stream_id is None or e.stream_id == stream_id)]
    if not events and port not in log.ports and not any(e.node == port for e in log.frame_events):
        raise QueryError(f"unknown port {port!r}")

    held = 0  # bytes enqueued and not fully transmitted
    active = None  # (tx_start, tx_end, size)

    def level(t):
        if active is None:
            return held
        ts, te, size = active
        if te == ts:
            return held
        drained = Fraction(size * (t - ts), te - ts)
        return held - (drained if drained.denominator != 1 else int(drained))

    samples = [(0, 0)]

    def add(t, v):
        if samples[-1] != (t, v):
            samples.append((t, v))

    tx_ends = {}
    for e in events:
        if e.event == TX_END:
            tx_ends.setdefault((e.stream_id, e.seq), []).append(e.time)
    for e in events:
        add(e.time, level(e.time))
        if e.event == ENQUEUE:
            held += e.size
        elif e.event == TX_START:
            end = tx_ends[(e.stream_id, e.seq)].pop(0) if tx_ends.get((e.stream_id, e.seq)) else e.time
            active = (e.time, end, e.size)
        elif e.event == TX_END:
            held -= e.size
            active = None
        add(e.time, level(e.time))
    return OccupancySeries(port, queue, samples)


def latency_series(log, stream_id):
    """Per-frame end-to-end latency, measured from the actual emission instant.

    Frames still in flight at the end of the run are omitted.
    """
    emits = {}
    outcome = {}
    for e in log.frame_events:
        if e.stream_id != stream_id:
            continue
        if e.event == EMIT:
            emits[e.seq] = e.time
        elif e.event in (DELIVER, DROP):
            outcome[e.seq] = (e.event, e.time)
    if not emits:
        raise QueryError(f"unknown stream {stream_id!r}")
    out = []
    for seq in sorted(outcome):
        kind, t = outcome[seq]
        emit = emits[seq]
        if kind == DELIVER:
            out.append(LatencyRecord(seq, emit, t, t - emit, False))
        else:
            out.append(LatencyRecord(seq, emit, None, None, True))
    return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{float(v):.3f}"
    return str(v)


def _write(path, header, rows):
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise TraceIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def export_csv(obj, path, stream_id=None):
    """Write a TraceLog (frame events), a latency list or an OccupancySeries to CSV."""
    if isinstance(obj, TraceLog):
        _write(path, FRAME_COLUMNS, obj.frame_events)
    elif isinstance(obj, OccupancySeries):
        _write(path, ("time_ns", "bytes"), obj.samples)
    elif isinstance(obj, dict):
        # stream id -> list of LatencyRecord
        rows = ((sid, r.seq, r.emit_ns, r.deliver_ns, r.latency_ns, r.dropped)
                for sid in sorted(obj) for r in obj[sid])
        _write(path, LATENCY_COLUMNS, rows)
    else:
        raise TypeError(f"cannot export {type(obj).__name__}")


def write_gates_csv(log, path):
    _write(path, GATE_COLUMNS,
           ((g.time, g.port, g.queue, "open" if g.open else "closed") for g in log.gate_events))


def write_meters_csv(log, path):
    _write(path, METER_COLUMNS, log.meter_events)


def all_latencies(log):
    return {sid: latency_series(log, sid) for sid in log.streams()}


def _read(path, header):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise TraceIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows or tuple(rows[0]) != header:
        raise TraceIOError(f"{path}: unexpected header {rows[0] if rows else None}")
    return rows[1:]


def read_frames_csv(path):
    return [FrameEvent(int(t), node, sid, int(seq), ev, int(q) if q != "" else None, int(size), detail)
            for t, node, sid, seq, ev, q, size, detail in _read(path, FRAME_COLUMNS)]


def read_gates_csv(path):
    return [GateEvent(int(t), port, int(q), state == "open")
            for t, port, q, state in _read(path, GATE_COLUMNS)]


def read_meters_csv(path):
    return [MeterEvent(int(t), m, c) for t, m, c in _read(path, METER_COLUMNS)]


def read_latency_csv(path):
    out = defaultdict(list)
    for sid, seq, emit, deliver, lat, dropped in _read(path, LATENCY_COLUMNS):
        out[sid].append(LatencyRecord(int(seq), int(emit), int(deliver) if deliver else None,
                                      int(lat) if lat else None, dropped == "1"))
    return dict(out)


def save_trace(log, out_dir):
    """Write frames.csv, gates.csv, meters.csv and latency.csv into out_dir."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise TraceIOError(f"cannot create {out_dir}: {exc.strerror or exc}") from exc
    export_csv(log, os.path.join(out_dir, "frames.csv"))
    write_gates_csv(log, os.path.join(out_dir, "gates.csv"))
    write_meters_csv(log, os.path.join(out_dir, "meters.csv"))
    export_csv(all_latencies(log), os.path.join(out_dir, "latency.csv"))


def load_trace(trace_dir):
    frames = read_frames_csv(os.path.join(trace_dir, "frames.csv"))
    gates_path = os.path.join(trace_dir, "gates.csv")
    meters_path = os.path.join(trace_dir, "meters.csv")
    gates = read_gates_csv(gates_path) if os.path.exists(gates_path) else []
    meters = read_meters_csv(meters_path) if os.path.exists(meters_path) else []
    ports = sorted({e.node for e in frames if "->" in e.node} | {g.port for g in gates})
    return TraceLog(frames, gates, meters, ports=tuple(ports))
