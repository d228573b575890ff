"""Pre-flight configuration checks and fault-free feasibility analysis."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field, replace

from . import faults
from .model import (BRIDGE, END_STATION, NUM_QUEUES, ConfigError, coverage_problems,
                    hyperperiod, port_id)
from .trace import DELIVER, DROP, EMIT, TX_START, occupancy_series


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


def _commensurable(a, b):
    return a % b == 0 or b % a == 0


def validate_config(config):
    """Return every invariant violation found in `config` (empty list = ok)."""
    out = []

    def diag(code, msg):
        out.append(Diagnostic(code, msg))

    topo = config.topology
    for node, kind in topo.nodes.items():
        if kind not in (END_STATION, BRIDGE):
            diag("node_kind", f"node {node!r} has unknown kind {kind!r}")
    for link in topo.links:
        for end in (link.node_a, link.node_b):
            if end not in topo.nodes:
                diag("link_node", f"link {link.node_a}-{link.node_b} references unknown node {end!r}")
        if link.rate <= 0:
            diag("link_rate", f"link {link.node_a}-{link.node_b} has non-positive rate")
        if link.propagation_delay < 0:
            diag("link_delay", f"link {link.node_a}-{link.node_b} has negative propagation delay")

    lo, hi = config.frame_size_bounds
    seen_ids = set()
    for s in config.streams:
        name = f"stream {s.stream_id!r}"
        if s.stream_id in seen_ids:
            diag("stream_duplicate", f"{name} defined twice")
        seen_ids.add(s.stream_id)
        if s.period <= 0:
            diag("stream_period", f"{name}: period must be positive")
        elif not 0 <= s.send_offset < s.period:
            diag("stream_offset", f"{name}: send_offset {s.send_offset} not in [0, period={s.period})")
        if not 0 <= s.priority < NUM_QUEUES:
            diag("stream_priority", f"{name}: priority {s.priority} not in 0..7")
        if not lo <= s.frame_size <= hi:
            diag("frame_size", f"{name}: frame_size {s.frame_size} outside [{lo}, {hi}]")
        if s.frames_per_period < 1:
            diag("stream_fpp", f"{name}: frames_per_period must be >= 1")
        if topo.nodes.get(s.talker) != END_STATION:
            diag("stream_talker", f"{name}: talker {s.talker!r} is not an end station")
        if topo.nodes.get(s.listener) != END_STATION:
            diag("stream_listener", f"{name}: listener {s.listener!r} is not an end station")
        for b in s.path:
            if topo.nodes.get(b) != BRIDGE:
                diag("path_node", f"{name}: path element {b!r} is not a bridge")
        nodes = [s.talker, *s.path, s.listener]
        if len(set(nodes)) != len(nodes):
            diag("path_loop", f"{name}: path revisits a node")
        for a, b in s.hops:
            if topo.link_between(a, b) is None:
                diag("path_link", f"{name}: no link between {a!r} and {b!r}")
        for a, b in s.hops[1:]:
            nxt = topo.forwarding.get((a, s.stream_id))
            if nxt is not None and nxt != b:
                diag("forwarding", f"{name}: forwarding at {a!r} points to {nxt!r}, path says {b!r}")

    ports = {port_id(a, b) for a, b, _ in topo.ports()}
    cycles = []
    for pid, gcl in sorted(config.gcls.items()):
        if pid not in ports:
            diag("gcl_port", f"GCL for unknown port {pid!r}")
        for p in coverage_problems([(e.start, e.end) for e in gcl.entries], gcl.cycle_time):
            diag("gcl_coverage", f"{pid}: {p}")
        for e in gcl.entries:
            if not 0 <= e.gates <= 0xFF:
                diag("gcl_gates", f"{pid}: gate vector {e.gates} is not 8 bits")
        if gcl.cycle_time > 0:
            cycles.append((f"GCL {pid}", gcl.cycle_time))

    for bridge, unit in sorted(config.psfp.items()):
        if topo.nodes.get(bridge) != BRIDGE:
            diag("psfp_bridge", f"PSFP configured on {bridge!r}, which is not a bridge")
        for gid, gate in sorted(unit.gates.items()):
            for p in coverage_problems([(e.start, e.end) for e in gate.entries], gate.cycle_time):
                diag("psfp_gate_coverage", f"{bridge}/{gid}: {p}")
            for e in gate.entries:
                if e.ipv is not None and not 0 <= e.ipv < NUM_QUEUES:
                    diag("psfp_ipv", f"{bridge}/{gid}: ipv {e.ipv} not in 0..7")
            if gate.cycle_time > 0:
                cycles.append((f"stream gate {bridge}/{gid}", gate.cycle_time))
        for f in unit.filters:
            if f.gate_ref not in unit.gates:
                diag("psfp_ref", f"{bridge}: filter {f.order} references unknown gate {f.gate_ref!r}")
            if f.meter_ref is not None and f.meter_ref not in unit.meters:
                diag("psfp_ref", f"{bridge}: filter {f.order} references unknown meter {f.meter_ref!r}")
        for mid, m in sorted(unit.meters.items()):
            if min(m.cir, m.cbs, m.eir, m.ebs) < 0:
                diag("psfp_meter", f"{bridge}/{mid}: meter parameters must be non-negative")

    if config.streams and all(s.period > 0 for s in config.streams):
        hp = hyperperiod(config.streams)
        for what, cycle in cycles:
            if not _commensurable(hp, cycle):
                diag("commensurability", f"{what}: cycle {cycle} and hyperperiod {hp} do not divide each other")

    streams = {s.stream_id: s for s in config.streams}
    singles = set()
    for a in (config.scenario.actions if config.scenario else ()):
        if a.kind not in faults.KINDS:
            diag("fault_kind", f"unknown fault kind {a.kind!r}")
            continue
        if a.stream_id not in streams:
            diag("fault_stream", f"{a.kind} references unknown stream {a.stream_id!r}")
            continue
        s = streams[a.stream_id]
        if a.kind == faults.SHIFT_FRAME and abs(a.shift) >= s.period:
            diag("fault_shift", f"ShiftFrame on {a.stream_id!r}: |shift| must be < period (use drop+inject)")
        if a.single_frame:
            if a.seq is None and a.at is None:
                diag("fault_seq", f"{a.kind} on {a.stream_id!r} needs seq or at")
            key = (a.stream_id, a.seq if a.seq is not None else ("at", a.at))
            if key in singles:
                diag("fault_duplicate", f"more than one single-frame action on {key}")
            singles.add(key)
        if a.kind == faults.INJECT and a.inject is None:
            diag("fault_inject", f"InjectFrame on {a.stream_id!r} needs inject parameters")
        if a.kind == faults.INJECT and a.inject is not None and not lo <= a.inject.size <= hi:
            diag("frame_size", f"InjectFrame on {a.stream_id!r}: size {a.inject.size} outside [{lo}, {hi}]")

    if config.sim_end <= 0:
        diag("sim_end", "sim_end must be positive")
    if config.queue_capacity < 0:
        diag("queue_capacity", "queue_capacity must be >= 0")
    if config.processing_delay < 0:
        diag("processing_delay", "processing_delay must be >= 0")

    if not out and config.scenario and config.scenario.actions:
        # seq references can only be checked against the actual emissions
        from .engine import Simulator
        try:
            Simulator(config).emissions()
        except ConfigError as exc:
            diag("fault_reference", str(exc))
    return out


def schedule_cycle(config):
    """Repetition length of the whole schedule: lcm of stream periods and gate cycles."""
    parts = [s.period for s in config.streams]
    parts += [g.cycle_time for g in config.gcls.values()]
    parts += [g.cycle_time for unit in config.psfp.values() for g in unit.gates.values()]
    return math.lcm(*parts) if parts else 0


@dataclass
class FeasibilityReport:
    feasible: bool
    hyperperiod: int
    max_latency: dict = field(default_factory=dict)  # stream -> ns
    peak_backlog: dict = field(default_factory=dict)  # "port/queue" -> bytes
    slot_misses: int = 0
    undelivered: int = 0
    reasons: list = field(default_factory=list)

    def as_dict(self):
        return {
            "feasible": self.feasible,
            "hyperperiod_ns": self.hyperperiod,
            "max_latency_ns": dict(sorted(self.max_latency.items())),
            "peak_backlog_bytes": dict(sorted(self.peak_backlog.items())),
            "slot_misses": self.slot_misses,
            "undelivered": self.undelivered,
            "reasons": list(self.reasons),
        }

    def to_text(self):
        lines = [f"feasible: {'yes' if self.feasible else 'no'}",
                 f"hyperperiod: {self.hyperperiod} ns",
                 f"slot misses: {self.slot_misses}"]
        for sid, lat in sorted(self.max_latency.items()):
            lines.append(f"  stream {sid}: max latency {lat} ns" if lat is not None
                         else f"  stream {sid}: no frame delivered")
        for key, peak in sorted(self.peak_backlog.items()):
            lines.append(f"  queue {key}: peak backlog {peak} B")
        lines += [f"  reason: {r}" for r in self.reasons]
        return "\n".join(lines)


def check_feasibility(config):
    """Fault-free run: one warm-up hyperperiod, then two measured ones.

    The run continues for a fourth hyperperiod so frames emitted in the
    measured window can complete.
    """
    from .engine import Simulator
    from .faults import FaultScenario

    hp = schedule_cycle(config)
    if hp == 0:
        return FeasibilityReport(True, 0, reasons=["no streams or gates"])
    clean = replace(config, scenario=FaultScenario(), sim_end=4 * hp)
    sim = Simulator(clean)
    log = sim.run()
    lo, hi = hp, 3 * hp

    emitted = {}
    for e in log.frame_events:
        if e.event == EMIT and lo <= e.time < hi:
            emitted[(e.stream_id, e.seq)] = e.time
    max_lat = {s.stream_id: None for s in config.streams}
    done = set()
    reasons = []
    for e in log.frame_events:
        k = (e.stream_id, e.seq)
        if k not in emitted:
            continue
        if e.event == DELIVER:
            done.add(k)
            lat = e.time - emitted[k]
            cur = max_lat.get(e.stream_id)
            max_lat[e.stream_id] = lat if cur is None else max(cur, lat)
        elif e.event == DROP:
            reasons.append(f"frame {k} dropped ({e.detail}) in a fault-free run")
    undelivered = len(emitted) - len(done)
    if undelivered:
        reasons.append(f"{undelivered} frames emitted in the measured window were not delivered")

    misses = 0
    for port in sim.ports.values():
        misses += len(port.deferred)
    if misses:
        reasons.append(f"{misses} frame(s) deferred past a gate close")

    used = sorted({(e.node, e.queue) for e in log.frame_events if e.event == TX_START})
    peak = {}
    for pid, q in used:
        series = occupancy_series(log, pid, q)
        peak[f"{pid}/{q}"] = series.peak(lo, hi)
        boundary = [series.value_at(k * hp) for k in (1, 2, 3)]
        if len(set(boundary)) != 1:
            reasons.append(f"queue {pid}/{q} does not return to the same backlog every hyperperiod: {boundary}")

    if not _periodic(log, hp):
        reasons.append("transmission pattern differs between hyperperiods 2 and 3")

    feasible = not reasons
    return FeasibilityReport(feasible, hp, max_lat, peak, misses, undelivered, reasons)


def _periodic(log, hp):
    windows = defaultdict(list)
    for e in log.frame_events:
        if e.event == TX_START and hp <= e.time < 3 * hp:
            k = (e.time - hp) // hp
            windows[k].append((e.time - (k + 1) * hp, e.node, e.stream_id, e.queue, e.size))
    return windows.get(0, []) == windows.get(1, [])
