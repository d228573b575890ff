"""Load simulation configs from JSON documents.

Top-level keys: topology, streams, gcls, psfp, scenario, sim. Durations may
be integers (ns) or strings with an ns/us/ms/s suffix; rates may be integers
(bit/s) or strings such as "1Gbps".
"""
from __future__ import annotations

import json
import re
from decimal import Decimal, InvalidOperation

from .faults import FaultAction, FaultScenario, Injection
from .model import (BRIDGE, DEFAULT_SIZE_BOUNDS, END_STATION, ConfigError, GateControlList,
                    GclEntry, Link, SimConfig, StreamSpec, Topology)
from .psfp import FlowMeter, PsfpConfig, StreamFilter, StreamGate, StreamGateEntry

_UNITS = {"ns": 1, "us": 1_000, "µs": 1_000, "μs": 1_000, "ms": 1_000_000, "s": 1_000_000_000}
_RATE_UNITS = {"": 1, "k": 10**3, "m": 10**6, "g": 10**9}
_NUM = r"\s*([0-9]+(?:\.[0-9]+)?)\s*"


def parse_duration(value, what="duration"):
    if isinstance(value, bool):
        raise ConfigError(f"{what}: expected a duration, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    m = re.fullmatch(_NUM + r"(ns|us|µs|μs|ms|s)\s*", str(value))
    if not m:
        raise ConfigError(f"{what}: cannot parse duration {value!r}")
    try:
        ns = Decimal(m.group(1)) * _UNITS[m.group(2)]
    except InvalidOperation as exc:
        raise ConfigError(f"{what}: cannot parse duration {value!r}") from exc
    if ns != ns.to_integral_value():
        raise ConfigError(f"{what}: {value!r} is not a whole number of nanoseconds")
    return int(ns)


def parse_rate(value, what="rate"):
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    m = re.fullmatch(_NUM + r"([kKmMgG]?)(?:bps|bit/s|b/s)?\s*", str(value))
    if not m:
        raise ConfigError(f"{what}: cannot parse rate {value!r}")
    return int(Decimal(m.group(1)) * _RATE_UNITS[m.group(2).lower()])


def parse_gates(value):
    if isinstance(value, list):
        bits = 0
        for q in value:
            bits |= 1 << int(q)
        return bits
    if isinstance(value, str):
        return int(value, 0)
    return int(value)


def _require(doc, key, where):
    if key not in doc:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return doc[key]


def _gcl(doc, where):
    entries = [GclEntry(parse_duration(_require(e, "start", where), f"{where}.start"),
                        parse_duration(_require(e, "end", where), f"{where}.end"),
                        parse_gates(_require(e, "gates", where)))
               for e in _require(doc, "entries", where)]
    entries.sort(key=lambda e: (e.start, e.end))
    return GateControlList(parse_duration(_require(doc, "cycle_time", where), f"{where}.cycle_time"),
                           tuple(entries), parse_duration(doc.get("base_time", 0)))


def _topology(doc):
    nodes = {}
    for n in _require(doc, "nodes", "topology"):
        if isinstance(n, str):
            raise ConfigError("topology.nodes entries need 'id' and 'kind'")
        kind = _require(n, "kind", "topology.nodes")
        if kind not in (END_STATION, BRIDGE):
            raise ConfigError(f"node {n.get('id')!r}: kind must be {END_STATION!r} or {BRIDGE!r}")
        nodes[str(_require(n, "id", "topology.nodes"))] = kind
    links = tuple(
        Link(str(_require(l, "node_a", "link")), str(_require(l, "node_b", "link")),
             parse_rate(l.get("rate", 1_000_000_000)),
             parse_duration(l.get("propagation_delay", 0), "propagation_delay"))
        for l in _require(doc, "links", "topology"))
    forwarding = {}
    for bridge, table in (doc.get("forwarding") or {}).items():
        for sid, nxt in table.items():
            forwarding[(str(bridge), str(sid))] = str(nxt)
    return Topology(nodes, links, forwarding)


def _stream(doc):
    where = f"stream {doc.get('stream_id')!r}"
    return StreamSpec(
        stream_id=str(_require(doc, "stream_id", "stream")),
        talker=str(_require(doc, "talker", where)),
        listener=str(_require(doc, "listener", where)),
        path=tuple(str(p) for p in _require(doc, "path", where)),
        period=parse_duration(_require(doc, "period", where), f"{where}.period"),
        send_offset=parse_duration(doc.get("send_offset", 0), f"{where}.send_offset"),
        frame_size=int(_require(doc, "frame_size", where)),
        priority=int(doc.get("priority", 7)),
        frames_per_period=int(doc.get("frames_per_period", 1)),
    )


def _psfp(bridge, doc):
    where = f"psfp[{bridge}]"
    gates = {}
    for gid, g in (doc.get("gates") or {}).items():
        entries = sorted(
            (StreamGateEntry(parse_duration(_require(e, "start", where)), parse_duration(_require(e, "end", where)),
                             bool(e.get("open", True)), e.get("ipv"))
             for e in _require(g, "entries", where)),
            key=lambda e: (e.start, e.end))
        gates[str(gid)] = StreamGate(str(gid), parse_duration(_require(g, "cycle_time", where)),
                                     tuple(entries), parse_duration(g.get("base_time", 0)))
    meters = {}
    for mid, m in (doc.get("meters") or {}).items():
        meters[str(mid)] = FlowMeter(str(mid), parse_rate(_require(m, "cir", where)), int(_require(m, "cbs", where)),
                                     parse_rate(m.get("eir", 0)), int(m.get("ebs", 0)),
                                     drop_yellow=bool(m.get("drop_yellow", False)))
    filters = []
    for i, f in enumerate(doc.get("filters") or []):
        stream = f.get("match_stream")
        prio = f.get("match_priority")
        filters.append(StreamFilter(
            order=int(f.get("order", i)),
            gate_ref=str(_require(f, "gate_ref", where)),
            match_stream=None if stream in (None, "*") else str(stream),
            match_priority=None if prio in (None, "*") else int(prio),
            max_sdu=f.get("max_sdu"),
            meter_ref=f.get("meter_ref"),
        ))
    return PsfpConfig(filters, gates, meters, fail_closed=bool(doc.get("fail_closed", False)))


def _action(doc):
    inject = doc.get("inject")
    if inject is not None:
        inject = Injection(parse_duration(_require(inject, "time", "inject"), "inject.time"),
                           int(_require(inject, "size", "inject")), inject.get("priority"))
    return FaultAction(
        kind=str(_require(doc, "kind", "scenario action")),
        stream_id=str(_require(doc, "stream_id", "scenario action")),
        seq=doc.get("seq"),
        shift=parse_duration_signed(doc.get("shift", 0)),
        inject=inject,
        from_seq=int(doc.get("from_seq", 0)),
        at=None if doc.get("at") is None else parse_duration(doc["at"], "at"),
    )


def parse_duration_signed(value):
    if isinstance(value, str) and value.strip().startswith("-"):
        return -parse_duration(value.strip()[1:], "shift")
    if isinstance(value, str) and value.strip().startswith("+"):
        return parse_duration(value.strip()[1:], "shift")
    return parse_duration(value, "shift")


def config_from_dict(doc, name=""):
    if not isinstance(doc, dict):
        raise ConfigError("config document must be an object")
    unknown = set(doc) - {"topology", "streams", "gcls", "psfp", "scenario", "sim", "name", "notes"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    try:
        sim = doc.get("sim") or {}
        bounds = sim.get("frame_size_bounds", DEFAULT_SIZE_BOUNDS)
        return SimConfig(
            topology=_topology(_require(doc, "topology", "config")),
            streams=tuple(_stream(s) for s in doc.get("streams") or []),
            gcls={str(pid): _gcl(g, f"gcls[{pid}]") for pid, g in (doc.get("gcls") or {}).items()},
            psfp={str(b): _psfp(b, p) for b, p in (doc.get("psfp") or {}).items()},
            scenario=FaultScenario(tuple(_action(a) for a in (doc.get("scenario") or {}).get("actions", []))),
            sim_end=parse_duration(sim.get("sim_end", "1ms"), "sim.sim_end"),
            queue_capacity=int(sim.get("queue_capacity", 0)),
            processing_delay=parse_duration(sim.get("processing_delay", 0), "sim.processing_delay"),
            include_l1_overhead=bool(sim.get("include_l1_overhead", False)),
            frame_size_bounds=tuple(int(b) for b in bounds),
            name=str(doc.get("name", name)),
        )
    except (TypeError, AttributeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed config: {exc}") from exc


def load_config(path):
    """Parse a JSON config file. Raises ConfigError on malformed content, OSError on I/O."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    return config_from_dict(doc, name=doc.get("name", "") if isinstance(doc, dict) else "")
