"""Five-bridge ring network carrying streams A-G.

Frame sizes and talker offsets are reconstructions: only the topology,
paths, the 60 us period and the 250-1250 B size range are fixed. Each
bridge egress port gets one q7 window per frame, opening when the frame's
last bit is due to arrive and lasting its transmission time plus a small
margin. The fault-free run therefore has no queuing at bridges.
"""
from __future__ import annotations

from ..model import port_id, transmission_time

PERIOD_NS = 60_000
RATE = 1_000_000_000

# stream -> (talker, bridges, listener)
ROUTES = {
    "A": ("ES1", ("B1", "B2", "B3"), "ES3"),
    "B": ("ES2", ("B2", "B3", "B4"), "ES4"),
    "C": ("ES3", ("B3", "B4", "B1"), "ES1"),
    "D": ("ES4", ("B4", "B1", "B2"), "ES2"),
    "E": ("ES3", ("B3", "B4", "B5"), "ES5"),
    "F": ("ES4", ("B4", "B5", "B2"), "ES2"),
    "G": ("ES5", ("B5", "B2", "B1"), "ES1"),
}
BRIDGES = ("B1", "B2", "B3", "B4", "B5")
END_STATIONS = ("ES1", "ES2", "ES3", "ES4", "ES5")
BRIDGE_LINKS = (("B1", "B2"), ("B2", "B3"), ("B3", "B4"), ("B4", "B1"), ("B4", "B5"), ("B5", "B2"))


def us(ns):
    return f"{ns / 1000:g}us" if ns % 1000 else f"{ns // 1000}us"


def timeline(sizes, offsets, holds=None):
    """Per stream, the list of (node, peer, tx_start, tx_end) hops of frame 0."""
    holds = holds or {}
    out = {}
    for sid, (talker, path, listener) in ROUTES.items():
        nodes = (talker, *path, listener)
        d = transmission_time(sizes[sid], RATE)
        t = offsets[sid]
        hops = []
        for i, (a, b) in enumerate(zip(nodes, nodes[1:])):
            start = t + (holds.get(sid, (0, 0, 0, 0))[i] if i else 0)
            hops.append((a, b, start, start + d))
            t = start + d
        out[sid] = hops
    return out


def _wrap(start, end, cycle):
    """Split [start, end) modulo cycle into non-wrapping pieces."""
    length = end - start
    s = start % cycle
    if s + length <= cycle:
        return [(s, s + length)]
    return [(s, cycle), (0, s + length - cycle)]


def _windows_to_entries(windows, cycle, open_value, closed_value):
    windows = sorted(windows)
    entries = []
    cursor = 0
    for s, e in windows:
        if s < cursor:
            raise ValueError(f"overlapping windows at {s}")
        if s > cursor:
            entries.append((cursor, s, closed_value))
        entries.append((s, e, open_value))
        cursor = e
    if cursor < cycle:
        entries.append((cursor, cycle, closed_value))
    return entries


def port_windows(sizes, offsets, margin, holds=None):
    """Gated bridge egress port -> list of (start, end) q7 windows within the period."""
    windows = {}
    for sid, hops in timeline(sizes, offsets, holds).items():
        for a, b, start, end in hops[1:]:
            windows.setdefault(port_id(a, b), []).extend(_wrap(start, end + margin, PERIOD_NS))
    return windows


def link_conflicts(sizes, offsets, margin, holds=None):
    """Pairs of transmissions overlapping on one directed link (mod period)."""
    busy = {}
    for sid, hops in timeline(sizes, offsets, holds).items():
        for i, (a, b, start, end) in enumerate(hops):
            pad = margin if i else 0
            for s, e in _wrap(start, end + pad, PERIOD_NS):
                busy.setdefault((a, b), []).append((s, e, sid))
    out = []
    for link, ivs in busy.items():
        ivs.sort()
        for (s1, e1, x), (s2, e2, y) in zip(ivs, ivs[1:]):
            if s2 < e1:
                out.append((link, x, y))
    return out


def network_document(sizes, offsets, margin, holds=None, sim_end="600ms", name="network_baseline",
                     psfp_slack=None, actions=(), notes=None):
    nodes = [{"id": n, "kind": "end_station"} for n in END_STATIONS]
    nodes += [{"id": n, "kind": "bridge"} for n in BRIDGES]
    links = [{"node_a": f"ES{i}", "node_b": f"B{i}", "rate": "1Gbps", "propagation_delay": 0}
             for i in range(1, 6)]
    links += [{"node_a": a, "node_b": b, "rate": "1Gbps", "propagation_delay": 0} for a, b in BRIDGE_LINKS]
    streams = [{
        "stream_id": sid, "talker": talker, "listener": listener, "path": list(path),
        "period": us(PERIOD_NS), "send_offset": us(offsets[sid]), "frame_size": sizes[sid], "priority": 7,
    } for sid, (talker, path, listener) in ROUTES.items()]
    gcls = {}
    for pid, wins in sorted(port_windows(sizes, offsets, margin, holds).items()):
        gcls[pid] = {"cycle_time": us(PERIOD_NS), "entries": [
            {"start": s, "end": e, "gates": g}
            for s, e, g in _windows_to_entries(wins, PERIOD_NS, [7], [])]}
    doc = {"name": name}
    if notes:
        doc["notes"] = notes
    doc.update({"topology": {"nodes": nodes, "links": links}, "streams": streams, "gcls": gcls})
    if psfp_slack is not None:
        doc["psfp"] = psfp_document(sizes, offsets, psfp_slack, holds)
    doc["scenario"] = {"actions": list(actions)}
    doc["sim"] = {"sim_end": sim_end, "queue_capacity": 0, "processing_delay": 0, "include_l1_overhead": False}
    return doc


def psfp_document(sizes, offsets, slack, holds=None):
    """Time-based stream gates open for [arrival - slack, arrival + slack) at every bridge ingress."""
    per_bridge = {}
    for sid, hops in timeline(sizes, offsets, holds).items():
        for a, b, start, end in hops[:-1]:
            gate_id = f"g{sid}"
            wins = _wrap(end - slack, end + slack, PERIOD_NS)
            entries = [{"start": s, "end": e, "open": o}
                       for s, e, o in _windows_to_entries(wins, PERIOD_NS, True, False)]
            unit = per_bridge.setdefault(b, {"fail_closed": False, "filters": [], "gates": {}})
            unit["gates"][gate_id] = {"cycle_time": us(PERIOD_NS), "entries": entries}
            unit["filters"].append({"order": len(unit["filters"]), "match_stream": sid,
                                    "match_priority": "*", "gate_ref": gate_id})
    return dict(sorted(per_bridge.items()))


# Reconstructed parameters (found by a local search over sizes, offsets and
# holds, then frozen). Per-hop holds delay a frame's window at that bridge
# beyond its arrival; index 0 is the talker and always 0.
SIZES = {
    "A": 500,
    "B": 400,
    "C": 300,
    "D": 650,
    "E": 300,
    "F": 600,
    "G": 400,
}
OFFSETS = {
    "A": 27_000,
    "B": 25_000,
    "C": 22_000,
    "D": 8_000,
    "E": 5_000,
    "F": 55_000,
    "G": 13_000,
}
HOLDS = {
    "A": (0, 0, 0, 1000),
    "B": (0, 2000, 3000, 0),
    "C": (0, 1000, 2000, 2000),
    "D": (0, 0, 5000, 5000),
    "E": (0, 0, 5000, 2000),
    "F": (0, 0, 5000, 0),
    "G": (0, 0, 3000, 0),
}
MARGIN = 500  # ns of slack after each frame inside its window
PSFP_SLACK = 2000  # stream gates open this long either side of the expected arrival
FAULT = {"kind": "ShiftFrame", "stream_id": "A", "at": "10ms", "shift": "10us"}

_NOTES = ("Sizes and offsets are reconstructions chosen within 250-1250 B and one 60 us period. "
          "Every bridge egress port opens q7 once per frame, at the frame's expected arrival plus a "
          "per-hop hold, for its transmission time plus {margin} ns. The windows exactly carry the "
          "offered load, so the fault-free schedule repeats every period with no backlog growth.")


def documents(sim_end="600ms"):
    base = _NOTES.format(margin=MARGIN)
    late = ("The frame of A emitted nearest 10 ms leaves 10 us late, misses its window at B1 "
            "and the perturbation spreads through the shared ports.")
    return {
        "network_baseline": network_document(SIZES, OFFSETS, MARGIN, HOLDS, sim_end, "network_baseline",
                                             notes=base),
        "network_late_frame": network_document(SIZES, OFFSETS, MARGIN, HOLDS, sim_end, "network_late_frame",
                                               actions=[FAULT], notes=f"{base} {late}"),
        "network_late_frame_psfp": network_document(
            SIZES, OFFSETS, MARGIN, HOLDS, sim_end, "network_late_frame_psfp", psfp_slack=PSFP_SLACK,
            actions=[FAULT],
            notes=f"{base} {late} Time-based stream gates at every bridge ingress admit each stream only "
                  f"within {PSFP_SLACK} ns of its expected arrival, so the late frame is dropped at B1."),
    }
