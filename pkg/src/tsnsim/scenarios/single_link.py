"""Single-link scenarios: talkers -> one bridge -> one listener.

Only the bridge egress port SW->L is gated. All links run at 1 Gbit/s with
zero propagation delay, so a frame reaches the bridge queue one
transmission time after its emission.
"""
from __future__ import annotations

PERIOD = "50us"

# Two frames sharing one 12 us window: 1000 B (8 us) then 500 B (4 us).
SHARED_WINDOW = {
    "streams": [("magenta", "TM", 1000, "0us"), ("blue", "TB", 500, "6us")],
    "windows": [("20us", "32us")],
    "notes": "magenta reaches the queue at 8 us, blue at 10 us; the gate opens at 20 us "
             "and closes exactly when both have been sent (32 us).",
}

# One 10 us slot per frame, each succeeding that frame's arrival by 2 us.
SLOTTED = {
    "streams": [("magenta", "TM", 1000, "0us"), ("blue", "TB", 500, "20us")],
    "windows": [("10us", "20us"), ("26us", "36us")],
    "notes": "magenta arrives at 8 us, its slot is [10, 20) us; blue arrives at 24 us, its slot "
             "is [26, 36) us. Both slots can hold a 1000 B frame.",
}

# Small/medium/large frames, each slot only 1 us longer than its own frame.
UNEQUAL = {
    "period": "60us",
    "streams": [("small", "TS", 250, "0us"), ("medium", "TM", 750, "4us"), ("large", "TL", 1250, "10us")],
    "windows": [("4us", "7us"), ("12us", "19us"), ("22us", "33us")],
    "notes": "small arrives at 2 us (slot [4, 7)), medium at 10 us (slot [12, 19)), large at "
             "20 us (slot [22, 33)). A small frame fits any slot; a large one only its own.",
}


def _us(v):
    return int(v.removesuffix("us")) * 1000


def single_link_document(layout, name, actions=(), sim_end="6ms", queue_capacity=0, notes=""):
    period = layout.get("period", PERIOD)
    talkers = [t for _, t, _, _ in layout["streams"]]
    nodes = [{"id": t, "kind": "end_station"} for t in talkers]
    nodes += [{"id": "L", "kind": "end_station"}, {"id": "SW", "kind": "bridge"}]
    links = [{"node_a": t, "node_b": "SW", "rate": "1Gbps", "propagation_delay": 0} for t in talkers]
    links.append({"node_a": "SW", "node_b": "L", "rate": "1Gbps", "propagation_delay": 0})
    streams = [{"stream_id": sid, "talker": talker, "listener": "L", "path": ["SW"], "period": period,
                "send_offset": offset, "frame_size": size, "priority": 7}
               for sid, talker, size, offset in layout["streams"]]
    entries = []
    cursor = 0
    for start, end in layout["windows"]:
        if _us(start) > cursor:
            entries.append({"start": f"{cursor // 1000}us", "end": start, "gates": []})
        entries.append({"start": start, "end": end, "gates": [7]})
        cursor = _us(end)
    if cursor < _us(period):
        entries.append({"start": f"{cursor // 1000}us", "end": period, "gates": []})
    return {
        "name": name,
        "notes": " ".join(x for x in (layout.get("notes", ""), notes) if x),
        "topology": {"nodes": nodes, "links": links},
        "streams": streams,
        "gcls": {"SW->L": {"cycle_time": period, "entries": entries}},
        "scenario": {"actions": list(actions)},
        "sim": {"sim_end": sim_end, "queue_capacity": queue_capacity, "processing_delay": 0,
                "include_l1_overhead": False},
    }


def documents():
    return {
        "no_fault": single_link_document(SHARED_WINDOW, "no_fault"),
        "early": single_link_document(
            SHARED_WINDOW, "early",
            [{"kind": "ShiftFrame", "stream_id": "blue", "seq": 1, "shift": "-4us"}],
            notes="In period 2 blue is emitted 4 us early and reaches the queue at 56 us, before "
                  "magenta (58 us), so it is sent first."),
        "missing": single_link_document(
            SHARED_WINDOW, "missing",
            [{"kind": "DropFrame", "stream_id": "magenta", "seq": 1}],
            notes="Magenta frame 1 is never sent; blue goes out when the gate opens at 70 us."),
        "additional": single_link_document(
            SLOTTED, "additional",
            [{"kind": "InjectFrame", "stream_id": "magenta",
              "inject": {"time": "42us", "size": 1000, "priority": 7}}],
            notes="An extra 1000 B frame on magenta's route reaches the queue at 50 us, ahead of "
                  "magenta's period-2 frame (58 us), and takes magenta's slot."),
        "late_frame": single_link_document(
            SLOTTED, "late_frame",
            [{"kind": "ShiftFrame", "stream_id": "magenta", "seq": 1, "shift": "5us"}],
            notes="Magenta frame 1 reaches the queue at 63 us; only 7 us of its slot remain, less "
                  "than its 8 us transmission time, so it is deferred."),
        "delayed_stream": single_link_document(
            SLOTTED, "delayed_stream",
            [{"kind": "ShiftStream", "stream_id": "magenta", "from_seq": 1, "shift": "5us"}],
            notes="From period 2 on every magenta frame is 5 us late and misses its slot."),
        "continuous_increase": single_link_document(
            UNEQUAL, "continuous_increase",
            [{"kind": "ShiftStream", "stream_id": "small", "from_seq": 1, "shift": "10us"}],
            notes="From period 2 on small frames arrive 10 us late, between medium and large."),
    }
