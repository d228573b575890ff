"""Declarative timing faults applied to talker emissions."""
from __future__ import annotations

from dataclasses import dataclass, field

from .model import ConfigError, Frame

DROP = "DropFrame"
INJECT = "InjectFrame"
SHIFT_FRAME = "ShiftFrame"
SHIFT_STREAM = "ShiftStream"
KINDS = (DROP, INJECT, SHIFT_FRAME, SHIFT_STREAM)

SYNTHETIC_SUFFIX = "+inj"


@dataclass(frozen=True)
class Injection:
    time: int
    size: int
    priority: int | None = None


@dataclass(frozen=True)
class FaultAction:
    kind: str
    stream_id: str
    seq: int | None = None
    shift: int = 0
    inject: Injection | None = None
    from_seq: int = 0
    # Alternative to seq: pick the emission of the stream nearest this time.
    at: int | None = None

    @property
    def single_frame(self):
        return self.kind in (DROP, SHIFT_FRAME)


@dataclass(frozen=True)
class FaultScenario:
    actions: tuple = field(default_factory=tuple)

    def for_stream(self, stream_id):
        return FaultScenario(tuple(a for a in self.actions if a.stream_id == stream_id))


def synthetic_id(stream_id):
    return stream_id + SYNTHETIC_SUFFIX


def _resolve_seq(action, by_seq, times):
    if action.seq is not None:
        if action.seq not in by_seq:
            raise ConfigError(f"{action.kind}: stream {action.stream_id!r} has no frame seq={action.seq}")
        return action.seq
    if action.at is None:
        raise ConfigError(f"{action.kind} on {action.stream_id!r} needs seq or at")
    if not times:
        raise ConfigError(f"{action.kind}: stream {action.stream_id!r} emits nothing")
    # nearest emission; ties go to the earlier one
    return min(times, key=lambda ts: (abs(ts[0] - action.at), ts[0]))[1]


def apply(scenario, emissions, stream_ids=None, streams=None):
    """Perturb a time-sorted list of (time, Frame) emissions.

    `streams` maps stream id -> StreamSpec and supplies defaults for injected
    frames; `stream_ids` restricts which streams actions may reference.
    """
    if scenario is None or not scenario.actions:
        return list(emissions)
    known = set(stream_ids) if stream_ids is not None else {f.stream_id for _, f in emissions}
    if streams:
        known |= set(streams)
    by_stream = {}
    for t, f in emissions:
        by_stream.setdefault(f.stream_id, {})[f.seq] = t

    offsets = {}
    dropped = set()
    stream_shifts = []
    injections = {}
    seen_single = set()
    for a in scenario.actions:
        if a.kind not in KINDS:
            raise ConfigError(f"unknown fault kind {a.kind!r}")
        if a.stream_id not in known:
            raise ConfigError(f"{a.kind} references unknown stream {a.stream_id!r}")
        seqs = by_stream.get(a.stream_id, {})
        if a.kind == INJECT:
            if a.inject is None:
                raise ConfigError(f"InjectFrame on {a.stream_id!r} needs inject parameters")
            injections.setdefault(a.stream_id, []).append(a.inject)
        elif a.kind == SHIFT_STREAM:
            stream_shifts.append(a)
        else:
            seq = _resolve_seq(a, seqs, sorted((t, s) for s, t in seqs.items()))
            if (a.stream_id, seq) in seen_single:
                raise ConfigError(f"more than one single-frame action on {a.stream_id!r} seq={seq}")
            seen_single.add((a.stream_id, seq))
            if a.kind == DROP:
                dropped.add((a.stream_id, seq))
            else:
                offsets[(a.stream_id, seq)] = a.shift

    out = []
    for t, f in emissions:
        k = f.key
        if k in dropped:
            continue
        shift = offsets.get(k, 0)
        for a in stream_shifts:
            if a.stream_id == f.stream_id and f.seq >= a.from_seq:
                shift += a.shift
        if shift:
            t += shift
            if t < 0:
                raise ConfigError(f"fault moves {k} before time zero")
            f = Frame(f.stream_id, f.seq, f.size, f.priority, t, route=f.route)
        out.append((t, f))

    for sid, injs in injections.items():
        spec = streams.get(sid) if streams else None
        template = next((f for _, f in emissions if f.stream_id == sid), None)
        for n, inj in enumerate(sorted(injs, key=lambda i: (i.time, i.size, i.priority or 0))):
            if inj.priority is not None:
                prio = inj.priority
            elif spec is not None:
                prio = spec.priority
            elif template is not None:
                prio = template.priority
            else:
                raise ConfigError(f"InjectFrame on {sid!r} needs an explicit priority")
            out.append((inj.time, Frame(synthetic_id(sid), n, inj.size, prio, inj.time,
                                        route=sid, synthetic=True)))
    out.sort(key=lambda e: (e[0], e[1].stream_id, e[1].seq))
    return out
