"""Independent reference models used by the tests.

Neither model imports the simulator. The timeline oracle walks time in fixed
steps over a single gated FIFO; the meter oracle keeps its buckets as exact
fractions of a byte.
"""
from fractions import Fraction

STEP = 1000  # ns; every time in the single-link layouts is a whole microsecond
RATE = 10**9


def tx_ns(size):
    return size * 8 * 10**9 // RATE


def emissions(streams, period, end, drop=(), shift=None, stream_shift=None, inject=()):
    """Talker emissions as (time, stream, seq, size), faults applied by hand.

    streams: [(stream, size, offset)]; drop: {(stream, seq)}; shift: {(stream, seq): dt};
    stream_shift: {stream: (from_seq, dt)}; inject: [(time, stream, size)].
    """
    out = []
    for sid, size, offset in streams:
        seq = 0
        while offset + seq * period < end:
            t = offset + seq * period
            if (sid, seq) not in drop:
                t += (shift or {}).get((sid, seq), 0)
                frm, dt = (stream_shift or {}).get(sid, (None, 0))
                if frm is not None and seq >= frm:
                    t += dt
                out.append((t, sid, seq, size))
            seq += 1
    for i, (t, sid, size) in enumerate(sorted(inject)):
        out.append((t, sid + "+inj", i, size))
    return sorted(out)


def gate_timeline(windows, period, end):
    """Per step: True if the q7 gate is open during [t, t + STEP)."""
    open_at = []
    for t in range(0, end, STEP):
        ph = t % period
        open_at.append(any(s <= ph < e for s, e in windows))
    return open_at


def single_queue(emits, windows, period, end):
    """Step through a talker->SW->L link with one gated FIFO at SW.

    Returns (tx_start {(stream, seq): t}, occupancy_at(t) in bytes after events at t).
    """
    gates = gate_timeline(windows, period, end)
    arrivals = {}
    for t, sid, seq, size in emits:
        arrivals.setdefault(t + tx_ns(size), []).append((t, sid, seq, size))
    queue = []
    busy_until = 0
    current = None
    starts = {}
    occupancy = {}
    held = 0
    for i, t in enumerate(range(0, end, STEP)):
        if current is not None and t >= busy_until:
            held -= current[3]
            current = None
        for a in sorted(arrivals.get(t, [])):
            queue.append(a)
            held += a[3]
        if current is None and queue and gates[i]:
            need = tx_ns(queue[0][3])
            # count how long the gate stays open from here
            j = i
            while j < len(gates) and gates[j]:
                j += 1
            if (j - i) * STEP >= need:
                current = queue.pop(0)
                starts[(current[1], current[2])] = t
                busy_until = t + need
        occupancy[t] = held
    return starts, occupancy


class RefMeter:
    """Color-blind two-rate three-color marker with exact fractional buckets (bytes)."""

    def __init__(self, cir, cbs, eir, ebs):
        self.cir, self.cbs, self.eir, self.ebs = cir, cbs, eir, ebs
        self.c = Fraction(cbs)
        self.e = Fraction(ebs)
        self.last = 0

    def color(self, size, t):
        dt = Fraction(t - self.last, 10**9)
        self.last = t
        self.c = min(self.c + dt * self.cir / 8, Fraction(self.cbs))
        self.e = min(self.e + dt * self.eir / 8, Fraction(self.ebs))
        if size <= self.c:
            self.c -= size
            return "green"
        if size <= self.e:
            self.e -= size
            return "yellow"
        return "red"
