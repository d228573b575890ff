"""Hand-built SVG charts for queue occupancy and end-to-end latency."""
from __future__ import annotations

from bisect import bisect_left
from xml.sax.saxutils import escape

from .trace import occupancy_series

WIDTH, HEIGHT = 900, 360
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 30, 60
PALETTE = ("#c2185b", "#1e88e5", "#43a047", "#fb8c00", "#8e24aa", "#00897b", "#6d4c41", "#546e7a")


def _left(series, t):
    """Occupancy just before t (left limit)."""
    times = [s[0] for s in series.samples]
    i = bisect_left(times, t) - 1
    if i < 0:
        return 0
    t0, v0 = series.samples[i]
    if i + 1 == len(series.samples):
        return v0
    t1, v1 = series.samples[i + 1]
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0) if t1 > t0 else v0


def _nice(x):
    """Round x up to 1, 2 or 5 times a power of ten."""
    if x <= 0:
        return 1
    p = 1
    while p * 10 <= x:
        p *= 10
    while p > x:
        p /= 10
    for m in (1, 2, 5, 10):
        if m * p >= x:
            return m * p
    return 10 * p


class _Canvas:
    def __init__(self, title, x0, x1, y1, xlabel, ylabel, xscale, yscale):
        self.x0, self.x1 = x0, max(x1, x0 + 1)
        self.y1 = _nice(y1)
        self.xscale, self.yscale = xscale, yscale
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        ]
        self.axes(xlabel, ylabel)

    def x(self, t):
        return round(LEFT + (t - self.x0) * (WIDTH - LEFT - RIGHT) / (self.x1 - self.x0), 2)

    def y(self, v):
        return round(HEIGHT - BOTTOM - float(v) * (HEIGHT - TOP - BOTTOM) / self.y1, 2)

    def axes(self, xlabel, ylabel):
        bottom, right = HEIGHT - BOTTOM, WIDTH - RIGHT
        p = self.parts
        p.append(f'<line x1="{LEFT}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>')
        p.append(f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{bottom}" stroke="black"/>')
        for i in range(6):
            v = self.y1 * i / 5
            y = self.y(v)
            p.append(f'<line x1="{LEFT - 4}" y1="{y}" x2="{right}" y2="{y}" stroke="#eee"/>')
            p.append(f'<text x="{LEFT - 6}" y="{y + 4}" text-anchor="end">{v / self.yscale:g}</text>')
        for i in range(6):
            t = self.x0 + (self.x1 - self.x0) * i / 5
            x = self.x(t)
            p.append(f'<line x1="{x}" y1="{bottom}" x2="{x}" y2="{bottom + 4}" stroke="black"/>')
            p.append(f'<text x="{x}" y="{bottom + 16}" text-anchor="middle">{t / self.xscale:.4g}</text>')
        p.append(f'<text x="{(LEFT + right) / 2}" y="{HEIGHT - 22}" text-anchor="middle">{escape(xlabel)}</text>')
        p.append(f'<text x="16" y="{(TOP + bottom) / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {(TOP + bottom) / 2})">{escape(ylabel)}</text>')

    def legend(self, labels):
        for i, (label, color) in enumerate(labels):
            y = TOP + 10 + 16 * i
            x = WIDTH - RIGHT + 14
            self.parts.append(f'<rect x="{x}" y="{y - 9}" width="12" height="10" fill="{color}"/>')
            self.parts.append(f'<text x="{x + 18}" y="{y}">{escape(label)}</text>')

    def markers(self, step, label):
        if not step:
            return
        k = -(-self.x0 // step)
        n = 0
        while k * step <= self.x1 and n < 400:
            x = self.x(k * step)
            self.parts.append(f'<line x1="{x}" y1="{TOP}" x2="{x}" y2="{HEIGHT - BOTTOM}" '
                              f'stroke="#999" stroke-dasharray="3,3"><title>{escape(label)}</title></line>')
            k += 1
            n += 1

    def svg(self):
        return "\n".join(self.parts + ["</svg>", ""])


def occupancy_svg(log, port, queue, start=None, end=None, period=None, streams=None):
    """Stacked per-stream occupancy of one queue, with its gate state as a band below the axis."""
    frames = [e for e in log.frame_events if e.node == port and e.queue == queue]
    present = sorted({e.stream_id for e in frames})
    colors = {sid: PALETTE[i % len(PALETTE)] for i, sid in enumerate(present)}
    streams = present if streams is None else [s for s in present if s in set(streams)]
    horizon = max((e.time for e in log.frame_events), default=0)
    x0 = 0 if start is None else start
    x1 = horizon if end is None else end
    per_stream = [occupancy_series(log, port, queue, sid) for sid in streams]
    times = sorted({t for s in per_stream for t, _ in s.samples if x0 <= t <= x1} | {x0, x1})
    total = occupancy_series(log, port, queue)
    top = max([total.peak(x0, x1 + 1), 1])
    cv = _Canvas(f"{port} queue {queue}", x0, x1, top, "time (us)", "occupancy (bytes)", 1000, 1)

    # each stream is drawn as the band between the running sum below it and itself
    lower_l = [0] * len(times)
    lower_r = [0] * len(times)
    labels = []
    for sid, series in zip(streams, per_stream):
        color = colors[sid]
        upper_l = [lo + _left(series, t) for lo, t in zip(lower_l, times)]
        upper_r = [lo + series.value_at(t) for lo, t in zip(lower_r, times)]
        edge = []
        for t, a, b in zip(times, upper_l, upper_r):
            edge += [(cv.x(t), cv.y(a)), (cv.x(t), cv.y(b))]
        base = []
        for t, a, b in zip(times, lower_l, lower_r):
            base += [(cv.x(t), cv.y(a)), (cv.x(t), cv.y(b))]
        pts = edge + base[::-1]
        cv.parts.append(f'<polygon fill="{color}" fill-opacity="0.75" stroke="none" points="'
                        + " ".join(f"{x},{y}" for x, y in pts) + '"/>')
        labels.append((sid, color))
        lower_l, lower_r = upper_l, upper_r

    band = HEIGHT - BOTTOM + 24
    gates = [g for g in log.gate_events if g.port == port and g.queue == queue]
    state, changes = True, []
    for g in gates:
        if g.time <= x0:
            state = g.open
        elif g.time < x1:
            changes.append((g.time, g.open))
    cursor = x0
    for t, nxt in changes + [(x1, None)]:
        if t > cursor:
            color = "#66bb6a" if state else "#e53935"
            cv.parts.append(f'<rect x="{cv.x(cursor)}" y="{band}" width="{round(cv.x(t) - cv.x(cursor), 2)}" '
                            f'height="6" fill="{color}"/>')
        cursor, state = t, nxt
    cv.markers(period, "period boundary")
    cv.legend(labels + [("gate open", "#66bb6a"), ("gate closed", "#e53935")])
    return cv.svg()


def latency_svg(latencies, streams=None, start=None, end=None, period=None):
    """One polyline per stream: latency over emission time. `latencies` maps stream -> records."""
    if streams is None:
        streams = sorted(latencies)
    recs = {sid: [r for r in latencies.get(sid, ()) if r.latency_ns is not None
                  and (start is None or r.emit_ns >= start) and (end is None or r.emit_ns <= end)]
            for sid in streams}
    emits = [r.emit_ns for rs in recs.values() for r in rs]
    x0 = min(emits, default=0) if start is None else start
    x1 = max(emits, default=1) if end is None else end
    top = max([r.latency_ns for rs in recs.values() for r in rs] + [1])
    cv = _Canvas("end-to-end latency", x0, x1, top, "emission time (ms)", "latency (us)", 1_000_000, 1000)
    labels = []
    for i, sid in enumerate(streams):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{cv.x(r.emit_ns)},{cv.y(r.latency_ns)}" for r in recs[sid])
        if pts:
            cv.parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        labels.append((sid, color))
    cv.markers(period, "period boundary")
    cv.legend(labels)
    return cv.svg()
