"""Machine-checkable expectations for each bundled scenario.

Times below are hand-derived from the layouts in ``single_link``: at
1 Gbit/s a 1000 B frame takes 8 us and a 500 B frame 4 us, and frames reach
SW one transmission time after emission.
"""
from __future__ import annotations

from ..trace import DROP, EMIT, TX_START, all_latencies, occupancy_series

US = 1000
PORT = "SW->L"


def tx_starts(log, stream, port=PORT):
    return {e.seq: e.time for e in log.frame_events
            if e.event == TX_START and e.node == port and e.stream_id == stream}


def _drops(log):
    return [e for e in log.frame_events if e.event == DROP]


def _boundaries(config, first=1, count=None):
    period = config.streams[0].period
    last = config.sim_end // period - 1
    if count is not None:
        last = min(last, first + count - 1)
    return [k * period for k in range(first, last + 1)]


def no_drops(log, config):
    return not _drops(log)


def drains_each_period(log, config):
    series = occupancy_series(log, PORT, 7)
    return all(series.value_at(t) == 0 for t in _boundaries(config))


def _timeline(stream, offset_us, first=0):
    """Check that `stream` starts transmitting at k*50us + offset for all k >= first."""
    def check(log, config):
        starts = tx_starts(log, stream)
        period = config.streams[0].period
        return bool(starts) and all(t == seq * period + offset_us * US
                                    for seq, t in starts.items() if seq >= first)
    return check


def _early(log, config):
    return tx_starts(log, "blue")[1] == 70 * US and tx_starts(log, "magenta")[1] == 74 * US


def _missing(log, config):
    emitted = {e.seq for e in log.frame_events if e.event == EMIT and e.stream_id == "magenta"}
    return 1 not in emitted and tx_starts(log, "blue")[1] == 70 * US


def _one_extra_frame(log, config):
    series = occupancy_series(log, PORT, 7)
    return all(series.value_at(t) == 500 for t in _boundaries(config, first=2))


def _peaks_increase(hyperperiods):
    def check(log, config):
        series = occupancy_series(log, PORT, 7)
        hp = 60 * US
        peaks = [series.peak(k * hp, (k + 1) * hp) for k in range(1, hyperperiods + 1)]
        return all(a < b for a, b in zip(peaks, peaks[1:]))
    return check


def _network_latency_below(limit_ns):
    def check(log, config):
        lat = all_latencies(log)
        return len(lat) == 7 and all(r.latency_ns is not None and r.latency_ns < limit_ns
                                     for recs in lat.values() for r in recs)
    return check


def _blowup(factor, by_ns):
    def check(log, config):
        for recs in all_latencies(log).values():
            base = recs[0].latency_ns
            if not any(r.latency_ns is not None and r.latency_ns > factor * base and r.deliver_ns <= by_ns
                       for r in recs):
                return False
        return True
    return check


def _only_faulty_dropped(log, config):
    drops = _drops(log)
    return len(drops) == 1 and drops[0].stream_id == "A" and drops[0].detail == "psfp_gate_closed"


CHECKS = {
    "no_fault": [
        ("no drops", no_drops),
        ("SW->L/7 is empty at every period boundary", drains_each_period),
        ("magenta starts at 20 us into each period", _timeline("magenta", 20)),
        ("blue starts at 28 us into each period", _timeline("blue", 28)),
    ],
    "early": [
        ("early blue frame 1 goes first at 70 us, magenta follows at 74 us", _early),
        ("no drops", no_drops),
    ],
    "missing": [
        ("magenta frame 1 never emitted; blue 1 leaves at gate opening (70 us)", _missing),
    ],
    "additional": [
        ("one extra frame (500 B) buffered at each later period boundary", _one_extra_frame),
        ("magenta shifted to blue's slot from frame 1", _timeline("magenta", 26, first=1)),
    ],
    "late_frame": [
        ("magenta moves to the slot at 26 us from frame 1", _timeline("magenta", 26, first=1)),
        ("blue moves to the next period's slot at 10 us from frame 1", _timeline("blue", 60, first=1)),
    ],
    "delayed_stream": [
        ("magenta uses blue's slot from frame 1", _timeline("magenta", 26, first=1)),
        ("blue uses magenta's next slot from frame 1", _timeline("blue", 60, first=1)),
    ],
    "continuous_increase": [
        ("peak occupancy grows for 50 hyperperiods", _peaks_increase(50)),
        ("no drops with unbounded queues", no_drops),
    ],
    "network_baseline": [
        ("every frame delivered in under 100 us", _network_latency_below(100 * US)),
        ("no drops", no_drops),
    ],
    "network_late_frame": [
        ("every stream exceeds 10x its baseline latency within 500 ms of the fault",
         _blowup(10, 510_000 * US)),
    ],
    "network_late_frame_psfp": [
        ("only the shifted frame of A is dropped", _only_faulty_dropped),
    ],
}
