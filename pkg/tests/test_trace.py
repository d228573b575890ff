import filecmp
import os

import pytest

from tsnsim.config import config_from_dict
from tsnsim.engine import run
from tsnsim.scenarios import single_link
from tsnsim.trace import (FRAME_COLUMNS, LATENCY_COLUMNS, QueryError, TraceIOError, TraceLog, export_csv,
                          latency_series, load_trace, occupancy_series, read_latency_csv, save_trace)

US = 1000


@pytest.fixture(scope="module")
def shared():
    doc = single_link.single_link_document(single_link.SHARED_WINDOW, "shared", sim_end="300us")
    return run(config_from_dict(doc))


def test_occupancy_steps_up_then_drains_linearly(shared):
    occ = occupancy_series(shared, "SW->L", 7)
    # first period: 1000 B then 500 B arrive before the window, then both drain back to back
    first = [s for s in occ.samples if s[0] <= 60 * US]
    peak = max(v for _, v in first)
    assert peak == 1500
    assert occ.value_at(20 * US) == 1500
    assert occ.value_at(24 * US) == 1000  # halfway through the 1000 B frame
    assert occ.value_at(28 * US) == 500
    assert occ.value_at(32 * US) == 0
    assert all(v >= 0 for _, v in occ.samples)


def test_occupancy_of_idle_queue_is_zero(shared):
    occ = occupancy_series(shared, "SW->L", 3)
    assert occ.value_at(123 * US) == 0 and occ.peak() == 0


def test_unknown_port_and_queue(shared):
    with pytest.raises(QueryError):
        occupancy_series(shared, "X->Y", 7)
    with pytest.raises(QueryError):
        occupancy_series(shared, "SW->L", 8)
    with pytest.raises(QueryError):
        latency_series(shared, "nope")


def test_additional_frame_stays_buffered_across_boundaries():
    doc = single_link.documents()["additional"]
    log = run(config_from_dict(doc))
    occ = occupancy_series(log, "SW->L", 7)
    boundaries = [occ.value_at(k * 50 * US) for k in range(3, 12)]
    assert set(boundaries) == {500}


def test_latency_omits_in_flight_frames(shared):
    doc = single_link.single_link_document(single_link.SHARED_WINDOW, "cut", sim_end="275us")
    lat = latency_series(run(config_from_dict(doc)), "magenta")
    # seq 5 is emitted at 250 us but its window only opens at 270 us
    assert [r.seq for r in lat] == list(range(5))
    assert all(not r.dropped for r in lat)


def test_empty_log_exports_header_only(tmp_path):
    path = tmp_path / "frames.csv"
    export_csv(TraceLog(), path)
    assert path.read_text() == ",".join(FRAME_COLUMNS) + "\n"
    export_csv({}, tmp_path / "lat.csv")
    assert (tmp_path / "lat.csv").read_text() == ",".join(LATENCY_COLUMNS) + "\n"


def test_one_frame_gives_one_row_per_lifecycle_event(tmp_path):
    doc = single_link.single_link_document(
        {"period": "60us", "streams": [("s", "T", 100, "1us")], "windows": [("0us", "60us")]}, "one", sim_end="60us")
    log = run(config_from_dict(doc))
    export_csv(log, tmp_path / "f.csv")
    rows = (tmp_path / "f.csv").read_text().splitlines()[1:]
    assert [r.split(",")[4] for r in rows] == ["emit", "enqueue", "tx_start", "tx_end", "arrive",
                                                "enqueue", "tx_start", "tx_end", "deliver"]


def test_round_trip(tmp_path, shared):
    save_trace(shared, tmp_path)
    assert load_trace(tmp_path) == shared
    lat = read_latency_csv(tmp_path / "latency.csv")
    assert lat["blue"] == latency_series(shared, "blue")


def test_identical_runs_identical_files(tmp_path):
    doc = single_link.documents()["late_frame"]
    for sub in ("a", "b"):
        save_trace(run(config_from_dict(doc)), tmp_path / sub)
    for name in ("frames.csv", "gates.csv", "meters.csv", "latency.csv"):
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False)


def test_io_errors_name_the_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(TraceIOError) as exc:
        save_trace(TraceLog(), os.path.join(blocker, "sub"))
    assert str(blocker) in str(exc.value)
    with pytest.raises(TraceIOError):
        load_trace(tmp_path / "missing")
