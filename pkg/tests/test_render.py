import xml.etree.ElementTree as ET

from tsnsim.config import config_from_dict
from tsnsim.engine import run
from tsnsim.render import PALETTE, latency_svg, occupancy_svg
from tsnsim.scenarios import single_link
from tsnsim.trace import TraceLog, all_latencies

NS = "{http://www.w3.org/2000/svg}"


def no_fault_log():
    return run(config_from_dict(single_link.single_link_document(single_link.SHARED_WINDOW, "nf", sim_end="150us")))


def test_occupancy_chart_structure():
    svg = occupancy_svg(no_fault_log(), "SW->L", 7, period=50_000)
    root = ET.fromstring(svg)
    polys = root.findall(f".//{NS}polygon")
    assert [p.get("fill") for p in polys] == [PALETTE[0], PALETTE[1]]  # blue, magenta in id order
    fills = {r.get("fill") for r in root.findall(f".//{NS}rect")}
    assert {"#66bb6a", "#e53935"} <= fills
    assert "period boundary" in svg
    assert "href" not in svg  # self-contained


def test_empty_log_gives_axes_and_band_only():
    svg = occupancy_svg(TraceLog(ports=("SW->L",)), "SW->L", 7)
    root = ET.fromstring(svg)
    assert root.findall(f".//{NS}polygon") == []
    assert root.findall(f".//{NS}line")


def test_markers_follow_requested_period():
    log = no_fault_log()
    a = occupancy_svg(log, "SW->L", 7, period=50_000)
    b = occupancy_svg(log, "SW->L", 7, period=150_000)
    assert a.count("stroke-dasharray") > b.count("stroke-dasharray")


def test_latency_chart_one_line_per_stream():
    svg = latency_svg(all_latencies(no_fault_log()), period=None)
    root = ET.fromstring(svg)
    assert len(root.findall(f".//{NS}polyline")) == 2


def test_rendering_is_deterministic():
    log = no_fault_log()
    assert occupancy_svg(log, "SW->L", 7) == occupancy_svg(log, "SW->L", 7)
