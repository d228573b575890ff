import copy

import pytest

from tsnsim.config import config_from_dict
from tsnsim.scenarios import single_link
from tsnsim.validator import check_feasibility, schedule_cycle, validate_config

US = 1000


def doc(name="no_fault"):
    return copy.deepcopy(single_link.documents()[name])


def codes(d):
    return [x.code for x in validate_config(config_from_dict(d))]


def test_bundled_single_link_configs_are_valid():
    for name, d in single_link.documents().items():
        assert validate_config(config_from_dict(d)) == [], name


def test_gcl_gap_reported():
    d = doc()
    d["gcls"]["SW->L"]["entries"] = [{"start": 0, "end": "30us", "gates": [7]},
                                     {"start": "40us", "end": "50us", "gates": []}]
    diags = validate_config(config_from_dict(d))
    assert any("GCL gap [30000, 40000)" in str(x) for x in diags)


def test_nonexistent_link_reported():
    d = doc()
    d["topology"]["nodes"].append({"id": "X", "kind": "bridge"})
    d["streams"][0]["path"] = ["X"]
    assert "path_link" in codes(d)


def test_all_violations_returned_not_just_first():
    d = doc()
    d["streams"][0]["send_offset"] = "80us"
    d["streams"][1]["frame_size"] = 20
    d["gcls"]["SW->L"]["cycle_time"] = "70us"
    found = set(codes(d))
    assert {"stream_offset", "frame_size", "commensurability", "gcl_coverage"} <= found


def test_fault_reference_checked_against_emissions():
    d = doc()
    d["scenario"]["actions"] = [{"kind": "DropFrame", "stream_id": "magenta", "seq": 10_000}]
    assert "fault_reference" in codes(d)
    d["scenario"]["actions"] = [{"kind": "DropFrame", "stream_id": "ghost", "seq": 0}]
    assert "fault_stream" in codes(d)


def test_no_fault_is_feasible_and_drains():
    rep = check_feasibility(config_from_dict(doc()))
    assert rep.feasible, rep.reasons
    assert rep.slot_misses == 0 and rep.undelivered == 0
    assert rep.peak_backlog["SW->L/7"] == 1500
    # magenta waits from 8 us to the 20 us opening, then takes 8 us
    assert rep.max_latency == {"magenta": 28 * US, "blue": 26 * US}


def test_feasibility_ignores_scenario_faults():
    assert check_feasibility(config_from_dict(doc("late_frame"))).feasible


def test_slot_too_short_is_a_miss():
    layout = {"period": "60us", "streams": [("big", "T", 1000, "0us")], "windows": [("20us", "24us")]}
    rep = check_feasibility(config_from_dict(single_link.single_link_document(layout, "short")))
    assert rep.slot_misses > 0 and not rep.feasible
    assert rep.max_latency["big"] is None
    assert "slot misses" in rep.to_text()


def test_feasibility_deterministic_and_idempotent():
    cfg = config_from_dict(doc("no_fault"))
    assert check_feasibility(cfg).as_dict() == check_feasibility(cfg).as_dict()


def test_schedule_cycle_includes_gate_cycles():
    d = doc()
    d["gcls"]["SW->L"]["cycle_time"] = "100us"
    d["gcls"]["SW->L"]["entries"] = [{"start": 0, "end": "100us", "gates": [7]}]
    assert schedule_cycle(config_from_dict(d)) == 100 * US


@pytest.mark.parametrize("name", ["continuous_increase"])
def test_continuous_increase_baseline_is_feasible(name):
    assert check_feasibility(config_from_dict(doc(name))).feasible
