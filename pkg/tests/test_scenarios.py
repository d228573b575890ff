import os

import pytest

from tsnsim import scenarios
from tsnsim.engine import run
from tsnsim.model import hyperperiod
from tsnsim.scenarios import network
from tsnsim.validator import validate_config

ROUTES = {
    "A": ("ES1", ("B1", "B2", "B3"), "ES3"),
    "B": ("ES2", ("B2", "B3", "B4"), "ES4"),
    "C": ("ES3", ("B3", "B4", "B1"), "ES1"),
    "D": ("ES4", ("B4", "B1", "B2"), "ES2"),
    "E": ("ES3", ("B3", "B4", "B5"), "ES5"),
    "F": ("ES4", ("B4", "B5", "B2"), "ES2"),
    "G": ("ES5", ("B5", "B2", "B1"), "ES1"),
}


@pytest.mark.parametrize("name", sorted(scenarios.documents()))
def test_checked_in_files_match_generator(name):
    with open(scenarios.path(name), encoding="utf-8") as fh:
        assert fh.read() == scenarios.render_json(scenarios.documents()[name])


def test_no_stray_files():
    assert scenarios.names() == sorted(scenarios.documents())


@pytest.mark.parametrize("name", sorted(scenarios.documents()))
def test_bundled_configs_validate(name):
    assert validate_config(scenarios.load(name).config) == []


SINGLE = [n for n in sorted(scenarios.documents()) if not n.startswith("network")]


@pytest.mark.parametrize("name", SINGLE)
def test_single_link_expectations(name):
    sc = scenarios.load(name)
    assert sc.expected
    assert sc.failures(run(sc.config)) == []


@pytest.mark.slow
@pytest.mark.parametrize("name", ["network_baseline", "network_late_frame_psfp"])
def test_network_expectations(name):
    sc = scenarios.load(name)
    assert sc.failures(run(sc.config)) == []


def test_network_routes_fidelity():
    cfg = scenarios.build_table1_network()
    got = {s.stream_id: (s.talker, s.path, s.listener) for s in cfg.streams}
    assert got == ROUTES
    assert network.ROUTES == ROUTES


def test_network_shape():
    cfg = scenarios.build_table1_network()
    topo = cfg.topology
    assert sorted(n for n, k in topo.nodes.items() if k == "bridge") == ["B1", "B2", "B3", "B4", "B5"]
    assert sorted(n for n, k in topo.nodes.items() if k == "end_station") == [f"ES{i}" for i in range(1, 6)]
    assert {l.rate for l in topo.links} == {10**9}
    for b in ("B1", "B2", "B3", "B4", "B5"):
        bridges = [l for l in topo.links if b in (l.node_a, l.node_b) and not {l.node_a, l.node_b} & set(
            f"ES{i}" for i in range(1, 6))]
        assert len(bridges) in (2, 3)
    assert {s.period for s in cfg.streams} == {60_000}
    assert hyperperiod(cfg.streams) == 60_000
    assert all(250 <= s.frame_size <= 1250 for s in cfg.streams)


def test_reconstruction_has_no_link_conflicts():
    assert network.link_conflicts(network.SIZES, network.OFFSETS, network.MARGIN, network.HOLDS) == []


def test_late_frame_is_baseline_plus_one_shift():
    docs = scenarios.documents()
    base, late = docs["network_baseline"], docs["network_late_frame"]
    strip = lambda d: {k: v for k, v in d.items() if k not in ("name", "notes", "scenario")}
    assert strip(base) == strip(late)
    assert late["scenario"]["actions"] == [
        {"kind": "ShiftFrame", "stream_id": "A", "at": "10ms", "shift": "10us"}]


def test_resolve():
    assert scenarios.resolve("scenarios/no_fault") == scenarios.path("no_fault")
    assert scenarios.resolve("no_fault.json") == scenarios.path("no_fault")
    assert scenarios.resolve("elsewhere/x.json") == "elsewhere/x.json"
    with pytest.raises(KeyError):
        scenarios.path("missing_one")


def test_write_all(tmp_path):
    scenarios.write_all(tmp_path)
    assert sorted(os.listdir(tmp_path)) == sorted(f"{n}.json" for n in scenarios.documents())
