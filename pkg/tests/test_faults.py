import pytest
from hypothesis import given, strategies as st

from tsnsim import faults
from tsnsim.engine import base_emissions, emit_talker_frames
from tsnsim.faults import FaultAction, FaultScenario, Injection
from tsnsim.model import ConfigError, StreamSpec

US = 1000
S = StreamSpec("A", "T", "L", ("SW",), 60 * US, 5 * US, 100)


def times(emissions):
    return [t for t, _ in emissions]


def test_base_emissions():
    assert times(emit_talker_frames(S, periods=3)) == [5 * US, 65 * US, 125 * US]


def test_shift_one_frame():
    sc = FaultScenario((FaultAction(faults.SHIFT_FRAME, "A", seq=2, shift=10 * US),))
    assert times(emit_talker_frames(S, sc, periods=3)) == [5 * US, 65 * US, 135 * US]


def test_drop_one_frame():
    sc = FaultScenario((FaultAction(faults.DROP, "A", seq=1),))
    out = emit_talker_frames(S, sc, periods=3)
    assert times(out) == [5 * US, 125 * US]
    assert [f.seq for _, f in out] == [0, 2]


def test_shift_by_time_picks_nearest_emission():
    sc = FaultScenario((FaultAction(faults.SHIFT_FRAME, "A", at=10_000 * US, shift=10 * US),))
    base = dict((f.seq, t) for t, f in base_emissions(S, 20_000 * US))
    out = dict((f.seq, t) for t, f in emit_talker_frames(S, sc, until=20_000 * US))
    moved = [s for s in base if base[s] != out[s]]
    assert len(moved) == 1
    assert abs(base[moved[0]] - 10_000 * US) <= 30 * US
    assert out[moved[0]] == base[moved[0]] + 10 * US


def test_inject_adds_synthetic_frame_on_stream_route():
    sc = FaultScenario((FaultAction(faults.INJECT, "A", inject=Injection(40 * US, 1000)),))
    out = emit_talker_frames(S, sc, periods=2)
    assert len(out) == 3
    extra = [f for _, f in out if f.synthetic]
    assert extra[0].stream_id == "A+inj" and extra[0].route == "A"
    assert extra[0].priority == S.priority and extra[0].size == 1000


def test_shift_stream_from_seq():
    sc = FaultScenario((FaultAction(faults.SHIFT_STREAM, "A", from_seq=1, shift=3 * US),))
    assert times(emit_talker_frames(S, sc, periods=3)) == [5 * US, 68 * US, 128 * US]


@pytest.mark.parametrize("action", [
    FaultAction(faults.DROP, "nope", seq=0),
    FaultAction(faults.DROP, "A", seq=99),
    FaultAction("Explode", "A", seq=0),
    FaultAction(faults.INJECT, "A"),
])
def test_bad_actions(action):
    with pytest.raises(ConfigError):
        faults.apply(FaultScenario((action,)), base_emissions(S, 200 * US), stream_ids=["A"])


def test_duplicate_single_frame_actions_rejected():
    sc = FaultScenario((FaultAction(faults.DROP, "A", seq=1), FaultAction(faults.SHIFT_FRAME, "A", seq=1, shift=1)))
    with pytest.raises(ConfigError):
        faults.apply(sc, base_emissions(S, 200 * US))


def test_shift_before_zero_rejected():
    sc = FaultScenario((FaultAction(faults.SHIFT_FRAME, "A", seq=0, shift=-6 * US),))
    with pytest.raises(ConfigError):
        faults.apply(sc, base_emissions(S, 200 * US))


# -- properties --------------------------------------------------------------

N = 12
BASE = base_emissions(S, N * S.period)


def key(emissions):
    return [(t, f.stream_id, f.seq, f.size) for t, f in emissions]


@st.composite
def disjoint_actions(draw):
    seqs = draw(st.lists(st.integers(0, N - 1), unique=True, max_size=6))
    acts = []
    for s in seqs:
        if draw(st.booleans()):
            acts.append(FaultAction(faults.DROP, "A", seq=s))
        else:
            acts.append(FaultAction(faults.SHIFT_FRAME, "A", seq=s, shift=draw(st.integers(0, 50 * US))))
    for _ in range(draw(st.integers(0, 3))):
        acts.append(FaultAction(faults.INJECT, "A", inject=Injection(draw(st.integers(0, 700 * US)),
                                                                     draw(st.integers(64, 1500)))))
    return acts


def test_empty_scenario_is_identity():
    assert key(faults.apply(FaultScenario(), BASE)) == key(BASE)


@given(disjoint_actions())
def test_count(acts):
    out = faults.apply(FaultScenario(tuple(acts)), BASE)
    drops = sum(a.kind == faults.DROP for a in acts)
    injects = sum(a.kind == faults.INJECT for a in acts)
    assert len(out) == len(BASE) - drops + injects


@given(disjoint_actions(), st.randoms())
def test_order_independent(acts, rnd):
    shuffled = list(acts)
    rnd.shuffle(shuffled)
    a = faults.apply(FaultScenario(tuple(acts)), BASE)
    b = faults.apply(FaultScenario(tuple(shuffled)), BASE)
    assert key(a) == key(b)


@given(disjoint_actions())
def test_output_sorted(acts):
    out = faults.apply(FaultScenario(tuple(acts)), BASE)
    assert [t for t, _ in out] == sorted(t for t, _ in out)
