import math

import pytest

from lossy_sensing.bounds import Divergent
from lossy_sensing.fockspace import ChannelParams, InputState, Parameter
from lossy_sensing.report import Settings, SweepSpec, fmt, point_report, run_sweep, tagged

G, NT = Parameter.GAMMA, Parameter.THERMAL_OCCUPATION


def spec(**kw):
    base = dict(parameter=G, axis="nt", start=0.5, stop=2.0, points=4, input=InputState.fock(1),
                quantities=("exact_counting", "purification_bound"), eta=0.9)
    base.update(kw)
    return SweepSpec(**base)


def test_point_optimal_time():
    r = point_report(G, ChannelParams(0.8, 0), InputState.fock(1))
    for v in (r.purification_bound, r.sensitivity_bound, r.exact_counting):
        assert v == pytest.approx(1.2426, abs=1e-4)
    assert r.reliable and not r.ordering_violations()


def test_point_vacuum_steady_state():
    r = point_report(NT, ChannelParams.from_eta(1e-12, 1.0), InputState.vacuum())
    assert r.purification_bound == pytest.approx(math.sqrt(2), rel=1e-9)
    assert r.exact_counting == pytest.approx(math.sqrt(2), rel=1e-9)
    assert r.quantities()["steady_state_normalized"] == pytest.approx(1.0, rel=1e-9)


def test_point_stationary_thermal_input():
    r = point_report(G, ChannelParams(0.3, 1.0), InputState.thermal(1.0))
    assert isinstance(r.exact_counting, Divergent)
    d = r.to_dict()
    assert d["quantities"]["exact_counting"] == {"value": None, "reason": "stationary input"}
    assert d["quantities"]["sensitivity"]["value"] is None


def test_point_sequential_flags_expansion_warning():
    r = point_report(NT, ChannelParams(1.0, 1.0), InputState.fock(1), slice_x=0.05)
    assert "expansion_warning" in r.flags
    r = point_report(NT, ChannelParams(1.0, 1.0), InputState.fock(1), slice_x=0.001)
    assert r.sequential == pytest.approx(math.sqrt(0.2), rel=0.01)
    assert "expansion_warning" not in r.flags


def test_sequential_divergent_cases():
    r = point_report(G, ChannelParams(1.0, 0.5), InputState.fock(1), slice_x=0.01)
    assert isinstance(r.sequential, Divergent)
    r = point_report(G, ChannelParams(0.5, 0), InputState.fock(1), slice_x=1.0)
    assert "slice" in r.sequential.reason


def test_unreliable_flag_on_aggressive_floor():
    r = point_report(G, ChannelParams(0.5, 2.0), InputState.fock(1), settings=Settings(p_floor=1e-3))
    assert not r.reliable and "unreliable" in r.flags


def test_tagged_and_fmt():
    assert tagged(None) == {"value": None, "reason": "not computed"}
    assert tagged(Divergent("x")) == {"value": None, "reason": "x"}
    assert tagged(1 / 3) == {"value": 0.333333333333, "reason": None}
    assert fmt(None) == "" and fmt(math.inf) == "" and fmt(1 / 3) == "0.333333333333" and fmt(7) == "7"


@pytest.mark.parametrize(
    "kw,field",
    [
        (dict(axis="time"), "axis"),
        (dict(start=2.0, stop=1.0), "range"),
        (dict(points=1), "range"),
        (dict(quantities=()), "quantities"),
        (dict(quantities=("bogus",)), "quantities"),
        (dict(quantities=("steady_state_normalized",)), "quantities"),
        (dict(n_T=1.0), "nt"),
        (dict(eta=None), "eta"),
        (dict(axis="eta", start=0.1, stop=1.5, n_T=1.0, eta=None), "range"),
        (dict(quantities=("sequential",)), "slice_x"),
    ],
)
def test_invalid_specs_name_the_field(kw, field):
    with pytest.raises(ValueError, match=f"^{field}"):
        spec(**kw)


def test_two_point_sweep():
    t = run_sweep(spec(points=2))
    assert t.columns == ["series", "nt", "exact_counting", "purification_bound", "dim", "dropped_mass", "flags"]
    assert len(t.rows) == 2
    assert t.column("nt") == [0.5, 2.0]


def test_sweep_deterministic():
    a, b = run_sweep(spec(points=6)), run_sweep(spec(points=6))
    assert a.rows == b.rows and a.metadata == b.metadata


def test_sweep_divergent_cells_are_empty_and_flagged():
    s = spec(input=InputState.thermal(1.0), start=0.5, stop=1.5, points=3)
    t = run_sweep(s)
    mid = t.rows[1]
    assert mid[1] == 1.0 and mid[2] is None
    assert "exact_counting:divergent(stationary input)" in mid[-1]


def test_every_row_reliable_or_flagged():
    t = run_sweep(spec(start=0.1, stop=10, points=12))
    for row in t.rows:
        assert row[-2] < 1e-9 or "unreliable" in row[-1]


def test_from_dict_accepts_x_or_eta():
    d = {"parameter": "nt", "axis": "nt", "range": [0.1, 1, 3], "input": "fock:1",
         "quantities": ["exact_counting"], "x": 1.0}
    assert SweepSpec.from_dict(d).eta == pytest.approx(math.exp(-2))
    with pytest.raises(ValueError, match="either eta or x"):
        SweepSpec.from_dict({**d, "eta": 0.5})
