import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bjj.core import (Dataset, HoldGroup, JunctionState, PendulumParams, Trajectory, TwoModeParams, angular_to_hz,
                      dumps, hz_to_angular, loads, regime_ratio, wrap_phase)

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.floats(min_value=-1e9, max_value=1e9, allow_nan=False))
def test_hz_round_trip(f):
    back = angular_to_hz(hz_to_angular(f))
    assert back == pytest.approx(f, rel=1e-12, abs=1e-300)


def test_hz_values():
    p = TwoModeParams.from_hz(3200, 0.71, 8.0, 46.0, -1.0)
    assert p.interaction == pytest.approx(2 * math.pi * 0.71, rel=1e-15)
    assert p.tunneling_hz == pytest.approx(8.0, rel=1e-12)
    assert p.detuning_hz == pytest.approx(-1.0, rel=1e-12)


@pytest.mark.parametrize("n, u_hz, j_hz, expected, tol", [
    (3200, 0.71, 8.0, 142.0, 1e-9),
    (3400, 0.86, 32.0, 45.7, 0.05),
])
def test_regime_ratio_rows(n, u_hz, j_hz, expected, tol):
    assert regime_ratio(TwoModeParams.from_hz(n, u_hz, j_hz)) == pytest.approx(expected, abs=tol)


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_regime_ratio_equal_energies(x):
    assert regime_ratio(TwoModeParams(2, x, x)) == pytest.approx(1.0, rel=1e-14)


def test_regime_ratio_zero_tunneling():
    with pytest.raises(ZeroDivisionError, match="tunnel"):
        regime_ratio(TwoModeParams(100, 1.0, 0.0))


@pytest.mark.parametrize("kwargs", [
    dict(atom_number=1, interaction=1.0, tunneling=1.0),
    dict(atom_number=2.5, interaction=1.0, tunneling=1.0),
    dict(atom_number=10, interaction=0.0, tunneling=1.0),
    dict(atom_number=10, interaction=1.0, tunneling=-1.0),
    dict(atom_number=10, interaction=1.0, tunneling=1.0, viscosity=-0.1),
    dict(atom_number=10, interaction=1.0, tunneling=1.0, detuning=math.nan),
])
def test_two_mode_invariants(kwargs):
    with pytest.raises(ValueError):
        TwoModeParams(**kwargs)


@pytest.mark.parametrize("field, value", [
    ("phase_amplitude", 0.0), ("phase_amplitude", math.pi), ("imbalance_amplitude", 0.0),
    ("imbalance_amplitude", 1.0), ("frequency", 0.0), ("decay_time", 0.0), ("decay_time", -1.0),
])
def test_pendulum_invariants(field, value):
    base = dict(phase_amplitude=1.0, imbalance_amplitude=0.1, frequency=1000.0, decay_time=0.01)
    base[field] = value
    with pytest.raises(ValueError, match=field):
        PendulumParams(**base)


@given(st.floats(min_value=1e-6, max_value=math.pi - 1e-6))
def test_modulus_in_unit_interval(phi0):
    pp = PendulumParams(phi0, 0.1, 1.0, math.inf)
    assert 0 < pp.modulus < 1
    assert pp.is_undamped


@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_wrap_phase_range(phi):
    w = wrap_phase(phi)
    assert -math.pi < w <= math.pi
    assert math.cos(w) == pytest.approx(math.cos(phi), abs=1e-9)


def test_wrap_phase_boundary():
    assert wrap_phase(-math.pi) == math.pi
    assert wrap_phase(3 * math.pi) == pytest.approx(math.pi)
    np.testing.assert_allclose(wrap_phase([0.0, 2 * math.pi + 0.1]), [0.0, 0.1], atol=1e-12)


def test_junction_state_bounds():
    JunctionState(1.0, 0.0)
    with pytest.raises(ValueError):
        JunctionState(1.0001, 0.0)


@given(st.lists(st.tuples(st.floats(-1, 1), finite), min_size=1, max_size=30))
def test_trajectory_csv_round_trip(rows):
    t = np.cumsum(np.full(len(rows), 0.37)) - 0.37
    traj = Trajectory(t, [r[0] for r in rows], [r[1] for r in rows])
    back = Trajectory.from_csv(traj.to_csv())
    assert back == traj
    assert traj.to_csv().splitlines()[0] == "t_s,n,phi_rad"


def test_trajectory_rejects_unordered_times():
    with pytest.raises(ValueError, match="increasing"):
        Trajectory([0.0, 0.0], [0.0, 0.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        Trajectory([0.0, 1.0], [0.0], [0.0, 1.0])


def test_trajectory_is_read_only():
    traj = Trajectory([0.0, 1.0], [0.0, 0.1], [0.0, 0.2])
    with pytest.raises(ValueError):
        traj.phase[0] = 1.0


def test_trajectory_keeps_phase_unwrapped():
    traj = Trajectory([0.0, 1.0], [0.0, 0.0], [0.0, 10.0])
    assert Trajectory.from_csv(traj.to_csv()).phase[1] == 10.0


def test_hold_group_validation():
    with pytest.raises(ValueError, match="no shots"):
        HoldGroup(0.0)
    with pytest.raises(ValueError, match="count pair"):
        HoldGroup(0.0, counts=((0, 0),))
    with pytest.raises(ValueError, match="non-negative"):
        HoldGroup(-1.0, phases=(0.1,))
    g = HoldGroup(0.0, phases=(0.1,), counts=((60, 40),))
    assert g.channels == ("phase", "imbalance")
    assert g.imbalances[0] == pytest.approx(0.2)


shots = st.lists(st.floats(-math.pi, math.pi), min_size=1, max_size=6)
pairs = st.lists(st.tuples(st.integers(0, 5000), st.integers(1, 5000)), min_size=1, max_size=6)


@given(st.lists(st.tuples(shots, pairs), min_size=1, max_size=8))
def test_dataset_round_trip_is_exact(groups):
    ds = Dataset(3000, tuple(HoldGroup(i * 5e-4, tuple(p), tuple(c)) for i, (p, c) in enumerate(groups)),
                 {"note": "x"})
    back = Dataset.from_dict(loads(dumps(ds.to_dict())))
    assert back == ds


def test_dataset_sorts_and_rejects_duplicates():
    ds = Dataset(10, (HoldGroup(2.0, (0.1,)), HoldGroup(1.0, (0.2,))))
    assert [g.hold_time for g in ds.groups] == [1.0, 2.0]
    with pytest.raises(ValueError, match="unique"):
        Dataset(10, (HoldGroup(1.0, (0.1,)), HoldGroup(1.0, (0.2,))))
    with pytest.raises(ValueError, match="no hold-time"):
        Dataset(10, ())


@pytest.mark.parametrize("bad", [{}, {"atom_number": 10}, {"atom_number": 10, "groups": [{"phases": [0.1]}]},
                                 {"atom_number": 10, "groups": 5}])
def test_dataset_malformed(bad):
    with pytest.raises(ValueError):
        Dataset.from_dict(bad)


def test_channels_use_circular_mean():
    ds = Dataset(100, (HoldGroup(0.0, (math.pi - 0.1, -math.pi + 0.1), ((60, 40), (50, 50))),))
    ph = ds.phase_channel()
    assert abs(ph.values[0]) == pytest.approx(math.pi, abs=1e-12)
    assert ph.sem[0] == pytest.approx(0.1, rel=1e-9)
    imb = ds.imbalance_channel()
    assert imb.values[0] == pytest.approx(0.1)


def test_param_dicts_round_trip():
    pp = PendulumParams(1.32, 0.11, 1248.0, math.inf, 1.0, 0.2, -0.009, 7.5e-4)
    assert PendulumParams.from_dict(loads(dumps(pp.to_dict()))) == pp
    p = TwoModeParams.from_hz(3200, 0.71, 8.0, 46.0, 2.0)
    assert TwoModeParams.from_dict(loads(dumps(p.to_dict()))) == p
