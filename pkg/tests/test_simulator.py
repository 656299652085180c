import math

import pytest

import ring_resilience.simulator as sim
from ring_resilience.geometry import build_comm_graph, generate
from ring_resilience.resilience import analyze_scenario
from ring_resilience.scheduling import Schedule, solve_schedule
from ring_resilience.simulator import (
    Failure,
    FailurePlan,
    SimulationError,
    auto_horizon,
    brute_force_sn,
    brute_force_ur,
    coverage_report,
    revisit_period,
    simulate,
    write_trace_csv,
)


def pipeline(scenario):
    a = analyze_scenario(scenario)
    assert a.report is not None
    return a.graph, a.schedule, a.ring_set


def test_failure_plan_validation():
    with pytest.raises(ValueError):
        FailurePlan((Failure(0), Failure(0, 1.0)))
    with pytest.raises(ValueError):
        FailurePlan((Failure(0, -0.5),))


def test_no_failures_full_square(unit_square):
    graph, schedule, rs = pipeline(unit_square)
    trace = simulate(graph, schedule, rs)
    assert trace.horizon == 2.0  # lcm of ring capacities (2, 2)
    kinds = [ev.kind for ev in trace.events]
    assert kinds.count("meeting") == 8  # 4 edges, once per period
    assert kinds.count("switch") == 0
    assert not any(trace.starving.values())
    assert all(trace.covered.values())
    assert not trace.truncated


def test_square_opposite_failures_starve(unit_square):
    graph, schedule, rs = pipeline(unit_square)
    trace = simulate(graph, schedule, rs, FailurePlan((Failure(1), Failure(3))))
    assert trace.alive == (0, 2)
    assert trace.starving == {0: True, 2: True}
    assert trace.covered == {0: False, 1: False, 2: False, 3: False}
    report = coverage_report(trace)
    assert report.agree
    assert not any(report.by_sweep.values())


def test_single_failure_square_recovers(unit_square):
    graph, schedule, rs = pipeline(unit_square)
    trace = simulate(graph, schedule, rs, FailurePlan((Failure(1, 1.0),)))
    at_one = [ev for ev in trace.events if abs(ev.time - 1.0) < 1e-12]
    # the failure lands exactly on a link arrival and wins the tie
    assert [ev.kind for ev in at_one[:2]] == ["failure", "arrival"]
    switch = next(ev for ev in at_one if ev.kind == "switch")
    assert switch.robot == 0 and switch.trajectory == 1
    meet_pair = {ev.robot for ev in at_one if ev.kind == "meeting"} | {
        ev.partner for ev in at_one if ev.kind == "meeting"
    }
    assert meet_pair == {2, 3}
    assert trace.starving == {0: False, 2: False, 3: False}
    assert all(trace.covered.values())


def test_two_chain_survivor_switch_cadence(two_chain):
    graph, schedule, rs = pipeline(two_chain)
    trace = simulate(graph, schedule, rs, FailurePlan((Failure(1),)), horizon=6.0)
    switches = [ev.time for ev in trace.events if ev.kind == "switch"]
    gaps = [b - a for a, b in zip(switches, switches[1:])]
    # one full circle between hops: the survivor changes trajectory once
    # per period, not twice
    assert all(g == pytest.approx(1.0) for g in gaps)
    assert trace.covered == {0: True, 1: True}
    assert trace.starving == {0: True}  # alone, so never meets


def test_revisit_periods_two_chain(two_chain):
    graph, schedule, rs = pipeline(two_chain)
    interior = schedule.f[0] + 1.0
    solo = simulate(graph, schedule, rs, FailurePlan((Failure(1),)), horizon=9.0)
    assert revisit_period(solo, 0, interior) == pytest.approx(2.0, abs=1e-6)
    full = simulate(graph, schedule, rs, horizon=9.0)
    assert revisit_period(full, 0, interior) == pytest.approx(1.0, abs=1e-6)
    # ring length over 2*pi is always a whole multiple of the measured gap
    ratio = (rs.rings[0].length / (2 * math.pi)) / revisit_period(full, 0, interior)
    assert ratio == pytest.approx(round(ratio), abs=1e-6)


def test_revisit_errors(two_chain):
    graph, schedule, rs = pipeline(two_chain)
    trace = simulate(graph, schedule, rs, horizon=4.0)
    with pytest.raises(ValueError):
        revisit_period(trace, 5, 0.0)
    short = simulate(graph, schedule, rs, horizon=0.5)
    with pytest.raises(ValueError):
        revisit_period(short, 0, schedule.f[0] + 1.0)


def test_ring_counts_change_only_at_failures(unit_square):
    graph, schedule, rs = pipeline(unit_square)
    plan = FailurePlan((Failure(1, 0.6), Failure(2, 1.3)))
    trace = simulate(graph, schedule, rs, plan, horizon=4.0)
    prev = None
    for time, cause, counts in trace.ring_counts:
        if prev is not None:
            if cause == "failure":
                assert sum(counts) == sum(prev) - 1
            else:
                assert counts == prev
        prev = counts
    assert sum(trace.ring_counts[-1][2]) == 2


def test_occupancy_intervals_disjoint_per_trajectory(unit_square):
    graph, schedule, rs = pipeline(unit_square)
    trace = simulate(graph, schedule, rs, FailurePlan((Failure(0, 0.4),)), horizon=5.0)
    by_traj = {}
    for robot, traj, t_in, t_out in trace.occupancy:
        assert t_out >= t_in - 1e-12
        by_traj.setdefault(traj, []).append((t_in, t_out))
    for spans in by_traj.values():
        spans.sort()
        for (a0, a1), (b0, b1) in zip(spans, spans[1:]):
            assert b0 >= a1 - 1e-9


def test_events_are_time_ordered(unit_square):
    graph, schedule, rs = pipeline(unit_square)
    plan = FailurePlan((Failure(3, 0.7),))
    trace = simulate(graph, schedule, rs, plan, horizon=3.0)
    times = [ev.time for ev in trace.events]
    assert times == sorted(times)


def test_trace_csv_reproducible(tmp_path, unit_square):
    graph, schedule, rs = pipeline(unit_square)
    plan = FailurePlan((Failure(1), Failure(3)))
    trace = simulate(graph, schedule, rs, plan)
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    write_trace_csv(trace, str(p1))
    write_trace_csv(simulate(graph, schedule, rs, plan), str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    lines = p1.read_text().splitlines()
    assert lines[0] == "time,event,robot,trajectory,angle,partner"
    first = lines[1].split(",")
    assert len(first) == 6
    assert len(first[0].split(".")[1]) == 9
    meet_rows = [ln for ln in lines[1:] if ln.split(",")[1] == "meeting"]
    assert all(ln.split(",")[5] != "" for ln in meet_rows)


def test_simulate_input_validation(unit_square):
    graph, schedule, rs = pipeline(unit_square)
    with pytest.raises(ValueError):
        simulate(graph, schedule, rs, FailurePlan((Failure(9),)))
    with pytest.raises(ValueError):
        simulate(graph, schedule, rs, horizon=0.0)
    with pytest.raises(ValueError):
        simulate(graph, schedule, rs, FailurePlan((Failure(0, 5.0),)), horizon=4.0)


def test_unsynchronized_schedule_detected(two_chain):
    graph, schedule, rs = pipeline(two_chain)
    broken = Schedule((schedule.f[0], schedule.f[1] + 0.3), schedule.g)
    with pytest.raises(SimulationError):
        simulate(graph, broken, rs)


def test_event_cap_truncates(monkeypatch, unit_square):
    graph, schedule, rs = pipeline(unit_square)
    monkeypatch.setattr(sim, "EVENT_CAP", 8)
    trace = simulate(graph, schedule, rs, horizon=50.0)
    assert trace.truncated
    assert len(trace.events) <= 8 + 12  # one instant may finish


def test_auto_horizon(unit_square):
    graph, schedule, rs = pipeline(unit_square)
    assert auto_horizon(rs, FailurePlan()) == 2.0
    assert auto_horizon(rs, FailurePlan((Failure(0, 2.5),))) == 5.0
    g34 = pipeline(generate("grid", rows=3, cols=4))
    assert auto_horizon(g34[2], FailurePlan()) == 12.0


def test_brute_force_oracles_agree_with_engine():
    for scenario in (
        generate("chain", nodes=5),
        generate("grid", rows=2, cols=3),
        generate("cycle", nodes=6),
        generate("star", nodes=5),
        generate("random_tree", nodes=7, seed=4),
    ):
        a = analyze_scenario(scenario)
        graph, schedule, rs = a.graph, a.schedule, a.ring_set
        assert brute_force_sn(graph, schedule) == a.report.sn
        assert brute_force_ur(schedule, rs) == a.report.ur


def test_brute_force_bounds_and_caps():
    a = analyze_scenario(generate("grid", rows=3, cols=3))
    with pytest.raises(ValueError):
        brute_force_sn(a.graph, a.schedule, bound=8)
    # SN needs 6 failures here, UR emptying needs 3
    assert brute_force_sn(a.graph, a.schedule, max_fail=2) is None
    assert brute_force_sn(a.graph, a.schedule, max_fail=6) == 3
    assert brute_force_ur(a.schedule, a.ring_set, max_fail=1) is None
    assert brute_force_ur(a.schedule, a.ring_set, max_fail=3) == 2
    assert brute_force_sn(a.graph, a.schedule, jobs=2) == 3


def test_isolated_trajectories_starve_and_cover():
    # no edges at all: the lone robot never meets anyone but its ring is
    # occupied, so its circle stays covered
    scenario = generate("chain", nodes=1)
    graph, schedule, rs = pipeline(scenario)
    trace = simulate(graph, schedule, rs)
    assert trace.starving == {0: True}
    assert trace.covered == {0: True}
    assert brute_force_sn(graph, schedule) == 1
    assert brute_force_ur(schedule, rs) == 0
