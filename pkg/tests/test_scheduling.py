import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from ring_resilience.geometry import TWO_PI, build_comm_graph, generate, norm_angle
from ring_resilience.scheduling import (
    Schedule,
    load_schedule,
    opposite_schedule,
    position_at,
    schedule_to_json,
    solve_schedule,
    verify_schedule,
)


def scenarios():
    chains = st.integers(2, 8).map(lambda n: generate("chain", nodes=n))
    grids = st.tuples(st.integers(1, 4), st.integers(1, 4)).map(
        lambda rc: generate("grid", rows=rc[0], cols=rc[1])
    )
    cycles = st.integers(2, 5).map(lambda k: generate("cycle", nodes=2 * k))
    trees = st.tuples(st.integers(2, 10), st.integers(0, 50)).map(
        lambda ns: generate("random_tree", nodes=ns[0], seed=ns[1])
    )
    return st.one_of(chains, grids, cycles, trees)


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule((0.0, 0.0), (1,))
    with pytest.raises(ValueError):
        Schedule((0.0,), (0,))


def test_position_at_wraps():
    s = Schedule((1.0,), (-1,))
    assert position_at(s, 0, 0.0) == pytest.approx(1.0)
    assert position_at(s, 0, 0.25) == pytest.approx(norm_angle(1.0 - math.pi / 2))
    assert position_at(s, 0, 1.0) == pytest.approx(1.0)


def test_two_chain_frozen_schedule(two_chain):
    feas = solve_schedule(build_comm_graph(two_chain))
    assert feas.feasible
    assert feas.schedule.f == pytest.approx((0.0, math.pi))
    assert feas.schedule.g == (1, -1)


def test_unit_square_frozen_schedule(unit_square):
    feas = solve_schedule(build_comm_graph(unit_square))
    assert feas.feasible
    assert feas.schedule.f == pytest.approx((0.0, math.pi, math.pi, 0.0))
    assert feas.schedule.g == (1, -1, 1, -1)


def test_triangle_odd_cycle_witness():
    feas = solve_schedule(build_comm_graph(generate("cycle", nodes=3)))
    assert not feas.feasible
    cyc = feas.odd_cycle
    assert cyc is not None and feas.inconsistent_cycle is None
    assert len(cyc) % 2 == 1
    assert len(set(cyc)) == len(cyc)


def test_odd_cycle_witness_is_a_real_cycle():
    g = build_comm_graph(generate("cycle", nodes=3))
    cyc = solve_schedule(g).odd_cycle
    pairs = {(e.i, e.j) for e in g.edges}
    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
        assert (min(a, b), max(a, b)) in pairs


def test_inconsistent_cycle_witness():
    # Alternating beta sum 0 - pi/2 + 0.3 - pi/2 = 0.3 mod pi, so the even
    # cycle cannot close; the accumulated residual is 2 * 0.3.
    doc = {
        "abstract": True,
        "n": 4,
        "edges": [
            {"a": 0, "b": 1, "beta": 0.0},
            {"a": 1, "b": 2, "beta": math.pi / 2},
            {"a": 2, "b": 3, "beta": 0.3},
            {"a": 3, "b": 0, "beta": math.pi / 2},
        ],
    }
    from ring_resilience.geometry import load_scenario

    feas = solve_schedule(build_comm_graph(load_scenario(json.dumps(doc))))
    assert not feas.feasible
    assert feas.odd_cycle is None
    assert feas.inconsistent_cycle is not None
    assert abs(feas.residual) == pytest.approx(0.6, abs=1e-9)


def test_perturbed_square_fails_exactly_two_edges(unit_square):
    graph = build_comm_graph(unit_square)
    good = solve_schedule(graph).schedule
    f = list(good.f)
    f[2] = norm_angle(f[2] + 0.1)
    report = verify_schedule(graph, Schedule(tuple(f), good.g))
    bad = {(c.i, c.j): c.residual for c in report.failures()}
    assert set(bad) == {(1, 2), (2, 3)}
    assert all(abs(abs(r) - 0.1) < 1e-9 for r in bad.values())


@settings(max_examples=60, deadline=None)
@given(scenarios())
def test_solved_schedule_verifies(scenario):
    graph = build_comm_graph(scenario)
    feas = solve_schedule(graph)
    assert feas.feasible
    assert verify_schedule(graph, feas.schedule).ok


@settings(max_examples=40, deadline=None)
@given(scenarios())
def test_opposite_schedule_also_verifies(scenario):
    graph = build_comm_graph(scenario)
    feas = solve_schedule(graph)
    assert verify_schedule(graph, opposite_schedule(feas.schedule)).ok


@settings(max_examples=40, deadline=None)
@given(scenarios(), st.integers(0, 100))
def test_any_root_verifies(scenario, root_pick):
    graph = build_comm_graph(scenario)
    feas = solve_schedule(graph, root=root_pick % graph.n)
    assert feas.feasible
    assert verify_schedule(graph, feas.schedule).ok


def test_root_pins_start_angle():
    graph = build_comm_graph(generate("chain", nodes=4))
    feas = solve_schedule(graph, root=2)
    assert feas.schedule.f[2] == 0.0
    assert feas.schedule.g[2] == 1


def test_schedule_json_round_trip():
    s = Schedule((0.0, math.pi), (1, -1))
    doc = schedule_to_json(s)
    assert load_schedule(doc, 2) == s


def test_load_schedule_rejects_bad_documents():
    with pytest.raises(ValueError):
        load_schedule({"f": [0.0], "g": [1], "x": 1}, 1)
    with pytest.raises(ValueError):
        load_schedule({"f": [0.0, 0.0], "g": [1]}, 2)
    with pytest.raises(ValueError):
        load_schedule({"f": [0.0], "g": [0]}, 1)
    with pytest.raises(ValueError):
        load_schedule({"f": ["0"], "g": [1]}, 1)
    with pytest.raises(ValueError):
        load_schedule({"f": [0.0], "g": [True]}, 1)
    with pytest.raises(ValueError):
        load_schedule([0.0, 1], 1)


def test_verify_reports_sense_clash(two_chain):
    graph = build_comm_graph(two_chain)
    report = verify_schedule(graph, Schedule((0.0, math.pi), (1, 1)))
    assert not report.ok
    assert not report.checks[0].direction_ok
