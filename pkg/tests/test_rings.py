import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from ring_resilience.geometry import (
    TWO_PI,
    Circle,
    Scenario,
    build_comm_graph,
    generate,
    load_scenario,
)
from ring_resilience.rings import (
    RingStructureError,
    build_smg,
    extract_rings,
    link_table,
    reverse_rings,
)
from ring_resilience.scheduling import solve_schedule


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


def rings_of(scenario):
    graph = build_comm_graph(scenario)
    schedule = solve_schedule(graph).schedule
    return graph, schedule, extract_rings(build_smg(graph, schedule.g))


def test_link_table_clockwise_from_zero(unit_square):
    graph = build_comm_graph(unit_square)
    links = link_table(graph)
    # Trajectory 0 links point at neighbors 1 (angle 0) and 3 (angle pi/2).
    # Clockwise enumeration from angle 0: index 0 at 0, index 1 at pi/2.
    assert [round(lp.angle, 9) for lp in links[0]] == [0.0, round(math.pi / 2, 9)]
    assert [lp.neighbor for lp in links[0]] == [1, 3]
    # Trajectory 2 links at pi (to 3) and 3*pi/2 (to 1): clockwise from 0
    # walks 3*pi/2 first.
    assert [lp.neighbor for lp in links[2]] == [1, 3]
    assert [round(lp.angle, 9) for lp in links[2]] == [
        round(3 * math.pi / 2, 9),
        round(math.pi, 9),
    ]


def test_duplicate_link_angle_rejected():
    doc = {
        "abstract": True,
        "n": 3,
        "edges": [
            {"a": 0, "b": 1, "beta": 1.0},
            {"a": 0, "b": 2, "beta": 1.0},
        ],
    }
    graph = build_comm_graph(load_scenario(json.dumps(doc)))
    with pytest.raises(RingStructureError):
        link_table(graph)


def test_two_chain_single_ring(two_chain):
    graph, schedule, rs = rings_of(two_chain)
    assert len(rs.rings) == 1
    ring = rs.rings[0]
    assert ring.k == 2
    assert ring.length == pytest.approx(4 * math.pi)
    # One full tour of each circle, opposite senses.
    assert sorted((a.traj, a.direction) for a in ring.arcs) == [(0, 1), (1, -1)]
    assert all(a.length == pytest.approx(TWO_PI) for a in ring.arcs)


def test_unit_square_two_rings(unit_square):
    graph, schedule, rs = rings_of(unit_square)
    assert len(build_smg(graph, schedule.g).nodes) == 16
    assert len(rs.rings) == 2
    assert all(r.length == pytest.approx(4 * math.pi) for r in rs.rings)
    assert all(r.k == 2 for r in rs.rings)
    # Opposite corners ride the same ring.
    homes = [rs.ring_of_point(i, schedule.f[i])[0] for i in range(4)]
    assert homes[0] == homes[2] != homes[1] == homes[3]


def test_single_circle_trivial_ring():
    s = Scenario(1, 0.5, (Circle(0, 0.0, 0.0),))
    graph, schedule, rs = rings_of(s)
    assert len(rs.rings) == 1
    assert rs.rings[0].k == 1
    assert rs.rings[0].length == pytest.approx(TWO_PI)


def test_isolated_circle_gets_its_own_ring():
    s = Scenario(3, 0.5, (Circle(0, 0.0, 0.0), Circle(1, 2.2, 0.0), Circle(2, 50.0, 0.0)))
    graph, schedule, rs = rings_of(s)
    assert len(rs.rings) == 2
    assert sorted(r.k for r in rs.rings) == [1, 2]
    assert rs.total_capacity == 3


@settings(max_examples=60, deadline=None)
@given(scenarios())
def test_smg_and_ring_conservation_laws(scenario):
    graph, schedule, rs = rings_of(scenario)
    smg = build_smg(graph, schedule.g)
    assert len(smg.nodes) == 4 * len(graph.edges)
    total = sum(r.length for r in rs.rings)
    assert total == pytest.approx(TWO_PI * graph.n, abs=1e-6)
    assert rs.total_capacity == graph.n
    for ring in rs.rings:
        assert ring.length / TWO_PI == pytest.approx(ring.k, abs=1e-6)
        assert ring.length == pytest.approx(sum(a.length for a in ring.arcs))


@settings(max_examples=60, deadline=None)
@given(scenarios())
def test_every_point_lands_on_exactly_one_ring(scenario):
    graph, schedule, rs = rings_of(scenario)
    for traj in range(graph.n):
        for frac in (0.0, 0.13, 0.51, 0.97):
            ring_id, pos = rs.ring_of_point(traj, TWO_PI * frac)
            ring = rs.rings[ring_id]
            assert 0.0 <= pos < ring.length


def test_ring_position_follows_direction(two_chain):
    graph, schedule, rs = rings_of(two_chain)
    r0, p0 = rs.ring_of_point(0, 0.0)
    r1, p1 = rs.ring_of_point(0, 0.25)
    assert r0 == r1
    assert (p1 - p0) % rs.rings[r0].length == pytest.approx(0.25)
    # trajectory 1 turns clockwise: advancing along the ring means
    # decreasing angle
    r2, p2 = rs.ring_of_point(1, math.pi)
    r3, p3 = rs.ring_of_point(1, math.pi - 0.25)
    assert (p3 - p2) % rs.rings[r2].length == pytest.approx(0.25)


def test_grid_gcd_ring_counts():
    for rows, cols in [(3, 3), (2, 4), (2, 3), (4, 4)]:
        graph, schedule, rs = rings_of(generate("grid", rows=rows, cols=cols))
        g = math.gcd(rows, cols)
        assert len(rs.rings) == g
        expected = TWO_PI * rows * cols / g
        assert all(r.length == pytest.approx(expected, abs=1e-6) for r in rs.rings)


@settings(max_examples=40, deadline=None)
@given(scenarios())
def test_reverse_rings_matches_reversed_build(scenario):
    graph, schedule, rs = rings_of(scenario)
    flipped = tuple(-g for g in schedule.g)
    direct = extract_rings(build_smg(graph, flipped))
    mirrored = reverse_rings(rs)
    a = sorted(r.canonical_arcs() for r in direct.rings)
    b = sorted(r.canonical_arcs() for r in mirrored.rings)
    assert a == b


@settings(max_examples=30, deadline=None)
@given(scenarios())
def test_reverse_is_an_involution_on_shapes(scenario):
    graph, schedule, rs = rings_of(scenario)
    back = reverse_rings(reverse_rings(rs))
    assert sorted(r.canonical_arcs() for r in rs.rings) == sorted(
        r.canonical_arcs() for r in back.rings
    )


def test_build_smg_rejects_non_alternating_directions(two_chain):
    graph = build_comm_graph(two_chain)
    with pytest.raises(RingStructureError):
        build_smg(graph, (1, 1))
