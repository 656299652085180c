"""Fault-tolerance metrics from the ring decomposition.

Robots on one ring stay exactly a multiple of 2*pi apart along it, so a
ring of length 2*pi*k behaves like k discrete slots moving in lockstep.
Whether two robots ever meet depends only on their slots: each
communication link induces a fixed residue relation between the slot
indices of the two rings passing through it. Collecting those relations
gives a finite meeting graph on slots, and

* uncovering resilience UR: one less than the smallest slot capacity,
* starvation number SN: the maximum independent set of the meeting graph,
* isolation resilience IR: n - SN - 1.

All meeting logic is exact integer arithmetic; floating point only enters
when extracting crossing phases, guarded by an integer snap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from .geometry import TWO_PI, CommGraph, Scenario, build_comm_graph
from .rings import RingSet, SmgNode, build_smg, extract_rings, link_table
from .scheduling import FeasibilityReport, Schedule, solve_schedule

PHASE_SNAP = 1e-6
SLOT_SPACING_TOL = 1e-6 * TWO_PI
SLOT_GUARD = 64


class PhaseMismatchError(RuntimeError):
    """The schedule and ring structure disagree; the system is not synchronized."""


class SlotLimitError(RuntimeError):
    """Exact search declined: too many slots. Pass force=True to override."""


@dataclass(frozen=True)
class Slot:
    ring: int
    index: int
    robot: int  # trajectory id of the robot starting in this slot


@dataclass(frozen=True)
class Crossing:
    """A communication link expressed in ring coordinates.

    Side a is the arrival point of the lower-id trajectory of the edge,
    side b the arrival point of the other. ``delta`` is the integer phase
    offset round(phase_b - phase_a); slots meet at this link exactly when
    their indices satisfy s_b = s_a + delta modulo gcd of the capacities
    (modulo the capacity itself when both sides lie on one ring).
    """

    edge_id: int
    ring_a: int
    pos_a: float
    ring_b: int
    pos_b: float
    phase_a: float
    phase_b: float
    delta: int


@dataclass(frozen=True)
class SlotModel:
    ring_set: RingSet
    slots: tuple[Slot, ...]
    anchors: tuple[float, ...]  # per ring: arclength of its slot 0 at t=0
    crossings: tuple[Crossing, ...]

    @cached_property
    def slot_id(self) -> dict[tuple[int, int], int]:
        return {(s.ring, s.index): i for i, s in enumerate(self.slots)}

    @cached_property
    def slot_of_robot(self) -> dict[int, int]:
        return {s.robot: i for i, s in enumerate(self.slots)}


def build_slot_model(ring_set: RingSet, schedule: Schedule, graph: CommGraph) -> SlotModel:
    """Place the initial robots into slots and derive every crossing relation."""
    if schedule.n != graph.n or ring_set.n != graph.n:
        raise ValueError("schedule, graph and ring set sizes disagree")
    if tuple(schedule.g) != ring_set.directions:
        raise PhaseMismatchError("ring set was built for different rotation senses")
    by_ring: dict[int, list[tuple[float, int]]] = {r.id: [] for r in ring_set.rings}
    for robot in range(graph.n):
        ring_id, pos = ring_set.ring_of_point(robot, schedule.f[robot])
        by_ring[ring_id].append((pos, robot))
    slots: list[Slot] = []
    anchors: list[float] = []
    for ring in ring_set.rings:
        entries = sorted(by_ring[ring.id])
        if len(entries) != ring.k:
            raise PhaseMismatchError(
                f"ring {ring.id} holds {len(entries)} robots but has capacity {ring.k}"
            )
        d0 = entries[0][0]
        for s, (pos, robot) in enumerate(entries):
            if abs(pos - d0 - TWO_PI * s) > SLOT_SPACING_TOL:
                raise PhaseMismatchError(
                    f"robots on ring {ring.id} are not spaced in whole turns"
                )
            slots.append(Slot(ring.id, s, robot))
        anchors.append(d0)
    links = link_table(graph)
    link_index = {
        (lp.traj, lp.edge_id): lp.index for table in links for lp in table
    }
    crossings: list[Crossing] = []
    for idx, e in enumerate(graph.edges):
        tail_a = SmgNode(e.i, link_index[(e.i, idx)], "v" if schedule.g[e.i] == 1 else "w")
        tail_b = SmgNode(e.j, link_index[(e.j, idx)], "v" if schedule.g[e.j] == 1 else "w")
        ring_a, pos_a = ring_set.node_place[tail_a]
        ring_b, pos_b = ring_set.node_place[tail_b]
        phase_a = (pos_a - anchors[ring_a]) / TWO_PI
        phase_b = (pos_b - anchors[ring_b]) / TWO_PI
        delta = round(phase_b - phase_a)
        if abs(phase_b - phase_a - delta) > PHASE_SNAP:
            raise PhaseMismatchError(
                f"crossing of edge ({e.i},{e.j}) has non-integer phase offset "
                f"{phase_b - phase_a}"
            )
        if ring_a == ring_b and delta % ring_set.rings[ring_a].k == 0:
            raise PhaseMismatchError(
                f"crossing of edge ({e.i},{e.j}) would let a slot meet itself"
            )
        crossings.append(
            Crossing(idx, ring_a, pos_a, ring_b, pos_b, phase_a, phase_b, delta)
        )
    return SlotModel(ring_set, tuple(slots), tuple(anchors), tuple(crossings))


@dataclass(frozen=True)
class SlotMeetingGraph:
    slots: tuple[Slot, ...]
    edges: tuple[tuple[int, int], ...]  # sorted slot-id pairs, deduplicated
    witness_links: dict[tuple[int, int], tuple[int, ...]]  # pair -> comm edges

    @cached_property
    def adjacency_masks(self) -> tuple[int, ...]:
        masks = [0] * len(self.slots)
        for a, b in self.edges:
            masks[a] |= 1 << b
            masks[b] |= 1 << a
        return tuple(masks)


def build_meeting_graph(model: SlotModel) -> SlotMeetingGraph:
    """Expand every crossing relation into concrete slot pairs."""
    caps = {r.id: r.k for r in model.ring_set.rings}
    pair_links: dict[tuple[int, int], set[int]] = {}

    def add(a: int, b: int, edge_id: int) -> None:
        if a == b:
            raise PhaseMismatchError("meeting graph grew a self-loop")
        key = (a, b) if a < b else (b, a)
        pair_links.setdefault(key, set()).add(edge_id)

    for c in model.crossings:
        if c.ring_a == c.ring_b:
            k = caps[c.ring_a]
            for s in range(k):
                add(
                    model.slot_id[(c.ring_a, s)],
                    model.slot_id[(c.ring_a, (s + c.delta) % k)],
                    c.edge_id,
                )
        else:
            ka, kb = caps[c.ring_a], caps[c.ring_b]
            step = math.gcd(ka, kb)
            for sa in range(ka):
                for sb in range(kb):
                    if (sb - sa - c.delta) % step == 0:
                        add(
                            model.slot_id[(c.ring_a, sa)],
                            model.slot_id[(c.ring_b, sb)],
                            c.edge_id,
                        )
    edges = tuple(sorted(pair_links))
    witness = {pair: tuple(sorted(links)) for pair, links in pair_links.items()}
    return SlotMeetingGraph(model.slots, edges, witness)


def uncovering_resilience(ring_set: RingSet) -> int:
    """Largest failure count that cannot empty any ring."""
    return min(r.k for r in ring_set.rings) - 1


def isolation_resilience(n: int, sn: int) -> int:
    """Largest failure count that cannot leave every survivor starving."""
    if not 1 <= sn <= n:
        raise ValueError(f"starvation number {sn} out of range for n={n}")
    return n - sn - 1


def _greedy_independent(masks: tuple[int, ...]) -> int:
    """Deterministic min-degree greedy lower bound, returned as a bitmask."""
    alive = (1 << len(masks)) - 1
    chosen = 0
    while alive:
        best = -1
        best_deg = 1 << 62
        m = alive
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            deg = (masks[v] & alive).bit_count()
            if deg < best_deg:
                best_deg = deg
                best = v
        chosen |= 1 << best
        alive &= ~(masks[best] | (1 << best))
    return chosen


def maximum_independent_set(masks: tuple[int, ...]) -> int:
    """Exact maximum independent set via branch and bound, as a bitmask.

    Branches on the highest-degree candidate; prunes on the trivial
    cardinality bound after peeling isolated vertices, which keeps the
    search tiny on the dense meeting graphs that arise here.
    """
    n = len(masks)
    best_mask = _greedy_independent(masks)
    best = best_mask.bit_count()

    def expand(cand: int, cur: int, cur_size: int) -> None:
        nonlocal best, best_mask
        while True:
            extra = 0
            m = cand
            while m:
                v = (m & -m).bit_length() - 1
                m &= m - 1
                if masks[v] & cand == 0:
                    extra |= 1 << v
            if extra:
                cand &= ~extra
                cur |= extra
                cur_size += extra.bit_count()
                continue
            break
        if cand == 0:
            if cur_size > best:
                best = cur_size
                best_mask = cur
            return
        if cur_size + cand.bit_count() <= best:
            return
        pivot = -1
        pivot_deg = -1
        m = cand
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            deg = (masks[v] & cand).bit_count()
            if deg > pivot_deg:
                pivot_deg = deg
                pivot = v
        expand(cand & ~(masks[pivot] | (1 << pivot)), cur | (1 << pivot), cur_size + 1)
        expand(cand & ~(1 << pivot), cur, cur_size)

    expand((1 << n) - 1, 0, 0)
    return best_mask


def starvation_number(
    graph: SlotMeetingGraph, *, force: bool = False
) -> tuple[int, tuple[int, ...]]:
    """Exact SN with a witness: slot ids of one largest mutually starving set."""
    n = len(graph.slots)
    if n > SLOT_GUARD and not force:
        raise SlotLimitError(
            f"{n} slots exceeds the exact-search guard of {SLOT_GUARD}"
        )
    mask = maximum_independent_set(graph.adjacency_masks)
    witness = tuple(i for i in range(n) if mask >> i & 1)
    return len(witness), witness


# ---------------------------------------------------------------------------
# Closed forms for recognized topologies


@dataclass(frozen=True)
class Expectation:
    """Predicted metrics for a named topology; a range where only bounds exist."""

    kind: str
    ring_count: int
    ur: int
    sn_min: int
    sn_max: int
    n_total: int

    @property
    def ir_min(self) -> int:
        return self.n_total - self.sn_max - 1

    @property
    def ir_max(self) -> int:
        return self.n_total - self.sn_min - 1

    @property
    def exact(self) -> bool:
        return self.sn_min == self.sn_max


def closed_form(
    kind: str,
    *,
    n: int | None = None,
    rows: int | None = None,
    cols: int | None = None,
    capacities: tuple[int, int] | None = None,
) -> Expectation:
    """Known results: chain, tree, cycle (needs ring capacities), grid."""
    if kind == "chain":
        if n is None or n < 1:
            raise ValueError("chain requires n >= 1")
        return Expectation("chain", 1, n - 1, 1, 1, n_total=n)
    if kind == "tree":
        if n is None or n < 1:
            raise ValueError("tree requires n >= 1")
        return Expectation("tree", 1, n - 1, 1, max(1, n // 2), n_total=n)
    if kind == "cycle":
        if n is None or n < 4 or n % 2 != 0:
            raise ValueError("cycle closed form needs an even n >= 4")
        if capacities is None or len(capacities) != 2:
            raise ValueError("cycle closed form needs the two ring capacities")
        if capacities[0] + capacities[1] != n:
            raise ValueError("cycle ring capacities must sum to n")
        sn = max(capacities)
        return Expectation("cycle", 2, min(capacities) - 1, sn, sn, n_total=n)
    if kind == "grid":
        if rows is None or cols is None or rows < 1 or cols < 1:
            raise ValueError("grid requires rows >= 1 and cols >= 1")
        total = rows * cols
        shared = math.gcd(rows, cols)
        sn = min(rows, cols)
        return Expectation("grid", shared, total // shared - 1, sn, sn, n_total=total)
    raise ValueError(f"no closed form for kind {kind!r}")


# ---------------------------------------------------------------------------
# One-stop analysis


@dataclass(frozen=True)
class ResilienceReport:
    n: int
    ring_count: int
    ring_capacities: tuple[int, ...]
    ring_lengths: tuple[float, ...]
    ur: int
    sn: int
    sn_witness_slots: tuple[int, ...]
    sn_witness_robots: tuple[int, ...]
    ir: int
    expectation: Expectation | None
    expectation_ok: bool | None


@dataclass(frozen=True)
class Analysis:
    scenario: Scenario
    graph: CommGraph
    feasibility: FeasibilityReport
    schedule: Schedule | None
    ring_set: RingSet | None
    slot_model: SlotModel | None
    meeting_graph: SlotMeetingGraph | None
    report: ResilienceReport | None


def _is_lattice(scenario: Scenario) -> tuple[int, int] | None:
    """Detect an axis-aligned complete grid of centers; return (rows, cols)."""
    if scenario.abstract_mode or scenario.n == 0:
        return None

    def classes(values: list[float]) -> list[float]:
        ordered = sorted(values)
        reps = [ordered[0]]
        for v in ordered[1:]:
            if v - reps[-1] > 1e-6:
                reps.append(v)
        return reps

    xs = classes([c.x for c in scenario.circles])
    ys = classes([c.y for c in scenario.circles])
    if len(xs) * len(ys) != scenario.n:
        return None
    taken = set()
    for c in scenario.circles:
        col = min(range(len(xs)), key=lambda k: abs(xs[k] - c.x))
        row = min(range(len(ys)), key=lambda k: abs(ys[k] - c.y))
        if abs(xs[col] - c.x) > 1e-6 or abs(ys[row] - c.y) > 1e-6:
            return None
        taken.add((row, col))
    if len(taken) != scenario.n:
        return None
    for vals in (xs, ys):
        steps = [b - a for a, b in zip(vals, vals[1:])]
        if steps and (max(steps) - min(steps)) > 1e-6:
            return None
    return len(ys), len(xs)


def recognize_topology(
    scenario: Scenario, graph: CommGraph, ring_set: RingSet | None
) -> Expectation | None:
    n = graph.n
    if len(graph.components()) != 1:
        return None
    degs = [graph.degree(i) for i in range(n)]
    m = len(graph.edges)
    if n >= 4 and n % 2 == 0 and all(d == 2 for d in degs):
        if ring_set is not None and len(ring_set.rings) == 2:
            caps = (ring_set.rings[0].k, ring_set.rings[1].k)
            return closed_form("cycle", n=n, capacities=caps)
        return None
    lattice = _is_lattice(scenario)
    if lattice is not None:
        rows, cols = lattice
        expected_edges = rows * (cols - 1) + cols * (rows - 1)
        if m == expected_edges and min(rows, cols) > 1:
            return closed_form("grid", rows=rows, cols=cols)
    if m == n - 1:  # a tree
        if all(d <= 2 for d in degs):
            return closed_form("chain", n=n)
        return closed_form("tree", n=n)
    return None


def analyze_scenario(
    scenario: Scenario, *, force: bool = False, root: int | None = None
) -> Analysis:
    """Full pipeline: graph, schedule, rings, slots, meeting graph, metrics."""
    graph = build_comm_graph(scenario)
    feas = solve_schedule(graph, root=root)
    if not feas.feasible:
        return Analysis(scenario, graph, feas, None, None, None, None, None)
    schedule = feas.schedule
    assert schedule is not None
    return _analyze_with(scenario, graph, feas, schedule, force=force)


def analyze_with_schedule(
    scenario: Scenario,
    schedule: Schedule,
    *,
    graph: CommGraph | None = None,
    force: bool = False,
) -> Analysis:
    """Same pipeline but with a caller-provided verifying schedule."""
    if graph is None:
        graph = build_comm_graph(scenario)
    feas = FeasibilityReport(True, schedule=schedule)
    return _analyze_with(scenario, graph, feas, schedule, force=force)


def _analyze_with(
    scenario: Scenario,
    graph: CommGraph,
    feas: FeasibilityReport,
    schedule: Schedule,
    *,
    force: bool,
) -> Analysis:
    ring_set = extract_rings(build_smg(graph, schedule.g))
    model = build_slot_model(ring_set, schedule, graph)
    meeting = build_meeting_graph(model)
    sn, witness = starvation_number(meeting, force=force)
    ur = uncovering_resilience(ring_set)
    ir = isolation_resilience(graph.n, sn)
    expectation = recognize_topology(scenario, graph, ring_set)
    expectation_ok: bool | None = None
    if expectation is not None:
        expectation_ok = (
            expectation.ring_count == len(ring_set.rings)
            and expectation.ur == ur
            and expectation.sn_min <= sn <= expectation.sn_max
        )
    report = ResilienceReport(
        n=graph.n,
        ring_count=len(ring_set.rings),
        ring_capacities=tuple(r.k for r in ring_set.rings),
        ring_lengths=tuple(r.length for r in ring_set.rings),
        ur=ur,
        sn=sn,
        sn_witness_slots=witness,
        sn_witness_robots=tuple(sorted(meeting.slots[i].robot for i in witness)),
        ir=ir,
        expectation=expectation,
        expectation_ok=expectation_ok,
    )
    return Analysis(scenario, graph, feas, schedule, ring_set, model, meeting, report)
