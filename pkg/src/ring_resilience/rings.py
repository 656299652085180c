"""Ring decomposition of a synchronized patrol system.

With alternating rotation senses, the joint motion of all robots factors
into closed directed tours called rings. Each ring alternates trajectory
arcs with instantaneous hops across communication links, has total length
an exact multiple of 2*pi, and the rings partition every trajectory.

The decomposition is computed from a starving-motion graph: a directed
graph with two nodes per link point (one for each hop role at that point)
in which every node has in-degree and out-degree exactly one, so its cycle
cover is unique. Walking the cycles and keeping only the arc edges yields
the rings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from .geometry import ANGLE_TOL, TWO_PI, CommGraph, norm_angle

# A ring length must land on a multiple of 2*pi within this fraction.
LENGTH_SNAP = 1e-6


class RingStructureError(ValueError):
    """Raised when the inputs cannot form a valid ring decomposition."""


@dataclass(frozen=True, order=True)
class SmgNode:
    """One of the two hop endpoints at a link point.

    ``cls`` is "v" or "w". On a counterclockwise trajectory the v node is
    where a tour arrives at the link point and the w node is where a tour
    departs from it; on a clockwise trajectory the roles are swapped.
    Ordering is lexicographic on (trajectory, link index, class).
    """

    traj: int
    link: int
    cls: str


@dataclass(frozen=True)
class SmgEdge:
    src: SmgNode
    dst: SmgNode
    kind: str  # "arc" within a trajectory, "cross" over a communication link
    edge_id: int | None = None  # communication edge behind a cross


@dataclass(frozen=True)
class LinkPoint:
    traj: int
    index: int  # position in the clockwise enumeration of this trajectory
    angle: float
    edge_id: int
    neighbor: int


@dataclass(frozen=True)
class SMG:
    n: int
    directions: tuple[int, ...]
    links: tuple[tuple[LinkPoint, ...], ...]  # per trajectory, clockwise from angle 0
    nodes: tuple[SmgNode, ...]
    edges: tuple[SmgEdge, ...]

    @cached_property
    def successor(self) -> dict[SmgNode, SmgEdge]:
        succ: dict[SmgNode, SmgEdge] = {}
        for e in self.edges:
            if e.src in succ:
                raise RingStructureError(f"node {e.src} has two outgoing edges")
            succ[e.src] = e
        return succ


def link_table(graph: CommGraph) -> tuple[tuple[LinkPoint, ...], ...]:
    """Per trajectory, its link points enumerated clockwise starting at angle 0.

    Clockwise from 0 means descending angle with an exact 0 listed first.
    Two link points of one trajectory closer than the angle tolerance are
    rejected: the construction needs them to be distinct stops.
    """
    per_traj: list[list[tuple[float, int, int]]] = [[] for _ in range(graph.n)]
    for idx, e in enumerate(graph.edges):
        per_traj[e.i].append((e.phi_ij, idx, e.j))
        per_traj[e.j].append((e.phi_ji, idx, e.i))
    tables: list[tuple[LinkPoint, ...]] = []
    for traj, entries in enumerate(per_traj):
        entries.sort(key=lambda rec: norm_angle(-rec[0]))
        angles = sorted(a for a, _, _ in entries)
        for a, b in zip(angles, angles[1:]):
            if b - a <= ANGLE_TOL:
                raise RingStructureError(
                    f"trajectory {traj} has two link points within tolerance"
                )
        if len(angles) >= 2 and angles[0] + TWO_PI - angles[-1] <= ANGLE_TOL:
            raise RingStructureError(
                f"trajectory {traj} has two link points within tolerance"
            )
        tables.append(
            tuple(
                LinkPoint(traj, k, angle, edge_id, nbr)
                for k, (angle, edge_id, nbr) in enumerate(entries)
            )
        )
    return tuple(tables)


def build_smg(graph: CommGraph, directions: tuple[int, ...]) -> SMG:
    """Assemble the starving-motion graph for the given rotation senses.

    Arc edges connect the departure node of a link point to the arrival
    node of the next link point in the sense of motion. Cross edges pair
    the arrival node on one side of a communication link with the
    departure node on the other side, once per hop direction.
    """
    if len(directions) != graph.n:
        raise RingStructureError("directions length does not match graph")
    if any(d not in (-1, 1) for d in directions):
        raise RingStructureError("rotation senses must be +1 or -1")
    for e in graph.edges:
        if directions[e.i] != -directions[e.j]:
            raise RingStructureError(
                f"edge ({e.i},{e.j}) joins trajectories with equal sense"
            )
    links = link_table(graph)
    nodes: list[SmgNode] = []
    edges: list[SmgEdge] = []
    for traj in range(graph.n):
        m = len(links[traj])
        for k in range(m):
            nodes.append(SmgNode(traj, k, "v"))
            nodes.append(SmgNode(traj, k, "w"))
        for k in range(m):
            if directions[traj] == 1:
                edges.append(
                    SmgEdge(SmgNode(traj, k, "w"), SmgNode(traj, (k - 1) % m, "v"), "arc")
                )
            else:
                edges.append(
                    SmgEdge(SmgNode(traj, k, "v"), SmgNode(traj, (k + 1) % m, "w"), "arc")
                )
    index_of: dict[tuple[int, int], int] = {}
    for traj in range(graph.n):
        for lp in links[traj]:
            index_of[(traj, lp.edge_id)] = lp.index
    for idx, e in enumerate(graph.edges):
        k = index_of[(e.i, idx)]
        l = index_of[(e.j, idx)]
        if directions[e.i] == 1:
            edges.append(SmgEdge(SmgNode(e.i, k, "v"), SmgNode(e.j, l, "v"), "cross", idx))
            edges.append(SmgEdge(SmgNode(e.j, l, "w"), SmgNode(e.i, k, "w"), "cross", idx))
        else:
            edges.append(SmgEdge(SmgNode(e.j, l, "v"), SmgNode(e.i, k, "v"), "cross", idx))
            edges.append(SmgEdge(SmgNode(e.i, k, "w"), SmgNode(e.j, l, "w"), "cross", idx))
    smg = SMG(graph.n, tuple(directions), links, tuple(nodes), tuple(edges))
    indeg: dict[SmgNode, int] = {node: 0 for node in nodes}
    for e in edges:
        indeg[e.dst] += 1
    if smg.nodes and (len(smg.successor) != len(nodes) or any(d != 1 for d in indeg.values())):
        raise RingStructureError("hop graph is not a disjoint union of cycles")
    return smg


@dataclass(frozen=True)
class Arc:
    traj: int
    start: float
    end: float
    direction: int
    length: float

    def contains(self, angle: float) -> tuple[bool, float]:
        """Membership plus offset from the arc start, measured along motion.

        An angle exactly on a link point belongs to the arc departing from
        it, so offsets snap to 0 at the start and the arriving end of the
        previous arc excludes its endpoint.
        """
        off = norm_angle((angle - self.start) * self.direction)
        if off >= TWO_PI - ANGLE_TOL:
            off = 0.0
        if off < ANGLE_TOL:
            return True, 0.0
        return off < self.length - ANGLE_TOL, off


@dataclass(frozen=True)
class Ring:
    id: int
    arcs: tuple[Arc, ...]  # traversal order from the ring origin
    arc_starts: tuple[float, ...]  # arclength at the start of each arc
    length: float
    k: int  # slot capacity: length / (2*pi)

    def canonical_arcs(self) -> tuple[tuple[int, float, float, int], ...]:
        """Rotation-invariant fingerprint of the arc cycle, for comparisons."""
        keys = [
            (a.traj, round(a.start, 9), round(a.end, 9), a.direction) for a in self.arcs
        ]
        best = min(tuple(keys[i:] + keys[:i]) for i in range(len(keys)))
        return best


@dataclass(frozen=True)
class RingSet:
    n: int
    directions: tuple[int, ...]
    rings: tuple[Ring, ...]
    node_place: dict[SmgNode, tuple[int, float]]  # ring id, arclength along it
    traj_arcs: tuple[tuple[tuple[int, int], ...], ...]  # per traj: (ring id, arc idx)

    @property
    def total_capacity(self) -> int:
        return sum(r.k for r in self.rings)

    def ring_of_point(self, traj: int, angle: float) -> tuple[int, float]:
        """Ring id and ring arclength of the point at ``angle`` on ``traj``.

        Link points themselves count as part of the departing arc.
        """
        if not 0 <= traj < self.n:
            raise ValueError(f"unknown trajectory id {traj}")
        angle = norm_angle(angle)
        for ring_id, arc_idx in self.traj_arcs[traj]:
            ring = self.rings[ring_id]
            inside, off = ring.arcs[arc_idx].contains(angle)
            if inside:
                pos = ring.arc_starts[arc_idx] + off
                if pos >= ring.length:
                    pos -= ring.length
                return ring_id, pos
        raise RingStructureError(
            f"angle {angle} on trajectory {traj} matched no arc"
        )


def ring_of_point(ring_set: RingSet, traj: int, angle: float) -> tuple[int, float]:
    return ring_set.ring_of_point(traj, angle)


def _arc_of(edge: SmgEdge, smg: SMG) -> Arc:
    start = smg.links[edge.src.traj][edge.src.link].angle
    end = smg.links[edge.dst.traj][edge.dst.link].angle
    d = smg.directions[edge.src.traj]
    length = norm_angle((end - start) * d)
    if length < ANGLE_TOL:
        length = TWO_PI  # single link point: the arc is the whole circle
    return Arc(edge.src.traj, start, end, d, length)


def extract_rings(smg: SMG) -> RingSet:
    """Walk the unique cycle cover and materialize each cycle as a ring.

    Rings are discovered from the smallest unvisited node, which also
    serves as the ring origin for arclength bookkeeping. Trajectories
    without any link point become their own single-arc ring of length
    2*pi starting at angle 0.
    """
    visited: set[SmgNode] = set()
    rings: list[Ring] = []
    node_place: dict[SmgNode, tuple[int, float]] = {}
    traj_arcs: list[list[tuple[int, int]]] = [[] for _ in range(smg.n)]
    for origin in sorted(smg.nodes):
        if origin in visited:
            continue
        ring_id = len(rings)
        arcs: list[Arc] = []
        starts: list[float] = []
        members: list[SmgNode] = []
        cum = 0.0
        node = origin
        while True:
            visited.add(node)
            if node not in node_place:
                node_place[node] = (ring_id, cum)
                members.append(node)
            edge = smg.successor[node]
            if edge.kind == "arc":
                arc = _arc_of(edge, smg)
                starts.append(cum)
                arcs.append(arc)
                traj_arcs[arc.traj].append((ring_id, len(arcs) - 1))
                cum += arc.length
            node = edge.dst
            if node == origin:
                break
        k = round(cum / TWO_PI)
        if abs(cum / TWO_PI - k) > LENGTH_SNAP or k < 1:
            raise RingStructureError(
                f"ring {ring_id} length {cum} is not a multiple of 2*pi"
            )
        for member in members:
            _, pos = node_place[member]
            if pos >= cum - 1e-12:
                node_place[member] = (ring_id, 0.0)
        rings.append(Ring(ring_id, tuple(arcs), tuple(starts), cum, k))
    for traj in range(smg.n):
        if smg.links[traj]:
            continue
        ring_id = len(rings)
        arc = Arc(traj, 0.0, 0.0, smg.directions[traj], TWO_PI)
        rings.append(Ring(ring_id, (arc,), (0.0,), TWO_PI, 1))
        traj_arcs[traj].append((ring_id, 0))
    ring_set = RingSet(
        smg.n,
        smg.directions,
        tuple(rings),
        node_place,
        tuple(tuple(v) for v in traj_arcs),
    )
    if ring_set.total_capacity != smg.n:
        raise RingStructureError(
            f"ring capacities sum to {ring_set.total_capacity}, expected {smg.n}"
        )
    return ring_set


def reverse_rings(ring_set: RingSet) -> RingSet:
    """Ring decomposition of the same system with every sense flipped.

    The arcs are identical; each ring is traversed backwards. Arclengths
    are remeasured against the old origin point so that the result is a
    self-consistent RingSet for the opposite schedule.
    """
    new_rings: list[Ring] = []
    traj_arcs: list[list[tuple[int, int]]] = [[] for _ in range(ring_set.n)]
    arc_order: list[dict[int, int]] = []  # per ring: old arc idx -> new arc idx
    for ring in ring_set.rings:
        flipped: list[tuple[float, Arc, int]] = []
        for idx, arc in enumerate(ring.arcs):
            new_start = ring.arc_starts[idx] + arc.length
            pos = ring.length - new_start
            if pos < 0.0:
                pos += ring.length
            if pos >= ring.length - 1e-12:
                pos = 0.0
            flipped.append(
                (pos, Arc(arc.traj, arc.end, arc.start, -arc.direction, arc.length), idx)
            )
        flipped.sort(key=lambda rec: rec[0])
        order = {old: new for new, (_, _, old) in enumerate(flipped)}
        arc_order.append(order)
        arcs = tuple(a for _, a, _ in flipped)
        starts = tuple(p for p, _, _ in flipped)
        new_rings.append(Ring(ring.id, arcs, starts, ring.length, ring.k))
        for new_idx, arc in enumerate(arcs):
            traj_arcs[arc.traj].append((ring.id, new_idx))
    node_place = {}
    for node, (ring_id, pos) in ring_set.node_place.items():
        length = ring_set.rings[ring_id].length
        new_pos = length - pos
        if new_pos >= length - 1e-12:
            new_pos = 0.0
        node_place[node] = (ring_id, new_pos)
    return RingSet(
        ring_set.n,
        tuple(-d for d in ring_set.directions),
        tuple(new_rings),
        node_place,
        tuple(tuple(v) for v in traj_arcs),
    )
