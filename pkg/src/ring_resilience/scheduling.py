"""Synchronized patrol schedules.

A schedule assigns each trajectory a start angle f and a rotation sense g
(+1 counterclockwise, -1 clockwise); the robot of trajectory i sits at
``f_i + g_i * 2*pi*t`` after t periods. Neighbors meet at their shared link
exactly when the senses alternate across every edge and the start angles
satisfy ``f_j = 2*beta_ij - f_i + pi (mod 2*pi)``. Doubling beta makes the
relation orientation-free, so it can be propagated along either direction
of an edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import TWO_PI, CommGraph, angle_diff, norm_angle

# Accumulated angular slack allowed when closing a cycle.
RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class Schedule:
    f: tuple[float, ...]
    g: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.f) != len(self.g):
            raise ValueError("f and g must have the same length")
        if any(s not in (-1, 1) for s in self.g):
            raise ValueError("rotation senses must be +1 or -1")

    @property
    def n(self) -> int:
        return len(self.f)


def position_at(schedule: Schedule, i: int, t: float) -> float:
    """Angle of trajectory i's robot after t periods."""
    if not 0 <= i < schedule.n:
        raise ValueError(f"unknown trajectory id {i}")
    return norm_angle(schedule.f[i] + schedule.g[i] * TWO_PI * t)


def opposite_schedule(schedule: Schedule) -> Schedule:
    """Same start angles with every rotation sense flipped; also valid."""
    return Schedule(schedule.f, tuple(-s for s in schedule.g))


@dataclass(frozen=True)
class EdgeCheck:
    i: int
    j: int
    direction_ok: bool
    residual: float  # signed angular error of the start-angle relation

    @property
    def ok(self) -> bool:
        return self.direction_ok and abs(self.residual) <= RESIDUAL_TOL


@dataclass(frozen=True)
class VerifyReport:
    checks: tuple[EdgeCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> tuple[EdgeCheck, ...]:
        return tuple(c for c in self.checks if not c.ok)


def verify_schedule(graph: CommGraph, schedule: Schedule) -> VerifyReport:
    """Check the meeting relation and sense alternation on every edge."""
    if schedule.n != graph.n:
        raise ValueError("schedule size does not match graph")
    checks = []
    for e in graph.edges:
        expected = norm_angle(2.0 * e.beta - schedule.f[e.i] + math.pi)
        checks.append(
            EdgeCheck(
                e.i,
                e.j,
                direction_ok=schedule.g[e.i] == -schedule.g[e.j],
                residual=angle_diff(schedule.f[e.j], expected),
            )
        )
    return VerifyReport(tuple(checks))


@dataclass(frozen=True)
class FeasibilityReport:
    """Either a schedule or a witness explaining why none exists.

    ``odd_cycle`` lists the nodes of a cycle of odd length (rotation senses
    cannot alternate around it). ``inconsistent_cycle`` lists an even cycle
    whose start-angle constraints close with the reported residual.
    """

    feasible: bool
    schedule: Schedule | None = None
    odd_cycle: tuple[int, ...] | None = None
    inconsistent_cycle: tuple[int, ...] | None = None
    residual: float | None = None


def _cycle_through(parent: dict[int, int | None], u: int, v: int) -> tuple[int, ...]:
    """Nodes of the cycle formed by the tree paths of u and v plus edge (u, v)."""
    up: list[int] = []
    node: int | None = u
    while node is not None:
        up.append(node)
        node = parent[node]
    mark = set(up)
    down: list[int] = []
    node = v
    while node not in mark:
        down.append(node)
        node = parent[node]
        assert node is not None
    lca = node
    head = up[: up.index(lca) + 1]
    return tuple(head + list(reversed(down)))


def solve_schedule(graph: CommGraph, root: int | None = None) -> FeasibilityReport:
    """Propagate start angles over a BFS tree and validate the co-tree edges.

    Each component is rooted at its lowest id (or at ``root`` for the
    component containing it) with ``f = 0`` and sense +1. Tree edges force
    the neighbor's angle and sense; every non-tree edge is then checked,
    yielding an odd-cycle or inconsistent-cycle witness on failure.
    """
    if root is not None and not 0 <= root < graph.n:
        raise ValueError(f"root {root} out of range")
    f: dict[int, float] = {}
    g: dict[int, int] = {}
    parent: dict[int, int | None] = {}
    for comp in graph.components():
        start = root if root is not None and root in comp else comp[0]
        f[start] = 0.0
        g[start] = 1
        parent[start] = None
        queue = [start]
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            for v, eidx in graph.adjacency[u]:
                e = graph.edges[eidx]
                want_f = norm_angle(2.0 * e.beta - f[u] + math.pi)
                if v not in f:
                    f[v] = want_f
                    g[v] = -g[u]
                    parent[v] = u
                    queue.append(v)
                    continue
                if parent[u] == v or parent[v] == u:
                    continue
                if g[v] != -g[u]:
                    return FeasibilityReport(False, odd_cycle=_cycle_through(parent, u, v))
                residual = angle_diff(f[v], want_f)
                if abs(residual) > RESIDUAL_TOL:
                    return FeasibilityReport(
                        False,
                        inconsistent_cycle=_cycle_through(parent, u, v),
                        residual=residual,
                    )
    schedule = Schedule(
        tuple(f[i] for i in range(graph.n)),
        tuple(g[i] for i in range(graph.n)),
    )
    return FeasibilityReport(True, schedule=schedule)


def schedule_to_json(schedule: Schedule) -> dict:
    return {"f": list(schedule.f), "g": list(schedule.g)}


def load_schedule(doc: object, n: int) -> Schedule:
    """Parse {"f": [...], "g": [...]}; unknown fields are rejected."""
    if not isinstance(doc, dict):
        raise ValueError("schedule document must be a JSON object")
    if set(doc) != {"f", "g"}:
        raise ValueError('schedule document must have exactly the keys "f" and "g"')
    f, g = doc["f"], doc["g"]
    if not isinstance(f, list) or not isinstance(g, list):
        raise ValueError('"f" and "g" must be arrays')
    if len(f) != n or len(g) != n:
        raise ValueError(f"schedule length must match the scenario ({n} trajectories)")
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in f):
        raise ValueError('"f" entries must be numbers (radians)')
    if not all(isinstance(s, int) and not isinstance(s, bool) for s in g):
        raise ValueError('"g" entries must be the integers +1 or -1')
    return Schedule(tuple(float(x) for x in f), tuple(int(s) for s in g))
