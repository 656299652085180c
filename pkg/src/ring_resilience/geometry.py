"""Circle layouts, communication graphs, and scenario generators.

A scenario is a set of unit-radius trajectories. In geometric mode each
trajectory is a circle in the plane and two trajectories can communicate
when their centers are at most ``2 + range`` apart. In abstract mode the
graph and the link angles are given directly, which lets callers specify
a topology without solving for coordinates.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from functools import cached_property

TWO_PI = 2.0 * math.pi

# Angles closer than this are treated as the same direction.
ANGLE_TOL = 1e-9

DEFAULT_SPACING = 2.2
DEFAULT_RANGE = 0.5


class ScenarioError(ValueError):
    """Raised for invalid scenario documents or generator parameters."""


def norm_angle(theta: float) -> float:
    """Map an angle to the canonical interval [0, 2*pi)."""
    theta = math.fmod(theta, TWO_PI)
    if theta < 0.0:
        theta += TWO_PI
    return 0.0 if theta >= TWO_PI else theta


def angle_diff(a: float, b: float) -> float:
    """Signed angular difference a - b, normalized to [-pi, pi)."""
    return norm_angle(a - b + math.pi) - math.pi


@dataclass(frozen=True)
class Circle:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class AbstractEdge:
    a: int
    b: int
    beta: float  # direction of the a -> b link, radians in [0, 2*pi)


@dataclass(frozen=True)
class Scenario:
    """Validated input system: n unit circles plus a communication range.

    Geometric scenarios carry coordinates; abstract ones carry explicit
    edges with link directions. Centers must be strictly more than 2 apart
    so the circles never intersect or touch.
    """

    n: int
    range_r: float
    circles: tuple[Circle, ...] = ()
    abstract_edges: tuple[AbstractEdge, ...] | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ScenarioError("scenario needs at least one trajectory")
        if self.abstract_edges is not None:
            if self.circles:
                raise ScenarioError("abstract scenarios carry no coordinates")
            seen: set[tuple[int, int]] = set()
            for e in self.abstract_edges:
                if not (0 <= e.a < self.n and 0 <= e.b < self.n):
                    raise ScenarioError(f"edge ({e.a},{e.b}) references unknown id")
                if e.a == e.b:
                    raise ScenarioError(f"self-loop on id {e.a}")
                key = (min(e.a, e.b), max(e.a, e.b))
                if key in seen:
                    raise ScenarioError(f"duplicate edge {key}")
                seen.add(key)
            return
        if len(self.circles) != self.n:
            raise ScenarioError("circle count does not match n")
        if [c.id for c in self.circles] != list(range(self.n)):
            raise ScenarioError("circle ids must normalize to 0..n-1")
        if self.range_r < 0.0:
            raise ScenarioError("communication range must be nonnegative")
        for a in range(self.n):
            ca = self.circles[a]
            for b in range(a + 1, self.n):
                cb = self.circles[b]
                if math.hypot(cb.x - ca.x, cb.y - ca.y) <= 2.0:
                    raise ScenarioError(
                        f"circles {a} and {b} overlap or touch (centers <= 2 apart)"
                    )

    @property
    def abstract_mode(self) -> bool:
        return self.abstract_edges is not None


@dataclass(frozen=True)
class Edge:
    """Communication edge with its link geometry.

    ``beta`` is the direction of the vector from circle i's center to
    circle j's center. The point of C_i closest to C_j sits at angle
    ``phi_ij = beta``; symmetrically ``phi_ji = beta + pi (mod 2*pi)``.
    """

    i: int
    j: int
    beta: float
    phi_ij: float
    phi_ji: float


@dataclass(frozen=True)
class CommGraph:
    n: int
    edges: tuple[Edge, ...]

    @cached_property
    def adjacency(self) -> dict[int, tuple[tuple[int, int], ...]]:
        """Per node: tuple of (neighbor, edge index), sorted by neighbor."""
        adj: dict[int, list[tuple[int, int]]] = {i: [] for i in range(self.n)}
        for idx, e in enumerate(self.edges):
            adj[e.i].append((e.j, idx))
            adj[e.j].append((e.i, idx))
        return {i: tuple(sorted(v)) for i, v in adj.items()}

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def components(self) -> list[list[int]]:
        seen: set[int] = set()
        comps: list[list[int]] = []
        for start in range(self.n):
            if start in seen:
                continue
            comp = [start]
            seen.add(start)
            stack = [start]
            while stack:
                u = stack.pop()
                for v, _ in self.adjacency[u]:
                    if v not in seen:
                        seen.add(v)
                        comp.append(v)
                        stack.append(v)
            comps.append(sorted(comp))
        return comps

    def link_angle(self, edge_idx: int, side: int) -> float:
        e = self.edges[edge_idx]
        if side == e.i:
            return e.phi_ij
        if side == e.j:
            return e.phi_ji
        raise ValueError(f"node {side} is not an endpoint of edge {edge_idx}")


def build_comm_graph(scenario: Scenario) -> CommGraph:
    """Derive the communication graph with link positions for each edge."""
    edges: list[Edge] = []
    if scenario.abstract_mode:
        assert scenario.abstract_edges is not None
        for e in sorted(scenario.abstract_edges, key=lambda e: (min(e.a, e.b), max(e.a, e.b))):
            i, j = e.a, e.b
            beta = norm_angle(e.beta)
            if i > j:
                i, j = j, i
                beta = norm_angle(beta + math.pi)
            edges.append(Edge(i, j, beta, beta, norm_angle(beta + math.pi)))
        return CommGraph(scenario.n, tuple(edges))
    reach = 2.0 + scenario.range_r
    for i in range(scenario.n):
        ci = scenario.circles[i]
        for j in range(i + 1, scenario.n):
            cj = scenario.circles[j]
            if math.hypot(cj.x - ci.x, cj.y - ci.y) <= reach:
                beta = norm_angle(math.atan2(cj.y - ci.y, cj.x - ci.x))
                edges.append(Edge(i, j, beta, beta, norm_angle(beta + math.pi)))
    return CommGraph(scenario.n, tuple(edges))


# ---------------------------------------------------------------------------
# JSON round trip


def _require_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ScenarioError(f"unknown field(s) {sorted(unknown)} in {where}")


def load_scenario(text: str) -> Scenario:
    """Parse a scenario document. Unknown fields are rejected."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    if doc.get("abstract"):
        _require_keys(doc, {"abstract", "n", "edges"}, "abstract scenario")
        if doc["abstract"] is not True:
            raise ScenarioError('"abstract" must be true when present')
        n = doc.get("n")
        if not isinstance(n, int):
            raise ScenarioError('"n" must be an integer')
        raw_edges = doc.get("edges")
        if not isinstance(raw_edges, list):
            raise ScenarioError('"edges" must be a list')
        edges = []
        for rec in raw_edges:
            if not isinstance(rec, dict):
                raise ScenarioError("each edge must be an object")
            _require_keys(rec, {"a", "b", "beta"}, "edge")
            if not isinstance(rec.get("a"), int) or not isinstance(rec.get("b"), int):
                raise ScenarioError("edge endpoints must be integers")
            if not isinstance(rec.get("beta"), (int, float)):
                raise ScenarioError("edge beta must be a number")
            edges.append(AbstractEdge(rec["a"], rec["b"], norm_angle(float(rec["beta"]))))
        return Scenario(n=n, range_r=0.0, abstract_edges=tuple(edges))
    _require_keys(doc, {"range", "circles"}, "scenario")
    if "range" not in doc or "circles" not in doc:
        raise ScenarioError('scenario requires "range" and "circles"')
    if not isinstance(doc["range"], (int, float)):
        raise ScenarioError('"range" must be a number')
    if not isinstance(doc["circles"], list):
        raise ScenarioError('"circles" must be a list')
    circles = []
    for rec in doc["circles"]:
        if not isinstance(rec, dict):
            raise ScenarioError("each circle must be an object")
        _require_keys(rec, {"id", "x", "y"}, "circle")
        if not isinstance(rec.get("id"), int):
            raise ScenarioError("circle id must be an integer")
        if not isinstance(rec.get("x"), (int, float)) or not isinstance(rec.get("y"), (int, float)):
            raise ScenarioError("circle coordinates must be numbers")
        circles.append(Circle(rec["id"], float(rec["x"]), float(rec["y"])))
    ids = [c.id for c in circles]
    if len(set(ids)) != len(ids):
        raise ScenarioError("duplicate circle id")
    circles.sort(key=lambda c: c.id)
    normalized = tuple(Circle(k, c.x, c.y) for k, c in enumerate(circles))
    return Scenario(n=len(normalized), range_r=float(doc["range"]), circles=normalized)


def scenario_to_json(scenario: Scenario) -> str:
    if scenario.abstract_mode:
        assert scenario.abstract_edges is not None
        doc = {
            "abstract": True,
            "n": scenario.n,
            "edges": [{"a": e.a, "b": e.b, "beta": e.beta} for e in scenario.abstract_edges],
        }
    else:
        doc = {
            "range": scenario.range_r,
            "circles": [{"id": c.id, "x": c.x, "y": c.y} for c in scenario.circles],
        }
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Generators


def _check_spacing(spacing: float, range_r: float) -> None:
    if not 2.0 < spacing <= 2.0 + range_r:
        raise ScenarioError(
            f"spacing {spacing} outside the usable band (2, {2.0 + range_r}]"
        )


def _circles(points: list[tuple[float, float]]) -> tuple[Circle, ...]:
    return tuple(Circle(k, x, y) for k, (x, y) in enumerate(points))


def generate(
    kind: str,
    *,
    nodes: int | None = None,
    rows: int | None = None,
    cols: int | None = None,
    spacing: float = DEFAULT_SPACING,
    range_r: float = DEFAULT_RANGE,
    seed: int = 0,
) -> Scenario:
    """Build a named topology whose communication graph is exactly that shape.

    Kinds: chain, cycle, grid, star, random_tree. Chains, cycles, grids and
    stars are geometric; random trees are emitted in abstract mode with
    seeded link directions, since arbitrary trees have no canonical planar
    embedding that keeps non-adjacent circles out of range.
    """
    if kind == "chain":
        if nodes is None or nodes < 1:
            raise ScenarioError("chain requires nodes >= 1")
        _check_spacing(spacing, range_r)
        return Scenario(
            n=nodes,
            range_r=range_r,
            circles=_circles([(i * spacing, 0.0) for i in range(nodes)]),
        )
    if kind == "cycle":
        if nodes is None or nodes < 3:
            raise ScenarioError("cycle requires nodes >= 3")
        _check_spacing(spacing, range_r)
        radius = spacing / (2.0 * math.sin(math.pi / nodes))
        # Non-adjacent chords must stay out of range; a 3-cycle is complete
        # anyway, so only larger polygons need the separation check.
        if nodes > 3:
            second = 2.0 * radius * math.sin(2.0 * math.pi / nodes)
            if second <= 2.0 + range_r:
                raise ScenarioError(
                    f"cycle of {nodes} at spacing {spacing} would gain chord edges"
                )
        pts = [
            (radius * math.cos(TWO_PI * i / nodes), radius * math.sin(TWO_PI * i / nodes))
            for i in range(nodes)
        ]
        return Scenario(n=nodes, range_r=range_r, circles=_circles(pts))
    if kind == "grid":
        if rows is None or cols is None or rows < 1 or cols < 1:
            raise ScenarioError("grid requires rows >= 1 and cols >= 1")
        _check_spacing(spacing, range_r)
        if rows > 1 and cols > 1 and spacing * math.sqrt(2.0) <= 2.0 + range_r:
            raise ScenarioError("grid spacing admits diagonal edges")
        pts = [(c * spacing, r * spacing) for r in range(rows) for c in range(cols)]
        return Scenario(n=rows * cols, range_r=range_r, circles=_circles(pts))
    if kind == "star":
        if nodes is None or nodes < 2:
            raise ScenarioError("star requires nodes >= 2")
        _check_spacing(spacing, range_r)
        leaves = nodes - 1
        if leaves > 1:
            gap = 2.0 * spacing * math.sin(math.pi / leaves)
            if gap <= 2.0 + range_r:
                raise ScenarioError(f"star with {leaves} leaves packs them within range")
        pts = [(0.0, 0.0)] + [
            (spacing * math.cos(TWO_PI * t / leaves), spacing * math.sin(TWO_PI * t / leaves))
            for t in range(leaves)
        ]
        return Scenario(n=nodes, range_r=range_r, circles=_circles(pts))
    if kind == "random_tree":
        if nodes is None or nodes < 1:
            raise ScenarioError("random_tree requires nodes >= 1")
        rng = random.Random(seed)
        while True:
            edges = []
            link_dirs: dict[int, list[float]] = {i: [] for i in range(nodes)}
            for child in range(1, nodes):
                parent = rng.randrange(child)
                beta = norm_angle(rng.uniform(0.0, TWO_PI))
                edges.append(AbstractEdge(parent, child, beta))
                link_dirs[parent].append(beta)
                link_dirs[child].append(norm_angle(beta + math.pi))
            if all(_angles_distinct(v) for v in link_dirs.values()):
                return Scenario(n=nodes, range_r=0.0, abstract_edges=tuple(edges))
    raise ScenarioError(f"unknown generator kind {kind!r}")


def _angles_distinct(angles: list[float]) -> bool:
    if len(angles) < 2:
        return True
    ordered = sorted(angles)
    gaps = [b - a for a, b in zip(ordered, ordered[1:])]
    gaps.append(ordered[0] + TWO_PI - ordered[-1])
    return min(gaps) > ANGLE_TOL
