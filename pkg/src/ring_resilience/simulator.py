"""Event-driven simulation of a synchronized patrol with failures.

A robot always follows the schedule of the trajectory it currently rides,
so positions are closed-form and the only events are link arrivals and
failures. Arrivals at one link happen at a fixed phase within every
period (that is what synchronization means), which makes the timeline a
grid: period index plus a small set of per-edge phases. When a robot
reaches a link it either meets the neighbor, who is provably at the other
end at that exact instant, or finds the neighbor trajectory empty and
hops over instantly.

The module also provides enumeration oracles that measure resilience by
simulation alone, for cross-checking the slot arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from .geometry import TWO_PI, CommGraph, norm_angle
from .rings import RingSet
from .scheduling import Schedule, position_at

# Two instants closer than this are simultaneous (in periods).
TIME_TOL = 1e-9
EVENT_CAP = 10**6


class SimulationError(RuntimeError):
    """Inconsistent simulation input, usually an unsynchronized schedule."""


@dataclass(frozen=True)
class Failure:
    robot: int
    time: float = 0.0


@dataclass(frozen=True)
class FailurePlan:
    failures: tuple[Failure, ...] = ()

    def __post_init__(self) -> None:
        ids = [f.robot for f in self.failures]
        if len(set(ids)) != len(ids):
            raise ValueError("a robot can fail only once")
        if any(f.time < 0.0 for f in self.failures):
            raise ValueError("failure times must be nonnegative")

    @property
    def last_time(self) -> float:
        return max((f.time for f in self.failures), default=0.0)


@dataclass(frozen=True)
class Event:
    time: float
    kind: str  # "failure" | "arrival" | "meeting" | "switch"
    robot: int
    trajectory: int
    angle: float
    partner: int | None = None  # meeting partner


@dataclass(frozen=True)
class SimTrace:
    graph: CommGraph = field(repr=False)
    schedule: Schedule = field(repr=False)
    ring_set: RingSet = field(repr=False)
    plan: FailurePlan
    horizon: float
    events: tuple[Event, ...]
    occupancy: tuple[tuple[int, int, float, float], ...]  # robot, traj, t_in, t_out
    ring_counts: tuple[tuple[float, str, tuple[int, ...]], ...]  # time, cause, counts
    starving: dict[int, bool]  # alive robots only
    covered: dict[int, bool]  # per trajectory, from final ring occupancy
    truncated: bool

    @property
    def alive(self) -> tuple[int, ...]:
        failed = {f.robot for f in self.plan.failures}
        return tuple(r for r in range(self.graph.n) if r not in failed)


def _phase_rounds(
    graph: CommGraph, schedule: Schedule
) -> list[tuple[float, list[int]]]:
    """Group edges by the within-period phase at which their link fires.

    Both sides of an edge must arrive at the same phase; a mismatch means
    the schedule is not synchronized. Distinct edges in one group never
    share a trajectory, so same-instant processing order cannot matter.
    """
    recs = []
    for idx, e in enumerate(graph.edges):
        ti = norm_angle((e.phi_ij - schedule.f[e.i]) * schedule.g[e.i]) / TWO_PI
        tj = norm_angle((e.phi_ji - schedule.f[e.j]) * schedule.g[e.j]) / TWO_PI
        drift = abs(ti - tj)
        if min(drift, 1.0 - drift) > TIME_TOL:
            raise SimulationError(
                f"edge ({e.i},{e.j}) sides arrive {drift} periods apart; "
                "schedule is not synchronized"
            )
        tau = 0.0 if ti >= 1.0 - TIME_TOL else ti
        recs.append((tau, idx))
    recs.sort()
    rounds: list[tuple[float, list[int]]] = []
    for tau, idx in recs:
        if rounds and tau - rounds[-1][0] <= TIME_TOL:
            rounds[-1][1].append(idx)
        else:
            rounds.append((tau, [idx]))
    return rounds


_KIND_RANK = {"failure": 0, "arrival": 1, "meeting": 2, "switch": 3}


def auto_horizon(ring_set: RingSet, plan: FailurePlan) -> float:
    """One full recurrence of the joint motion after the last failure."""
    period = math.lcm(*(r.k for r in ring_set.rings))
    return float(period + math.ceil(plan.last_time))


def simulate(
    graph: CommGraph,
    schedule: Schedule,
    ring_set: RingSet,
    plan: FailurePlan = FailurePlan(),
    horizon: float | str = "auto",
) -> SimTrace:
    """Run the system for ``horizon`` periods and record everything.

    Failures are applied at their scheduled instants, before any link
    arrival at the same instant. Events strictly at or beyond the horizon
    are not processed. The trace is a pure function of the inputs.
    """
    n = graph.n
    for f in plan.failures:
        if not 0 <= f.robot < n:
            raise ValueError(f"failure names unknown robot {f.robot}")
    if horizon == "auto":
        end = auto_horizon(ring_set, plan)
    else:
        end = float(horizon)  # type: ignore[arg-type]
        if end <= 0.0:
            raise ValueError("horizon must be positive")
    if plan.failures and plan.last_time > end - TIME_TOL:
        raise ValueError("every failure must fall strictly inside the horizon")
    rounds = _phase_rounds(graph, schedule)
    occ: list[int | None] = list(range(n))
    entered: dict[int, tuple[int, float]] = {r: (r, 0.0) for r in range(n)}
    occupancy: list[tuple[int, int, float, float]] = []
    events: list[Event] = []
    counts_series: list[tuple[float, str, tuple[int, ...]]] = []
    last_meeting: dict[int, float] = {}
    truncated = False

    def ring_counts(t: float) -> tuple[int, ...]:
        counts = [0] * len(ring_set.rings)
        for traj, robot in enumerate(occ):
            if robot is not None:
                ring_id, _ = ring_set.ring_of_point(traj, position_at(schedule, traj, t))
                counts[ring_id] += 1
        return tuple(counts)

    counts_series.append((0.0, "init", ring_counts(0.0)))

    failures = sorted(plan.failures, key=lambda f: (f.time, f.robot))
    fail_pos = 0

    def apply_failures(upto: float, at_instant: bool = False) -> int:
        """Pop due failures; return how many coincide with the instant.

        A failure landing exactly on a link round is part of that atomic
        instant: its counts snapshot must wait until the round's hops have
        settled, otherwise the series shows a half-applied transition.
        """
        nonlocal fail_pos
        deferred = 0
        while fail_pos < len(failures) and failures[fail_pos].time <= upto + TIME_TOL:
            f = failures[fail_pos]
            fail_pos += 1
            traj, t_in = entered.pop(f.robot)
            occupancy.append((f.robot, traj, t_in, f.time))
            occ[traj] = None
            events.append(
                Event(f.time, "failure", f.robot, traj, position_at(schedule, traj, f.time))
            )
            if at_instant and abs(f.time - upto) <= TIME_TOL:
                deferred += 1
            else:
                counts_series.append((f.time, "failure", ring_counts(f.time)))
        return deferred

    period = 0
    while rounds and not truncated and float(period) < end - TIME_TOL:
        base = float(period)
        for tau, edge_ids in rounds:
            t = base + tau
            if t >= end - TIME_TOL:
                break  # phases are sorted; the rest of this period is past the horizon
            deferred = apply_failures(t, at_instant=True)
            instant: list[Event] = []
            for idx in edge_ids:
                e = graph.edges[idx]
                u, v = occ[e.i], occ[e.j]
                if u is None and v is None:
                    continue
                if u is not None:
                    instant.append(Event(t, "arrival", u, e.i, e.phi_ij))
                if v is not None:
                    instant.append(Event(t, "arrival", v, e.j, e.phi_ji))
                if u is not None and v is not None:
                    a, b = (u, v) if u < v else (v, u)
                    ang = e.phi_ij if a == u else e.phi_ji
                    traj = e.i if a == u else e.j
                    instant.append(Event(t, "meeting", a, traj, ang, partner=b))
                    last_meeting[u] = t
                    last_meeting[v] = t
                elif u is not None:
                    occ[e.i] = None
                    occ[e.j] = u
                    traj, t_in = entered.pop(u)
                    occupancy.append((u, traj, t_in, t))
                    entered[u] = (e.j, t)
                    instant.append(Event(t, "switch", u, e.j, e.phi_ji))
                else:
                    assert v is not None
                    occ[e.j] = None
                    occ[e.i] = v
                    traj, t_in = entered.pop(v)
                    occupancy.append((v, traj, t_in, t))
                    entered[v] = (e.i, t)
                    instant.append(Event(t, "switch", v, e.i, e.phi_ij))
            if instant:
                instant.sort(key=lambda ev: (_KIND_RANK[ev.kind], ev.robot))
                events.extend(instant)
            if instant or deferred:
                cause = "failure" if deferred else "arrival"
                counts_series.append((t, cause, ring_counts(t)))
            if len(events) > EVENT_CAP:
                truncated = True
                break
        period += 1

    apply_failures(end)
    for robot, (traj, t_in) in sorted(entered.items()):
        occupancy.append((robot, traj, t_in, end))
    occupancy.sort(key=lambda rec: (rec[2], rec[0]))

    t_settle = plan.last_time
    starving = {
        r: (r not in last_meeting or last_meeting[r] < t_settle - TIME_TOL)
        for r in range(n)
        if r not in {f.robot for f in plan.failures}
    }
    # Counts never move between instants, so the last snapshot is the
    # settled state; evaluating at the horizon itself would read robots
    # mid-link with the round that reshuffles them left unprocessed.
    final_counts = counts_series[-1][2]
    covered: dict[int, bool] = {}
    for traj in range(n):
        rings_here = {ring_id for ring_id, _ in ring_set.traj_arcs[traj]}
        covered[traj] = all(final_counts[r] > 0 for r in rings_here)
    return SimTrace(
        graph=graph,
        schedule=schedule,
        ring_set=ring_set,
        plan=plan,
        horizon=end,
        events=tuple(events),
        occupancy=tuple(occupancy),
        ring_counts=tuple(counts_series),
        starving=starving,
        covered=covered,
        truncated=truncated,
    )


def write_trace_csv(trace: SimTrace, path: str) -> None:
    """CSV with columns time,event,robot,trajectory,angle,partner.

    Angles carry nine decimals; the file is byte-identical across runs for
    identical inputs.
    """
    lines = ["time,event,robot,trajectory,angle,partner"]
    for ev in trace.events:
        partner = "" if ev.partner is None else str(ev.partner)
        lines.append(
            f"{ev.time:.9f},{ev.kind},{ev.robot},{ev.trajectory},{ev.angle:.9f},{partner}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Derived measurements


@dataclass(frozen=True)
class CoverageReport:
    by_occupancy: dict[int, bool]
    by_sweep: dict[int, bool]

    @property
    def agree(self) -> bool:
        return self.by_occupancy == self.by_sweep


def _union_length(intervals: list[tuple[float, float]]) -> float:
    """Total measure of a union of angular intervals given as (start, sweep)."""
    flat: list[tuple[float, float]] = []
    for start, sweep in intervals:
        if sweep >= TWO_PI - 1e-9:
            return TWO_PI
        s = norm_angle(start)
        e = s + sweep
        if e <= TWO_PI:
            flat.append((s, e))
        else:
            flat.append((s, TWO_PI))
            flat.append((0.0, e - TWO_PI))
    flat.sort()
    total = 0.0
    cur_s, cur_e = -1.0, -1.0
    for s, e in flat:
        if s > cur_e + 1e-12:
            total += max(0.0, cur_e - cur_s)
            cur_s, cur_e = s, e
        else:
            cur_e = max(cur_e, e)
    total += max(0.0, cur_e - cur_s)
    return min(total, TWO_PI)


def coverage_report(trace: SimTrace) -> CoverageReport:
    """Coverage by ring occupancy, cross-checked by the arcs actually swept.

    Sweeps are measured from the last failure onward, the steady state the
    occupancy claim describes. The two views must agree whenever the
    horizon leaves at least one full ring tour after the last failure.
    """
    t0 = trace.plan.last_time
    swept: dict[int, list[tuple[float, float]]] = {i: [] for i in range(trace.graph.n)}
    for robot, traj, t_in, t_out in trace.occupancy:
        lo = max(t_in, t0)
        if t_out - lo <= TIME_TOL:
            continue
        start = position_at(trace.schedule, traj, lo)
        sweep = TWO_PI * (t_out - lo)
        if trace.schedule.g[traj] == 1:
            swept[traj].append((start, min(sweep, TWO_PI)))
        else:
            swept[traj].append((start - min(sweep, TWO_PI), min(sweep, TWO_PI)))
    by_sweep = {
        traj: _union_length(swept[traj]) >= TWO_PI - 1e-6 for traj in swept
    }
    return CoverageReport(dict(trace.covered), by_sweep)


def revisit_period(trace: SimTrace, traj: int, angle: float) -> float:
    """Shortest period of the visit pattern at one trajectory point.

    Visits are collected after the last failure. The value returned is the
    smallest positive shift that maps the observed visit times into
    themselves; for a ring with a single surviving robot this equals the
    ring length divided by 2*pi, and in general it divides that quantity.
    """
    if not 0 <= traj < trace.graph.n:
        raise ValueError(f"unknown trajectory id {traj}")
    angle = norm_angle(angle)
    t0 = trace.plan.last_time
    tau = norm_angle((angle - trace.schedule.f[traj]) * trace.schedule.g[traj]) / TWO_PI
    visits: list[float] = []
    for _, tr, t_in, t_out in trace.occupancy:
        if tr != traj:
            continue
        lo = max(t_in, t0)
        k = math.ceil(lo - tau - TIME_TOL)
        while (vt := tau + k) <= t_out + TIME_TOL:
            # strictly after the settle instant: a robot dying at the last
            # failure while standing on the point is not a patrol visit
            if vt >= lo - TIME_TOL and vt > t0 + TIME_TOL:
                visits.append(vt)
            k += 1
    visits.sort()
    dedup: list[float] = []
    for v in visits:
        if not dedup or v - dedup[-1] > TIME_TOL:
            dedup.append(v)
    if len(dedup) < 2:
        raise ValueError(
            f"point {angle} on trajectory {traj} is not revisited within the horizon"
        )
    for span in range(1, len(dedup)):
        period = dedup[span] - dedup[0]
        if all(
            abs(dedup[i + span] - dedup[i] - period) <= 1e-6
            for i in range(len(dedup) - span)
        ):
            return period
    raise ValueError(
        f"no stable revisit period at {angle} on trajectory {traj}; extend the horizon"
    )


# ---------------------------------------------------------------------------
# Enumeration oracles


def _rounds_as_pairs(graph: CommGraph, schedule: Schedule) -> list[list[tuple[int, int]]]:
    return [
        [(graph.edges[idx].i, graph.edges[idx].j) for idx in edge_ids]
        for _, edge_ids in _phase_rounds(graph, schedule)
    ]


def _survivors_all_starve(
    n: int, rounds: list[list[tuple[int, int]]], survivors: tuple[int, ...]
) -> bool:
    """Pure event stepping; stops when the configuration repeats.

    Returns False the moment any two survivors stand at the two ends of a
    link, True once the occupancy pattern cycles without any meeting.
    """
    occ: list[int | None] = [None] * n
    for r in survivors:
        occ[r] = r
    seen: set[tuple[int | None, ...]] = set()
    while True:
        state = tuple(occ)
        if state in seen:
            return True
        seen.add(state)
        for edges in rounds:
            for i, j in edges:
                u, v = occ[i], occ[j]
                if u is None:
                    if v is not None:
                        occ[i], occ[j] = v, None
                elif v is None:
                    occ[i], occ[j] = None, u
                else:
                    return False


def brute_force_sn(
    graph: CommGraph,
    schedule: Schedule,
    *,
    bound: int = 12,
    max_fail: int | None = None,
    jobs: int = 1,
) -> int | None:
    """Largest survivor count that can leave every survivor starving.

    Enumerates every failure subset applied at t=0 and simulates each rest
    system, so it shares no arithmetic with the slot model. With
    ``max_fail`` the sweep stops at that failure-set size and returns None
    when no starving pattern exists within it. ``jobs`` splits one size
    class across worker threads; the result does not depend on it.
    """
    n = graph.n
    if n > bound:
        raise ValueError(f"n={n} exceeds the enumeration bound {bound}")
    rounds = _rounds_as_pairs(graph, schedule)
    floor = 1 if max_fail is None else max(1, n - max_fail)
    for size in range(n, floor - 1, -1):
        if jobs > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=jobs) as pool:
                hits = pool.map(
                    lambda s: _survivors_all_starve(n, rounds, s),
                    combinations(range(n), size),
                    chunksize=64,
                )
                if any(hits):
                    return size
        elif any(
            _survivors_all_starve(n, rounds, s) for s in combinations(range(n), size)
        ):
            return size
    return None if max_fail is not None else 0


def brute_force_ur(
    schedule: Schedule,
    ring_set: RingSet,
    *,
    bound: int = 12,
    max_fail: int | None = None,
) -> int | None:
    """One less than the smallest failure set that leaves some ring empty.

    Checks actual robot placements rather than ring capacities: subsets
    are enumerated by size and tested against the t=0 ring assignment.
    Returns None when ``max_fail`` caps the sweep below the answer.
    """
    n = ring_set.n
    if n > bound:
        raise ValueError(f"n={n} exceeds the enumeration bound {bound}")
    home_ring = [ring_set.ring_of_point(r, schedule.f[r])[0] for r in range(n)]
    ring_ids = {r.id for r in ring_set.rings}
    top = n if max_fail is None else min(n, max_fail)
    for size in range(1, top + 1):
        for removed in combinations(range(n), size):
            gone = set(removed)
            left = {ring: 0 for ring in ring_ids}
            for robot in range(n):
                if robot not in gone:
                    left[home_ring[robot]] += 1
            if any(c == 0 for c in left.values()):
                return size - 1
    return None if max_fail is not None and top < n else n - 1
