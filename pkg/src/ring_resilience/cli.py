"""Command line front end.

Exit codes: 0 success, 1 scenario infeasible (witness on stderr), 2
invalid input. All diagnostics go to stderr; primary output is stdout or
the file named by -o, and is byte-identical across runs for identical
inputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .geometry import (
    DEFAULT_RANGE,
    DEFAULT_SPACING,
    CommGraph,
    Scenario,
    ScenarioError,
    build_comm_graph,
    generate,
    load_scenario,
    scenario_to_json,
)
from .render import render_svg
from .resilience import (
    Analysis,
    SlotLimitError,
    analyze_scenario,
    analyze_with_schedule,
)
from .scheduling import (
    FeasibilityReport,
    Schedule,
    load_schedule,
    schedule_to_json,
    solve_schedule,
    verify_schedule,
)
from .simulator import (
    Failure,
    FailurePlan,
    SimTrace,
    brute_force_sn,
    brute_force_ur,
    coverage_report,
    simulate,
    write_trace_csv,
)

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INVALID = 2

SEED_ENV = "RING_RESILIENCE_SEED"


class Infeasible(Exception):
    """Scenario admits no synchronized schedule; carries the witness text."""


def _witness_text(feas: FeasibilityReport) -> str:
    if feas.odd_cycle is not None:
        cyc = "-".join(str(v) for v in feas.odd_cycle)
        return f"infeasible: odd cycle through trajectories {cyc}"
    assert feas.inconsistent_cycle is not None and feas.residual is not None
    cyc = "-".join(str(v) for v in feas.inconsistent_cycle)
    return (
        f"infeasible: cycle {cyc} closes with residual {feas.residual:.9f} rad"
    )


def _read_scenario(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read())


def _obtain_schedule(graph: CommGraph, args: argparse.Namespace) -> Schedule:
    """Load and verify --schedule, or solve one; infeasible raises."""
    if getattr(args, "schedule", None):
        with open(args.schedule, encoding="utf-8") as fh:
            schedule = load_schedule(json.load(fh), graph.n)
        check = verify_schedule(graph, schedule)
        if not check.ok:
            bad = check.failures()[0]
            raise ValueError(
                f"schedule does not verify on edge ({bad.i},{bad.j}): "
                f"residual {bad.residual:.9f} rad"
            )
        return schedule
    feas = solve_schedule(graph, root=getattr(args, "root", None))
    if not feas.feasible:
        raise Infeasible(_witness_text(feas))
    assert feas.schedule is not None
    return feas.schedule


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _print_json(obj: object) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# Report assembly


def _rings_payload(analysis: Analysis) -> list[dict]:
    assert analysis.ring_set is not None
    payload = []
    for ring in analysis.ring_set.rings:
        payload.append(
            {
                "id": ring.id,
                "k": ring.k,
                "length_over_pi": round(ring.length / 3.141592653589793, 9),
                "arcs": [
                    {
                        "trajectory": a.traj,
                        "start": round(a.start, 9),
                        "end": round(a.end, 9),
                        "direction": a.direction,
                    }
                    for a in ring.arcs
                ],
            }
        )
    return payload


def _rings_table(analysis: Analysis) -> str:
    assert analysis.ring_set is not None
    lines = [f"{'ring':>4}  {'k':>3}  {'length':>8}  arcs"]
    for ring in analysis.ring_set.rings:
        arcs = " ".join(
            f"[{a.traj}:{a.start:.3f}{'+' if a.direction == 1 else '-'}{a.end:.3f}]"
            for a in ring.arcs
        )
        lines.append(
            f"{ring.id:>4}  {ring.k:>3}  {ring.length / 3.141592653589793:>7.3f}π  {arcs}"
        )
    return "\n".join(lines)


def _expectation_payload(analysis: Analysis) -> dict | None:
    report = analysis.report
    assert report is not None
    if report.expectation is None:
        return None
    e = report.expectation
    return {
        "kind": e.kind,
        "ring_count": e.ring_count,
        "ur": e.ur,
        "sn_min": e.sn_min,
        "sn_max": e.sn_max,
        "ir_min": e.ir_min,
        "ir_max": e.ir_max,
        "exact": e.exact,
    }


def _resilience_payload(analysis: Analysis) -> dict:
    report = analysis.report
    assert report is not None
    return {
        "n": report.n,
        "ring_count": report.ring_count,
        "ring_capacities": list(report.ring_capacities),
        "ur": report.ur,
        "sn": report.sn,
        "ir": report.ir,
        "sn_witness_robots": list(report.sn_witness_robots),
        "expectation": _expectation_payload(analysis),
        "expectation_ok": report.expectation_ok,
    }


def _resilience_table(analysis: Analysis) -> str:
    report = analysis.report
    assert report is not None
    lines = [
        f"robots               {report.n}",
        f"rings                {report.ring_count} "
        f"(capacities {', '.join(str(k) for k in report.ring_capacities)})",
        f"uncovering UR        {report.ur}",
        f"starvation SN        {report.sn} "
        f"(witness robots {', '.join(str(r) for r in report.sn_witness_robots)})",
        f"isolation IR         {report.ir}",
    ]
    e = report.expectation
    if e is not None:
        sn_txt = str(e.sn_min) if e.sn_min == e.sn_max else f"[{e.sn_min},{e.sn_max}]"
        ir_txt = str(e.ir_min) if e.ir_min == e.ir_max else f">= {e.ir_min}"
        lines.append(
            f"expected ({e.kind})".ljust(21)
            + f"rings={e.ring_count} UR={e.ur} SN={sn_txt} IR={ir_txt}"
        )
        lines.append(
            f"expectation check    {'ok' if report.expectation_ok else 'MISMATCH'}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_generate(args: argparse.Namespace) -> int:
    seed = args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            raise ValueError(f"{SEED_ENV} must be an integer, got {env!r}")
    scenario = generate(
        args.kind,
        nodes=args.nodes,
        rows=args.rows,
        cols=args.cols,
        spacing=args.spacing,
        range_r=args.range,
        seed=seed,
    )
    _emit(scenario_to_json(scenario), args.output)
    return EXIT_OK


def _cmd_schedule(args: argparse.Namespace) -> int:
    scenario = _read_scenario(args.scenario)
    graph = build_comm_graph(scenario)
    feas = solve_schedule(graph, root=args.root)
    if not feas.feasible:
        raise Infeasible(_witness_text(feas))
    assert feas.schedule is not None
    _emit(json.dumps(schedule_to_json(feas.schedule), indent=2), args.output)
    return EXIT_OK


def _analysis_for(args: argparse.Namespace, scenario: Scenario) -> Analysis:
    graph = build_comm_graph(scenario)
    if getattr(args, "schedule", None):
        schedule = _obtain_schedule(graph, args)
        return analyze_with_schedule(
            scenario, schedule, graph=graph, force=getattr(args, "force", False)
        )
    analysis = analyze_scenario(
        scenario, force=getattr(args, "force", False), root=getattr(args, "root", None)
    )
    if not analysis.feasibility.feasible:
        raise Infeasible(_witness_text(analysis.feasibility))
    return analysis


def _cmd_analyze(args: argparse.Namespace) -> int:
    scenario = _read_scenario(args.scenario)
    analysis = _analysis_for(args, scenario)
    assert analysis.schedule is not None and analysis.report is not None
    if args.format == "json":
        _print_json(
            {
                "n": analysis.graph.n,
                "edges": len(analysis.graph.edges),
                "components": len(analysis.graph.components()),
                "feasible": True,
                "schedule": schedule_to_json(analysis.schedule),
                "rings": _rings_payload(analysis),
                "resilience": _resilience_payload(analysis),
            }
        )
        return EXIT_OK
    g = analysis.graph
    print(f"trajectories         {g.n}")
    print(f"edges                {len(g.edges)}")
    print(f"components           {len(g.components())}")
    print("feasible             yes")
    print()
    print(_rings_table(analysis))
    print()
    print(_resilience_table(analysis))
    return EXIT_OK


def _cmd_rings(args: argparse.Namespace) -> int:
    scenario = _read_scenario(args.scenario)
    analysis = _analysis_for(args, scenario)
    if args.svg:
        svg = render_svg(scenario, analysis.ring_set, analysis.schedule)
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(svg)
    if args.format == "json":
        _print_json({"rings": _rings_payload(analysis)})
    else:
        print(_rings_table(analysis))
    return EXIT_OK


def _cmd_resilience(args: argparse.Namespace) -> int:
    scenario = _read_scenario(args.scenario)
    analysis = _analysis_for(args, scenario)
    if args.format == "json":
        _print_json(_resilience_payload(analysis))
    else:
        print(_resilience_table(analysis))
    return EXIT_OK


def _parse_failures(spec: str | None, default_time: float) -> FailurePlan:
    if not spec:
        return FailurePlan()
    failures = []
    for chunk in spec.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "@" in chunk:
            robot_s, time_s = chunk.split("@", 1)
            failures.append(Failure(int(robot_s), float(time_s)))
        else:
            failures.append(Failure(int(chunk), default_time))
    return FailurePlan(tuple(failures))


def _simulate_for(args: argparse.Namespace) -> tuple[Analysis, SimTrace]:
    scenario = _read_scenario(args.scenario)
    analysis = _analysis_for(args, scenario)
    assert analysis.schedule is not None and analysis.ring_set is not None
    plan = _parse_failures(args.fail, args.fail_at)
    horizon: float | str
    if args.horizon == "auto":
        horizon = "auto"
    else:
        horizon = float(args.horizon)
    trace = simulate(
        analysis.graph, analysis.schedule, analysis.ring_set, plan, horizon=horizon
    )
    return analysis, trace


def _cmd_simulate(args: argparse.Namespace) -> int:
    analysis, trace = _simulate_for(args)
    if args.trace:
        write_trace_csv(trace, args.trace)
    cover = coverage_report(trace)
    kinds = {"failure": 0, "arrival": 0, "meeting": 0, "switch": 0}
    for ev in trace.events:
        kinds[ev.kind] += 1
    if args.format == "json":
        _print_json(
            {
                "horizon": trace.horizon,
                "events": kinds,
                "truncated": trace.truncated,
                "starving": {str(r): v for r, v in sorted(trace.starving.items())},
                "covered": {str(t): v for t, v in sorted(trace.covered.items())},
                "coverage_cross_check": cover.agree,
            }
        )
        return EXIT_OK
    print(f"horizon              {trace.horizon:g} periods")
    print(
        "events               "
        + ", ".join(f"{k}={v}" for k, v in sorted(kinds.items()))
    )
    if trace.truncated:
        print("truncated            yes (event cap reached)")
    starving = [r for r, v in sorted(trace.starving.items()) if v]
    print(f"starving robots      {', '.join(map(str, starving)) if starving else 'none'}")
    uncovered = [t for t, v in sorted(trace.covered.items()) if not v]
    print(
        f"uncovered circles    {', '.join(map(str, uncovered)) if uncovered else 'none'}"
    )
    print(f"coverage cross-check {'ok' if cover.agree else 'MISMATCH'}")
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    scenario = _read_scenario(args.scenario)
    analysis = _analysis_for(args, scenario)
    assert analysis.schedule is not None and analysis.ring_set is not None
    report = analysis.report
    assert report is not None
    sn = brute_force_sn(
        analysis.graph,
        analysis.schedule,
        bound=args.bound,
        max_fail=args.max_fail,
        jobs=args.jobs,
    )
    ur = brute_force_ur(
        analysis.schedule, analysis.ring_set, bound=args.bound, max_fail=args.max_fail
    )
    sn_agree = (sn == report.sn) if sn is not None else (
        report.n - report.sn > args.max_fail
    )
    ur_agree = (ur == report.ur) if ur is not None else (report.ur + 1 > args.max_fail)
    if args.format == "json":
        _print_json(
            {
                "engine": {"sn": report.sn, "ur": report.ur},
                "oracle": {"sn": sn, "ur": ur},
                "max_fail": args.max_fail,
                "agree": sn_agree and ur_agree,
            }
        )
    else:
        sn_txt = "not reached within --max-fail" if sn is None else str(sn)
        ur_txt = "not reached within --max-fail" if ur is None else str(ur)
        print(f"engine               SN={report.sn} UR={report.ur}")
        print(f"oracle               SN={sn_txt} UR={ur_txt}")
        print(f"agreement            {'ok' if sn_agree and ur_agree else 'MISMATCH'}")
    return EXIT_OK


def _cmd_render(args: argparse.Namespace) -> int:
    scenario = _read_scenario(args.scenario)
    graph = build_comm_graph(scenario)
    feas = solve_schedule(graph)
    if feas.feasible:
        assert feas.schedule is not None
        analysis = analyze_with_schedule(scenario, feas.schedule, graph=graph)
        svg = render_svg(scenario, analysis.ring_set, analysis.schedule)
    else:
        # Still draw the circles so an infeasible layout can be inspected.
        print(_witness_text(feas), file=sys.stderr)
        svg = render_svg(scenario)
    _emit(svg, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ring-resilience",
        description="Fault tolerance of synchronized multi-robot patrols "
        "on circular trajectories.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a named scenario as JSON")
    p.add_argument(
        "--kind",
        required=True,
        choices=["chain", "cycle", "grid", "star", "random_tree"],
    )
    p.add_argument("--nodes", type=int, help="node count (chain/cycle/star/random_tree)")
    p.add_argument("--rows", type=int, help="grid rows")
    p.add_argument("--cols", type=int, help="grid cols")
    p.add_argument("--spacing", type=float, default=DEFAULT_SPACING)
    p.add_argument("--range", type=float, default=DEFAULT_RANGE)
    p.add_argument("--seed", type=int, default=0, help=f"overridden by ${SEED_ENV}")
    p.add_argument("-o", "--output", help="write to file instead of stdout")
    p.set_defaults(func=_cmd_generate)

    def common(p: argparse.ArgumentParser, schedule: bool = True) -> None:
        p.add_argument("scenario", help="scenario JSON path")
        if schedule:
            p.add_argument("--schedule", help="use this schedule JSON instead of solving")
        p.add_argument(
            "--format", choices=["table", "json"], default="table", help="output style"
        )

    p = sub.add_parser("analyze", help="graph, feasibility, rings, and resilience")
    common(p)
    p.add_argument("--root", type=int, help="trajectory whose start angle is fixed to 0")
    p.add_argument("--force", action="store_true", help="lift the exact-solver size guard")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("schedule", help="solve and print a synchronized schedule")
    p.add_argument("scenario")
    p.add_argument("--root", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("rings", help="ring decomposition of the patrol")
    common(p)
    p.add_argument("--root", type=int)
    p.add_argument("--svg", help="also render the rings to this SVG file")
    p.set_defaults(func=_cmd_rings)

    p = sub.add_parser("resilience", help="UR, SN, and IR metrics")
    common(p)
    p.add_argument("--root", type=int)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_resilience)

    p = sub.add_parser("simulate", help="event simulation with failures")
    common(p)
    p.add_argument("--root", type=int)
    p.add_argument("--fail", help="failures, e.g. 1@0,3@0 (robot@time) or 1,3")
    p.add_argument(
        "--fail-at",
        type=float,
        default=0.0,
        dest="fail_at",
        help="failure time for --fail entries given without @time",
    )
    p.add_argument("--horizon", default="auto", help='"auto" or a period count')
    p.add_argument("--trace", help="write the event trace CSV here")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("oracle", help="brute-force cross-check of SN and UR")
    common(p)
    p.add_argument("--root", type=int)
    p.add_argument("--bound", type=int, default=12, help="refuse above this robot count")
    p.add_argument("--max-fail", type=int, dest="max_fail", help="cap swept failure-set size")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for the sweep")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("render", help="SVG figure of circles, rings, and robots")
    p.add_argument("scenario")
    p.add_argument("-o", "--output", help="write SVG here instead of stdout")
    p.set_defaults(func=_cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Infeasible as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ScenarioError, SlotLimitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
