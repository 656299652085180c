"""Fault tolerance of synchronized multi-robot patrols on circle graphs."""

from .geometry import (
    CommGraph,
    Scenario,
    ScenarioError,
    build_comm_graph,
    generate,
    load_scenario,
    scenario_to_json,
)
from .rings import RingSet, build_smg, extract_rings, reverse_rings
from .scheduling import (
    FeasibilityReport,
    Schedule,
    load_schedule,
    schedule_to_json,
    solve_schedule,
    verify_schedule,
)
from .resilience import (
    Analysis,
    ResilienceReport,
    analyze_scenario,
    analyze_with_schedule,
    closed_form,
    starvation_number,
)
from .simulator import (
    Failure,
    FailurePlan,
    SimTrace,
    brute_force_sn,
    brute_force_ur,
    coverage_report,
    revisit_period,
    simulate,
    write_trace_csv,
)

__all__ = [
    "Analysis",
    "CommGraph",
    "Failure",
    "FailurePlan",
    "FeasibilityReport",
    "ResilienceReport",
    "RingSet",
    "Scenario",
    "ScenarioError",
    "Schedule",
    "SimTrace",
    "analyze_scenario",
    "analyze_with_schedule",
    "brute_force_sn",
    "brute_force_ur",
    "build_comm_graph",
    "build_smg",
    "closed_form",
    "coverage_report",
    "extract_rings",
    "generate",
    "load_scenario",
    "load_schedule",
    "revisit_period",
    "reverse_rings",
    "scenario_to_json",
    "schedule_to_json",
    "simulate",
    "solve_schedule",
    "starvation_number",
    "verify_schedule",
    "write_trace_csv",
]

__version__ = "0.1.0"
