"""Subcommand implementations. Each takes a RunConfig and returns an exit code."""

import copy
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any

import pandas as pd

from app.config import Settings, apply_overrides, get_settings
from app.energy.profiles import (
    DEFAULT_ANCHORS,
    fit_device_profiles,
    load_anchors,
    profile_set_from_fit,
    remaining_time_table,
    save_profiles,
)
from app.milp.builder import build_model
from app.milp.lpfile import write_lp
from app.milp.model import MilpModel
from app.models import CompareReport, GroundTruth, RunConfig, Scenario, SimTrace
from app.planner.mission import MissionPlanner
from app.scenario.loader import read_document, scenario_from_document
from app.simulator.baseline import run_soa_baseline
from app.simulator.metrics import (
    aggregate_reports,
    compare_metrics,
    write_json,
    write_report_csv,
    write_trace_csv,
)
from app.simulator.world import generate_ground_truth, load_ground_truth
from app.solver.base import SolveStatus
from app.solver.factory import SolverFactory
from app.solver.plan import extract_plan

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TIME_LIMIT = 2


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------


def load_run(config: RunConfig) -> tuple[Scenario, Settings, dict[str, Any]]:
    """Scenario document -> overrides -> validated scenario and settings."""
    if config.scenario_path is None:
        raise ValueError(f"{config.subcommand} needs a scenario file")
    document = read_document(config.scenario_path)
    settings = apply_overrides(get_settings(), document, config.overrides)
    return scenario_from_document(document), settings, document


def output_dir(config: RunConfig) -> Path:
    path = Path(config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def ground_truth_for(
    scenario: Scenario, settings: Settings, truth_path: str | None, seed: int | None = None
) -> GroundTruth:
    if truth_path:
        return load_ground_truth(truth_path, scenario)
    return generate_ground_truth(
        scenario,
        hidden_obstacles=settings.simulator_hidden_obstacles,
        seed=seed,
        sensing_range=settings.simulator_sensing_range,
    )


def window_model(scenario: Scenario, settings: Settings) -> MilpModel:
    window = min(
        settings.planner_window_w or scenario.mission.window_w, scenario.mission.horizon_t
    )
    return build_model(
        scenario,
        window,
        variant=settings.planner_variant,
        relax_exploration=settings.solver_relax_exploration,
        relax_linearization=settings.solver_relax_linearization,
    )


def emit(config: RunConfig, payload: dict, summary: str) -> None:
    """JSON on stdout under ``--json``, a one-line summary otherwise."""
    if config.json_output:
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        print(summary)


def mission_summary(trace: SimTrace) -> dict[str, Any]:
    return {
        "mode": trace.mode,
        "mission_length": trace.mission_length,
        "explored": trace.explored,
        "explorable": trace.explorable,
        "coverage": trace.coverage,
        "solver_invocations": trace.solver_invocations,
        "solve_times": trace.solve_times,
        "energy": {r: {**e.model_dump(), "drain": e.drain} for r, e in trace.energy.items()},
        "events": [e.model_dump(mode="json") for e in trace.events],
    }


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def cmd_solve(config: RunConfig) -> int:
    """Solve one window from the initial state; write plan.json and stats.json."""
    scenario, settings, _ = load_run(config)
    out = output_dir(config)

    model = window_model(scenario, settings)
    solution = SolverFactory(settings).for_model(model).solve(model)

    stats = {
        "status": solution.status.value,
        "objective": solution.objective,
        **solution.stats.to_dict(),
        **model.stats(),
    }
    write_json(stats, out / "stats.json")
    if solution.values is not None:
        plan = extract_plan(solution, model)
        write_json(plan.model_dump(mode="json"), out / "plan.json")

    emit(config, stats, f"{solution.status.value} objective={solution.objective}")
    if solution.status is SolveStatus.OPTIMAL:
        return EXIT_OK
    if solution.status is SolveStatus.TIME_LIMIT:
        return EXIT_TIME_LIMIT
    print(f"error: solver returned {solution.status.value}", file=sys.stderr)
    return EXIT_ERROR


# ---------------------------------------------------------------------------
# mission
# ---------------------------------------------------------------------------


def cmd_mission(config: RunConfig) -> int:
    """Run a full receding-horizon mission; write trace.csv and report.json."""
    scenario, settings, _ = load_run(config)
    out = output_dir(config)
    truth = ground_truth_for(scenario, settings, config.truth_path)

    trace = MissionPlanner(scenario, settings).run_mission(truth)

    write_trace_csv(trace, out / "trace.csv")
    summary = mission_summary(trace)
    write_json(summary, out / "report.json")
    emit(
        config,
        summary,
        f"coverage {trace.explored}/{trace.explorable} in {trace.mission_length} steps, "
        f"{trace.solver_invocations} solves",
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def compare_once(
    document: dict[str, Any],
    settings_data: dict[str, Any],
    truth_path: str | None,
    seed: int,
) -> tuple[CompareReport, SimTrace, SimTrace]:
    """One planned mission and its always-on replay. Picklable for worker processes."""
    document = copy.deepcopy(document)
    document.setdefault("mission", {})["seed"] = seed
    scenario = scenario_from_document(document)
    settings = Settings(**settings_data)
    truth = ground_truth_for(scenario, settings, truth_path, seed)

    planned = MissionPlanner(scenario, settings).run_mission(truth)
    soa = run_soa_baseline(scenario, truth, planned.paths())
    return compare_metrics(planned, soa, seed=seed), planned, soa


def cmd_compare(config: RunConfig) -> int:
    """Planned mission vs always-on replay of its path, optionally over a seed sweep."""
    scenario, settings, document = load_run(config)
    out = output_dir(config)
    base_seed = scenario.mission.seed
    seeds = [base_seed + i for i in range(config.seeds)]
    args = [(document, settings.model_dump(), config.truth_path, s) for s in seeds]

    if config.jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(compare_once, *zip(*args)))
    else:
        results = [compare_once(*a) for a in args]

    reports = [r for r, _, _ in results]
    if len(reports) == 1:
        report, planned, _ = results[0]
        write_trace_csv(planned, out / "trace.csv")
        write_report_csv(report, out / "report.csv")
        payload = report.model_dump()
        write_json(payload, out / "report.json")
        emit(config, payload, f"savings {report.savings_pct:.2f}%")
        return EXIT_OK

    seed_dir = out / "reports"
    seed_dir.mkdir(exist_ok=True)
    for report in reports:
        write_json(report.model_dump(), seed_dir / f"seed_{report.seed}.json")
        write_report_csv(report, seed_dir / f"seed_{report.seed}.csv")
    payload = aggregate_reports(reports)
    write_json(payload, out / "report.json")
    emit(
        config,
        payload,
        f"savings {payload['savings_pct_mean']:.2f}% mean over {payload['runs']} seeds "
        f"[{payload['savings_pct_min']:.2f}, {payload['savings_pct_max']:.2f}]",
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# profile
# ---------------------------------------------------------------------------


def cmd_profile(config: RunConfig) -> int:
    """Fit device profiles and write the remaining-movement-time table."""
    out = output_dir(config)
    anchors = load_anchors(config.anchors_path) if config.anchors_path else DEFAULT_ANCHORS
    profiles = profile_set_from_fit(fit_device_profiles(anchors))
    table = remaining_time_table(profiles)

    frame = pd.DataFrame.from_records(table)
    frame.to_csv(out / "profile.csv", index=False)
    save_profiles(profiles, out / "profiles.json")
    emit(config, {"table": table, "residual": profiles.residual}, frame.to_string(index=False))
    return EXIT_OK


# ---------------------------------------------------------------------------
# dump-model
# ---------------------------------------------------------------------------


def cmd_dump_model(config: RunConfig) -> int:
    """Write the first window's model as model.lp."""
    scenario, settings, _ = load_run(config)
    out = output_dir(config)
    model = window_model(scenario, settings)
    path = write_lp(model, out / "model.lp")
    stats = model.stats()
    emit(config, stats, f"wrote {path}: {stats['columns']} columns, {stats['rows']} rows")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "mission": cmd_mission,
    "compare": cmd_compare,
    "profile": cmd_profile,
    "dump-model": cmd_dump_model,
}
