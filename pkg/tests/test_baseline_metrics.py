"""Tests for the always-on baseline, the comparison report and its writers."""

import json

import pandas as pd
import pytest

from app.models import CompareReport, GroundTruth, PlanStep
from app.planner.mission import MissionPlanner
from app.planner.state import MissionState
from app.simulator.baseline import run_soa_baseline
from app.simulator.metrics import (
    TRACE_COLUMNS,
    aggregate_reports,
    compare_metrics,
    report_frame,
    savings_pct,
    write_json,
    write_report_csv,
    write_trace_csv,
)
from app.simulator.world import TraceBuilder, generate_ground_truth, step

from tests.conftest import build_scenario


def planned_walk(scenario, cells):
    """Execute ``cells`` for r1 as a variant-A mission trace."""
    truth = GroundTruth(grid=scenario.grid)
    state = MissionState.initial(scenario)
    builder = TraceBuilder(scenario, truth, mode="A")
    builder.start(state)
    for cell in cells:
        state, events, records = step(
            state, {"r1": PlanStep(t=state.t_now + 1, cell=cell, battery=0.0)}, truth, scenario,
            threshold=1e9, ledgers=builder.ledgers,
        )
        builder.add(state, events, records)
    return builder.finish(state), truth


class TestBaseline:
    def test_pays_everything_every_step(self):
        scenario = build_scenario(2, 1, p_local=1.0)
        soa = run_soa_baseline(scenario, GroundTruth(grid=scenario.grid), {"r1": [(1, 1), (2, 1), (1, 1)]})
        assert soa.mode == "soa"
        assert soa.energy["r1"].drain == pytest.approx(2 * 5.5)
        assert all(rec.sensors_on for rec in soa.records)
        assert soa.mission_length == 2

    def test_revisits_are_the_gap(self):
        scenario = build_scenario(2, 1, p_local=1.0)
        cells = [(2, 1), (1, 1), (2, 1)]
        planned, truth = planned_walk(scenario, cells)
        soa = run_soa_baseline(scenario, truth, planned.paths())
        assert planned.energy["r1"].drain == pytest.approx(4.5 + 1.5 + 1.5)
        assert soa.energy["r1"].drain == pytest.approx(3 * 5.5)
        # two revisits skip sensing and TX, every step skips local detection
        gap = soa.energy["r1"].drain - planned.energy["r1"].drain
        assert gap == pytest.approx(2 * (2.0 + 1.0) + 3 * 1.0)

    def test_no_charging(self):
        scenario = build_scenario(2, 1, stations=[(1, 1)], battery=50.0)
        soa = run_soa_baseline(scenario, GroundTruth(grid=scenario.grid), {"r1": [(1, 1), (1, 1)]})
        assert soa.energy["r1"].charged == 0.0
        assert soa.robot_records("r1")[-1].battery == pytest.approx(46.5)

    def test_depletion_freezes(self):
        scenario = build_scenario(3, 1, battery=5.0)
        soa = run_soa_baseline(
            scenario, GroundTruth(grid=scenario.grid), {"r1": [(1, 1), (2, 1), (3, 1)]}
        )
        records = soa.robot_records("r1")
        assert [rec.cell for rec in records] == [(1, 1), (2, 1), (2, 1)]
        assert "battery_depleted" in records[-1].events

    def test_target_found_is_reported(self):
        scenario = build_scenario(3, 1)
        truth = GroundTruth(grid=scenario.grid, target_cell=(3, 1))
        soa = run_soa_baseline(scenario, truth, {"r1": [(1, 1), (2, 1)]})
        assert [e.kind.value for e in soa.events] == ["target_found"]

    @pytest.mark.parametrize(
        "paths,match",
        [
            ({"r2": [(1, 1)]}, "scenario has"),
            ({"r1": [(2, 1), (1, 1)]}, "does not start"),
        ],
    )
    def test_bad_paths(self, paths, match):
        scenario = build_scenario(2, 1)
        with pytest.raises(ValueError, match=match):
            run_soa_baseline(scenario, GroundTruth(grid=scenario.grid), paths)

    def test_uneven_paths(self):
        scenario = build_scenario(robots=[("r1", (1, 1)), ("r2", (3, 3))])
        with pytest.raises(ValueError, match="differ in length"):
            run_soa_baseline(
                scenario, GroundTruth(grid=scenario.grid), {"r1": [(1, 1)], "r2": [(3, 3), (3, 2)]}
            )


class TestCompare:
    def test_savings(self):
        assert savings_pct(80.0, 100.0) == pytest.approx(20.0)
        assert savings_pct(0.0, 0.0) == 0.0

    def test_identical_traces(self):
        planned, _ = planned_walk(build_scenario(), [(1, 2), (2, 2)])
        report = compare_metrics(planned, planned)
        assert report.savings_pct == 0.0
        assert report.robots[0].energy_planned == report.robots[0].energy_soa

    def test_report_fields(self):
        scenario = build_scenario(2, 1, p_local=1.0)
        planned, truth = planned_walk(scenario, [(2, 1), (1, 1), (2, 1)])
        soa = run_soa_baseline(scenario, truth, planned.paths())
        report = compare_metrics(planned, soa, seed=4)
        assert report.total_planned == pytest.approx(7.5)
        assert report.total_soa == pytest.approx(16.5)
        assert report.savings_pct == pytest.approx(9.0 / 16.5 * 100)
        assert report.coverage_planned == report.coverage_soa == 1.0
        assert report.mission_length == 3
        assert report.seed == 4

    def test_mismatched_robots(self):
        one, _ = planned_walk(build_scenario(), [(1, 2)])
        two_scenario = build_scenario(robots=[("r1", (1, 1)), ("r2", (3, 3))])
        two = run_soa_baseline(
            two_scenario, GroundTruth(grid=two_scenario.grid), {"r1": [(1, 1), (1, 2)], "r2": [(3, 3), (3, 3)]}
        )
        with pytest.raises(ValueError, match="robot sets differ"):
            compare_metrics(one, two)

    def test_mismatched_lengths(self):
        short, _ = planned_walk(build_scenario(), [(1, 2)])
        long, _ = planned_walk(build_scenario(), [(1, 2), (1, 3)])
        with pytest.raises(ValueError, match="path lengths differ"):
            compare_metrics(short, long)

    def test_planned_mission_never_costs_more(self, tiny_scenario, highs_settings):
        truth = generate_ground_truth(tiny_scenario)
        planned = MissionPlanner(tiny_scenario, highs_settings).run_mission(truth)
        soa = run_soa_baseline(tiny_scenario, truth, planned.paths())
        report = compare_metrics(planned, soa)
        assert report.total_soa >= report.total_planned
        assert report.robots[0].energy_soa >= report.robots[0].energy_planned

    def test_aggregate(self):
        reports = [
            CompareReport(
                robots=[], total_planned=1, total_soa=1, savings_pct=s,
                coverage_planned=1, coverage_soa=1, mission_length=3, seed=i,
            )
            for i, s in enumerate([10.0, 20.0, 30.0])
        ]
        summary = aggregate_reports(reports)
        assert summary["runs"] == 3
        assert summary["savings_pct_mean"] == pytest.approx(20.0)
        assert (summary["savings_pct_min"], summary["savings_pct_max"]) == (10.0, 30.0)


class TestWriters:
    def test_trace_csv(self, tmp_path):
        trace, _ = planned_walk(build_scenario(), [(1, 2), (1, 2)])
        frame = pd.read_csv(write_trace_csv(trace, tmp_path / "trace.csv"))
        assert list(frame.columns) == TRACE_COLUMNS
        assert len(frame) == 3
        assert frame["sensors_on"].tolist() == [1, 1, 0]
        assert frame["a"].tolist() == [1, 1, 1]
        assert frame["b"].tolist() == [1, 2, 2]

    def test_report_csv_has_total_row(self, tmp_path):
        scenario = build_scenario(2, 1)
        planned, truth = planned_walk(scenario, [(2, 1)])
        report = compare_metrics(planned, run_soa_baseline(scenario, truth, planned.paths()))
        frame = pd.read_csv(write_report_csv(report, tmp_path / "report.csv"))
        assert frame["robot"].tolist() == ["r1", "total"]
        assert list(report_frame(report).columns) == [
            "robot", "energy_planned", "energy_soa", "savings_pct"
        ]

    def test_json_is_sorted(self, tmp_path):
        path = write_json({"b": 1, "a": 2}, tmp_path / "out.json")
        assert path.read_text().index('"a"') < path.read_text().index('"b"')
        assert json.loads(path.read_text()) == {"a": 2, "b": 1}
