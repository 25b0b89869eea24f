"""Energy comparison between a planned mission and its always-on replay, plus output writers."""

import json
import logging
from pathlib import Path

import pandas as pd

from app.models import CompareReport, RobotReport, SimTrace

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["t", "robot", "a", "b", "battery", "sensors_on", "charging", "event"]


def savings_pct(planned: float, baseline: float) -> float:
    if baseline <= 0:
        return 0.0
    return (baseline - planned) / baseline * 100.0


def compare_metrics(planned: SimTrace, soa: SimTrace, seed: int | None = None) -> CompareReport:
    """Per-robot and total energy of both runs, the savings and coverage.

    Energy is the drained total (move + tx + rx + sen + local); charging is
    reported separately in the traces and not netted here.

    Raises:
        ValueError: If the robot sets or path lengths differ.
    """
    if set(planned.energy) != set(soa.energy):
        raise ValueError(
            f"robot sets differ: {sorted(planned.energy)} vs {sorted(soa.energy)}"
        )
    if planned.mission_length != soa.mission_length:
        raise ValueError(
            f"path lengths differ: {planned.mission_length} vs {soa.mission_length}"
        )
    robots = []
    for robot in planned.energy:
        e_planned = planned.energy[robot].drain
        e_soa = soa.energy[robot].drain
        robots.append(
            RobotReport(
                robot=robot,
                energy_planned=e_planned,
                energy_soa=e_soa,
                savings_pct=savings_pct(e_planned, e_soa),
            )
        )
    total_planned = sum(r.energy_planned for r in robots)
    total_soa = sum(r.energy_soa for r in robots)
    report = CompareReport(
        robots=robots,
        total_planned=total_planned,
        total_soa=total_soa,
        savings_pct=savings_pct(total_planned, total_soa),
        coverage_planned=planned.coverage,
        coverage_soa=soa.coverage,
        mission_length=planned.mission_length,
        seed=seed,
    )
    logger.info(
        "Energy %.4g planned vs %.4g always-on: %.2f%% saved",
        total_planned,
        total_soa,
        report.savings_pct,
    )
    return report


def aggregate_reports(reports: list[CompareReport]) -> dict:
    """Mean, min and max savings over a seed sweep."""
    frame = pd.DataFrame([{"seed": r.seed, "savings_pct": r.savings_pct} for r in reports])
    return {
        "runs": len(reports),
        "savings_pct_mean": float(frame["savings_pct"].mean()),
        "savings_pct_min": float(frame["savings_pct"].min()),
        "savings_pct_max": float(frame["savings_pct"].max()),
        "reports": [r.model_dump() for r in reports],
    }


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------


def trace_frame(trace: SimTrace) -> pd.DataFrame:
    rows = [
        {
            "t": rec.t,
            "robot": rec.robot,
            "a": rec.cell[0],
            "b": rec.cell[1],
            "battery": rec.battery,
            "sensors_on": int(rec.sensors_on),
            "charging": int(rec.charging),
            "event": ";".join(rec.events),
        }
        for rec in trace.records
    ]
    return pd.DataFrame.from_records(rows, columns=TRACE_COLUMNS)


def write_trace_csv(trace: SimTrace, path: str | Path) -> Path:
    path = Path(path)
    trace_frame(trace).to_csv(path, index=False, float_format="%.9g")
    return path


def report_frame(report: CompareReport) -> pd.DataFrame:
    rows = [
        {
            "robot": r.robot,
            "energy_planned": r.energy_planned,
            "energy_soa": r.energy_soa,
            "savings_pct": r.savings_pct,
        }
        for r in report.robots
    ]
    rows.append(
        {
            "robot": "total",
            "energy_planned": report.total_planned,
            "energy_soa": report.total_soa,
            "savings_pct": report.savings_pct,
        }
    )
    return pd.DataFrame.from_records(rows)


def write_report_csv(report: CompareReport, path: str | Path) -> Path:
    path = Path(path)
    report_frame(report).to_csv(path, index=False, float_format="%.9g")
    return path


def write_json(payload: dict, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
