"""Scenario file loading, validation and canonical serialization."""

import json
import logging
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from app.models import Scenario

logger = logging.getLogger(__name__)


class ScenarioError(ValueError):
    """Raised when a scenario file cannot be parsed or fails validation."""


def _first_error(exc: ValidationError) -> str:
    err = exc.errors()[0]
    msg = str(err.get("msg", "invalid value")).removeprefix("Value error, ")
    loc = ".".join(str(p) for p in err.get("loc", ()))
    return f"{msg} (at {loc})" if loc else msg


def read_document(path: str | Path) -> dict[str, Any]:
    """Read a scenario file into its raw JSON document.

    Raises:
        FileNotFoundError: If the file does not exist.
        ScenarioError: If the file is not valid JSON.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path}")
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ScenarioError(f"parse error in {path}: {e}") from e
    if not isinstance(document, dict):
        raise ScenarioError(f"parse error in {path}: top level must be an object")
    return document


def scenario_from_document(document: dict[str, Any]) -> Scenario:
    """Validate a raw document into a Scenario.

    Raises:
        ScenarioError: Naming the first violated invariant.
    """
    try:
        return Scenario.model_validate(document)
    except ValidationError as e:
        raise ScenarioError(_first_error(e)) from e


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario file."""
    scenario = scenario_from_document(read_document(path))
    logger.info(
        "Loaded scenario %s: %dx%d grid, %d robots, T=%d, W=%d",
        path,
        scenario.grid.width_a,
        scenario.grid.height_b,
        len(scenario.robots),
        scenario.mission.horizon_t,
        scenario.mission.window_w,
    )
    return scenario


def _cell_rows(mapping: dict | None) -> list[list] | None:
    if mapping is None:
        return None
    return [[a, b, v] for (a, b), v in sorted(mapping.items())]


def to_document(scenario: Scenario) -> dict[str, Any]:
    """Canonical JSON document: sorted cell lists, explicit defaults."""
    grid = scenario.grid
    energy = scenario.energy.model_dump(mode="json", exclude={"p_tx_table"})
    energy["p_tx_table"] = _cell_rows(scenario.energy.p_tx_table)
    return {
        "grid": {
            "width_a": grid.width_a,
            "height_b": grid.height_b,
            "cell_size": list(grid.cell_size),
            "obstacles": [list(c) for c in sorted(grid.obstacles)],
            "terrain": _cell_rows(grid.terrain),
            "connectivity": grid.connectivity,
        },
        "robots": [r.model_dump(mode="json") for r in scenario.robots],
        "stations": [s.model_dump(mode="json") for s in scenario.stations],
        "energy": energy,
        "mission": scenario.mission.model_dump(mode="json"),
    }


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    """Write ``scenario`` in canonical form."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_document(scenario), indent=2) + "\n", encoding="utf-8")
