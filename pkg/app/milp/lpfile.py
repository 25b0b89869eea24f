"""LP-format text dump of a model, for cross-checking with external solvers."""

from pathlib import Path

from jinja2 import Environment, FileSystemLoader

from app.milp.model import MilpModel

_TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"


def _get_jinja_env() -> Environment:
    return Environment(
        loader=FileSystemLoader(str(_TEMPLATE_DIR)),
        autoescape=False,
        keep_trailing_newline=True,
    )


def _num(v: float) -> str:
    return f"{v:.12g}"


def _terms(coeffs: dict[int, float], names: list[str]) -> list[str]:
    out = []
    for col, v in sorted(coeffs.items()):
        sign = "-" if v < 0 else "+"
        out.append(f"{sign} {_num(abs(v))} {names[col]}")
    return out


def render_lp(model: MilpModel, title: str = "ichnaea window model") -> str:
    """Render ``model`` in CPLEX LP format; column names encode their tuple index."""
    names = [v.name for v in model.columns]
    rows = [
        {
            "name": row.name or f"r{i}",
            "terms": _terms(row.coeffs, names) or [f"0 {names[0]}"],
            "sense": row.sense.value,
            "rhs": _num(row.rhs),
        }
        for i, row in enumerate(model.rows)
    ]
    bounds = []
    for i, name in enumerate(names):
        lb, ub = model.lb[i], model.ub[i]
        if lb == ub:
            bounds.append(f"{name} = {_num(lb)}")
        else:
            bounds.append(f"{_num(lb)} <= {name} <= {_num(ub)}")
    binaries = [n for i, n in enumerate(names) if model.integer[i] and model.ub[i] <= 1]
    generals = [n for i, n in enumerate(names) if model.integer[i] and model.ub[i] > 1]
    template = _get_jinja_env().get_template("model.lp.j2")
    return template.render(
        title=title,
        stats=model.stats(),
        objective=_terms(model.objective, names),
        rows=rows,
        bounds=bounds,
        binaries=binaries,
        generals=generals,
    )


def write_lp(model: MilpModel, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_lp(model), encoding="utf-8")
    return path
