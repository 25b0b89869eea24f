"""Column/row representation of a mixed-integer linear program (maximization)."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from scipy import sparse

from app.models import Cell


class VarKind(str, Enum):
    L = "L"  # robot position
    E = "E"  # cell explored
    U = "U"  # robot charging
    BAT = "Bat"  # battery level
    UPS = "Ups"  # L(t, c) * L(t+1, c')
    ALPHA = "Alpha"  # E(t, c) * L(t+1, c)
    DELTA = "Delta"  # U(t) * L(t, c)


class Sense(str, Enum):
    LE = "<="
    GE = ">="
    EQ = "="


@dataclass(frozen=True, slots=True)
class VarIndex:
    """Tuple index of one column; ``t`` is the absolute mission step."""

    kind: VarKind
    t: int
    robot: str | None = None
    cell: Cell | None = None
    dest: Cell | None = None

    @property
    def name(self) -> str:
        parts = [self.kind.value]
        if self.robot is not None:
            parts.append(self.robot)
        parts.append(f"t{self.t}")
        for c in (self.cell, self.dest):
            if c is not None:
                parts.extend((f"a{c[0]}", f"b{c[1]}"))
        return "_".join(parts)


@dataclass
class Row:
    coeffs: dict[int, float]
    sense: Sense
    rhs: float
    name: str = ""


@dataclass
class MilpModel:
    """Columns with bounds and integrality, sparse rows, a maximized objective."""

    columns: list[VarIndex] = field(default_factory=list)
    lb: list[float] = field(default_factory=list)
    ub: list[float] = field(default_factory=list)
    integer: list[bool] = field(default_factory=list)
    index: dict[VarIndex, int] = field(default_factory=dict)
    rows: list[Row] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    context: Any = None

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    def add_column(self, var: VarIndex, lb: float, ub: float, integer: bool) -> int:
        if var in self.index:
            raise ValueError(f"duplicate column {var.name}")
        col = len(self.columns)
        self.columns.append(var)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.integer.append(integer)
        self.index[var] = col
        return col

    def col(self, var: VarIndex) -> int:
        return self.index[var]

    def has(self, var: VarIndex) -> bool:
        return var in self.index

    def fix(self, col: int, value: float) -> None:
        self.lb[col] = float(value)
        self.ub[col] = float(value)

    def add_row(
        self, coeffs: dict[int, float], sense: Sense, rhs: float, name: str = ""
    ) -> int:
        for col in coeffs:
            if not 0 <= col < len(self.columns):
                raise IndexError(f"row {name} references unknown column {col}")
        self.rows.append(Row({c: float(v) for c, v in coeffs.items() if v != 0}, sense, float(rhs), name))
        return len(self.rows) - 1

    def add_objective(self, col: int, coeff: float) -> None:
        self.objective[col] = self.objective.get(col, 0.0) + float(coeff)

    # ------------------------------------------------------------------
    # Sizes
    # ------------------------------------------------------------------

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_binary(self) -> int:
        return sum(
            1
            for i, flag in enumerate(self.integer)
            if flag and self.lb[i] >= 0 and self.ub[i] <= 1
        )

    def count(self, kind: VarKind) -> int:
        return sum(1 for v in self.columns if v.kind is kind)

    def stats(self) -> dict[str, int]:
        return {
            "columns": self.n_cols,
            "rows": self.n_rows,
            "binaries": self.n_binary,
            "nonzeros": sum(len(r.coeffs) for r in self.rows),
        }

    # ------------------------------------------------------------------
    # Array views
    # ------------------------------------------------------------------

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.n_cols)
        for col, v in self.objective.items():
            c[col] = v
        return c

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.lb, dtype=float), np.array(self.ub, dtype=float)

    def integrality(self) -> np.ndarray:
        return np.array(self.integer, dtype=bool)

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.full(self.n_rows, -np.inf)
        hi = np.full(self.n_rows, np.inf)
        for i, row in enumerate(self.rows):
            if row.sense is not Sense.GE:
                hi[i] = row.rhs
            if row.sense is not Sense.LE:
                lo[i] = row.rhs
        return lo, hi

    def matrix(self) -> sparse.csr_matrix:
        data, rows, cols = [], [], []
        for i, row in enumerate(self.rows):
            for col, v in row.coeffs.items():
                rows.append(i)
                cols.append(col)
                data.append(v)
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n_rows, self.n_cols))

    # ------------------------------------------------------------------
    # Checks
    # ------------------------------------------------------------------

    def objective_value(self, values: np.ndarray) -> float:
        return float(self.objective_vector() @ values)

    def violations(self, values: np.ndarray, tol: float) -> list[str]:
        """Names of rows and bounds that ``values`` violates by more than ``tol``."""
        out = []
        lb, ub = self.bounds()
        for col in np.flatnonzero((values < lb - tol) | (values > ub + tol)):
            out.append(f"bound {self.columns[col].name}")
        if self.n_rows:
            activity = self.matrix() @ values
            lo, hi = self.row_bounds()
            for i in np.flatnonzero((activity < lo - tol) | (activity > hi + tol)):
                out.append(self.rows[i].name or f"row{i}")
        return out

    def value(self, values: np.ndarray, var: VarIndex, default: float = 0.0) -> float:
        col = self.index.get(var)
        return default if col is None else float(values[col])
