"""Output-oriented DEA efficiency scores via an embedded simplex solver.

Each decision-making unit gets one small linear program: maximize the
proportional output expansion phi that a convex-with-slack combination of
peers (sum of weights <= 1, the non-increasing-returns restriction) could
achieve with no more of any input. Efficiency is reported as 1/phi so it
lands in (0, 1].

The solver is a dense two-phase tableau simplex with Bland's anti-cycling
rule: deterministic, exact enough at this scale (tens of units), and with
an explicit iteration-cap failure status instead of a silent wrong answer.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, NumericalError
from .ingest import CityDirectory, CovariatePanel

LEQ = "<="
GEQ = ">="
EQ = "="

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_ITERATION_LIMIT = "iteration_limit"

_EPS = 1e-9


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective . x  subject to  constraints x (sense) rhs, x >= 0."""

    objective: np.ndarray  # (n,)
    constraints: np.ndarray  # (m, n)
    senses: tuple[str, ...]  # per row: "<=", ">=" or "="
    rhs: np.ndarray  # (m,)

    def __post_init__(self) -> None:
        c = np.asarray(self.objective, dtype=float)
        a = np.atleast_2d(np.asarray(self.constraints, dtype=float))
        b = np.asarray(self.rhs, dtype=float)
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraints", a)
        object.__setattr__(self, "rhs", b)
        m, n = a.shape
        if c.shape != (n,) or b.shape != (m,) or len(self.senses) != m:
            raise DataError("inconsistent LP dimensions")
        bad = [s for s in self.senses if s not in (LEQ, GEQ, EQ)]
        if bad:
            raise DataError(f"bad constraint senses {bad}")


@dataclass(frozen=True)
class LpSolution:
    status: str
    value: float | None
    x: np.ndarray | None


def _pivot(tableau: np.ndarray, basis: list[int], row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    for i in range(tableau.shape[0]):
        if i != row and tableau[i, col] != 0.0:
            tableau[i] -= tableau[i, col] * tableau[row]
    basis[row] = col


def _run_simplex(tableau: np.ndarray, basis: list[int], max_iter: int) -> str:
    """Minimize the bottom row's objective with Bland's rule; in-place."""
    m = tableau.shape[0] - 1
    n_cols = tableau.shape[1] - 1
    for _ in range(max_iter):
        obj = tableau[m]
        enter = -1
        for j in range(n_cols):
            if obj[j] < -_EPS:
                enter = j
                break
        if enter < 0:
            return STATUS_OPTIMAL
        leave = -1
        best = np.inf
        for i in range(m):
            coef = tableau[i, enter]
            if coef > _EPS:
                ratio = tableau[i, -1] / coef
                if ratio < best - 1e-12:
                    best = ratio
                    leave = i
                elif leave >= 0 and abs(ratio - best) <= 1e-12 and basis[i] < basis[leave]:
                    leave = i
        if leave < 0:
            return STATUS_UNBOUNDED
        _pivot(tableau, basis, leave, enter)
    return STATUS_ITERATION_LIMIT


def solve_lp(lp: LinearProgram, tol: float = 1e-8, max_iter: int = 10000) -> LpSolution:
    """Two-phase primal simplex on the standard-form problem.

    Returns status "optimal" (with value and x), "infeasible", "unbounded",
    or "iteration_limit" when the cap is hit. An optimal solution is
    re-checked against the original constraints; residuals above `tol`
    raise NumericalError rather than returning a quietly wrong answer.
    """
    a = lp.constraints.copy()
    b = lp.rhs.copy()
    senses = list(lp.senses)
    m, n = a.shape
    for i in range(m):
        if b[i] < 0:
            a[i] *= -1.0
            b[i] *= -1.0
            senses[i] = {LEQ: GEQ, GEQ: LEQ, EQ: EQ}[senses[i]]

    slack_rows = [i for i, s in enumerate(senses) if s == LEQ]
    surplus_rows = [i for i, s in enumerate(senses) if s == GEQ]
    art_rows = [i for i, s in enumerate(senses) if s in (GEQ, EQ)]
    n_slack = len(slack_rows) + len(surplus_rows)
    n_art = len(art_rows)
    art_start = n + n_slack

    tableau = np.zeros((m + 1, art_start + n_art + 1))
    tableau[:m, :n] = a
    tableau[:m, -1] = b
    col = n
    slack_col: dict[int, int] = {}
    for i in slack_rows:
        tableau[i, col] = 1.0
        slack_col[i] = col
        col += 1
    for i in surplus_rows:
        tableau[i, col] = -1.0
        col += 1
    art_col: dict[int, int] = {}
    for i in art_rows:
        tableau[i, col] = 1.0
        art_col[i] = col
        col += 1

    basis = [slack_col[i] if senses[i] == LEQ else art_col[i] for i in range(m)]

    # Phase 1: minimize the sum of artificials.
    tableau[m, art_start:-1] = 1.0
    for i in art_rows:
        tableau[m] -= tableau[i]
    status = _run_simplex(tableau, basis, max_iter)
    if status == STATUS_ITERATION_LIMIT:
        return LpSolution(STATUS_ITERATION_LIMIT, None, None)
    if status == STATUS_UNBOUNDED:
        raise NumericalError("phase-1 subproblem reported unbounded")
    if -tableau[m, -1] > max(tol, 1e-9):
        return LpSolution(STATUS_INFEASIBLE, None, None)

    # Drive leftover artificials out of the basis; drop redundant rows.
    drop_rows: list[int] = []
    for i in range(m):
        if basis[i] >= art_start:
            pivot_col = next(
                (j for j in range(art_start) if abs(tableau[i, j]) > _EPS), None
            )
            if pivot_col is None:
                drop_rows.append(i)
            else:
                _pivot(tableau, basis, i, pivot_col)
    if drop_rows:
        keep = [i for i in range(m) if i not in drop_rows]
        tableau = tableau[keep + [m]]
        basis = [basis[i] for i in keep]
        m = len(keep)

    # Phase 2: minimize -objective with artificial columns removed.
    tableau = np.delete(tableau, np.s_[art_start:-1], axis=1)
    tableau[m] = 0.0
    tableau[m, :n] = -lp.objective
    for i in range(m):
        coef = tableau[m, basis[i]]
        if coef != 0.0:
            tableau[m] -= coef * tableau[i]
    status = _run_simplex(tableau, basis, max_iter)
    if status != STATUS_OPTIMAL:
        return LpSolution(status, None, None)

    x_full = np.zeros(art_start)
    for i in range(m):
        x_full[basis[i]] = tableau[i, -1]
    x = np.maximum(x_full[:n], 0.0)

    residual = lp.constraints @ x - lp.rhs
    scale = np.maximum(1.0, np.abs(lp.constraints) @ x + np.abs(lp.rhs))
    for i, sense in enumerate(lp.senses):
        allowed = tol * scale[i]
        if sense == LEQ and residual[i] > allowed:
            raise NumericalError(f"constraint {i} violated by {residual[i]:.3g}")
        if sense == GEQ and residual[i] < -allowed:
            raise NumericalError(f"constraint {i} violated by {-residual[i]:.3g}")
        if sense == EQ and abs(residual[i]) > allowed:
            raise NumericalError(f"constraint {i} violated by {abs(residual[i]):.3g}")
    return LpSolution(STATUS_OPTIMAL, float(lp.objective @ x), x)


@dataclass(frozen=True)
class DeaInstance:
    """Units with strictly positive inputs and non-negative outputs."""

    units: tuple[str, ...]
    inputs: np.ndarray  # (n_units, n_inputs)
    outputs: np.ndarray  # (n_units, n_outputs)

    def __post_init__(self) -> None:
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        outputs = np.atleast_2d(np.asarray(self.outputs, dtype=float))
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)
        n = len(self.units)
        if n == 0:
            raise DataError("DEA instance needs at least one unit")
        if inputs.shape[0] != n or outputs.shape[0] != n:
            raise DataError("inputs/outputs row count must match unit count")
        if not (inputs > 0).all():
            raise DataError("all DEA inputs must be strictly positive")
        if (outputs < 0).any():
            raise DataError("DEA outputs must be non-negative")
        if not (outputs > 0).any(axis=1).all():
            raise DataError("every unit needs at least one positive output")

    @property
    def n_units(self) -> int:
        return len(self.units)


@dataclass(frozen=True, slots=True)
class DeaScore:
    unit: str
    phi: float | None  # optimal output expansion, >= 1 when solved
    efficiency: float | None  # 1/phi, in (0, 1]
    status: str


@dataclass
class DeaScores:
    scores: dict[str, DeaScore]

    def efficiency(self, unit: str) -> float | None:
        return self.scores[unit].efficiency


def _expansion_lp(inst: DeaInstance, o: int, returns: str) -> LinearProgram:
    """LP for unit o, variables (phi, lambda_1..lambda_n).

    Columns are divided by their maxima before entering the tableau; by
    unit invariance this changes nothing mathematically but keeps the
    pivots well-conditioned when inputs are raw cents.
    """
    n = inst.n_units
    rows: list[np.ndarray] = []
    senses: list[str] = []
    rhs: list[float] = []
    for k in range(inst.inputs.shape[1]):
        scale = inst.inputs[:, k].max()
        rows.append(np.concatenate(([0.0], inst.inputs[:, k] / scale)))
        senses.append(LEQ)
        rhs.append(float(inst.inputs[o, k] / scale))
    for r in range(inst.outputs.shape[1]):
        scale = inst.outputs[:, r].max() or 1.0
        rows.append(
            np.concatenate(([-inst.outputs[o, r] / scale], inst.outputs[:, r] / scale))
        )
        senses.append(GEQ)
        rhs.append(0.0)
    if returns == "nirs":
        rows.append(np.concatenate(([0.0], np.ones(n))))
        senses.append(LEQ)
        rhs.append(1.0)
    elif returns == "vrs":
        rows.append(np.concatenate(([0.0], np.ones(n))))
        senses.append(EQ)
        rhs.append(1.0)
    elif returns != "crs":
        raise DataError(f"returns must be nirs, vrs or crs, got {returns!r}")
    objective = np.zeros(n + 1)
    objective[0] = 1.0
    return LinearProgram(objective, np.vstack(rows), tuple(senses), np.array(rhs))


def dea_output_nirs(
    inst: DeaInstance, returns: str = "nirs", tol: float = 1e-8
) -> DeaScores:
    """Output-oriented efficiency for every unit; failed solves are marked.

    Each unit's phi maximizes proportional output expansion within the
    technology spanned by all units (weights sum <= 1 under nirs).
    A solver failure marks that unit and the run continues.
    """
    scores: dict[str, DeaScore] = {}
    for o, unit in enumerate(inst.units):
        solution = solve_lp(_expansion_lp(inst, o, returns), tol=tol)
        if solution.status != STATUS_OPTIMAL:
            scores[unit] = DeaScore(unit, None, None, solution.status)
            continue
        phi = max(solution.value, 1.0)  # own plan (lambda=e_o) guarantees phi >= 1
        scores[unit] = DeaScore(unit, phi, 1.0 / phi, STATUS_OPTIMAL)
    return DeaScores(scores)


def load_dea_units(path: str | Path) -> DeaInstance:
    """Read dea_units.csv: unit_id,backlog,expenditures_cents,completed_cases."""
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    units: list[str] = []
    inputs: list[list[float]] = []
    outputs: list[list[float]] = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["unit_id", "backlog", "expenditures_cents", "completed_cases"]
        if header != expected:
            raise DataError(f"{path}: bad header {header!r}, expected {expected!r}")
        seen: set[str] = set()
        for row in reader:
            line = reader.line_num
            if len(row) != 4:
                raise DataError(f"{path}:{line}: wrong column count")
            unit, backlog, spend, completed = row
            if unit in seen:
                raise DataError(f"{path}:{line}: duplicate unit {unit!r}")
            seen.add(unit)
            try:
                values = [float(backlog), float(spend), float(completed)]
            except ValueError as exc:
                raise DataError(f"{path}:{line}: non-numeric field") from exc
            units.append(unit)
            inputs.append(values[:2])
            outputs.append(values[2:])
    return DeaInstance(tuple(units), np.array(inputs), np.array(outputs))


def write_dea_scores(scores: DeaScores, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["unit_id", "phi", "efficiency", "status"])
        for unit in sorted(scores.scores):
            s = scores.scores[unit]
            phi = "" if s.phi is None else format(s.phi, ".12g")
            eff = "" if s.efficiency is None else format(s.efficiency, ".12g")
            writer.writerow([unit, phi, eff, s.status])
    return path


def instance_from_covariates(
    panel: CovariatePanel, cities: CityDirectory, year: int
) -> tuple[DeaInstance | None, list[str]]:
    """State-level DEA instance for one year by aggregating city court data.

    States whose aggregates violate the instance invariants (no data,
    non-positive inputs, zero completed cases) are skipped and reported.
    """
    backlog: dict[str, int] = {}
    spend: dict[str, int] = {}
    completed: dict[str, int] = {}
    for (city, y), row in panel.rows.items():
        if y != year or city not in cities:
            continue
        state = cities.state_of(city)
        if row.backlog is not None:
            backlog[state] = backlog.get(state, 0) + row.backlog
        if row.expenditures_cents is not None:
            spend[state] = spend.get(state, 0) + row.expenditures_cents
        if row.completed_cases is not None:
            completed[state] = completed.get(state, 0) + row.completed_cases

    all_states = sorted(set(backlog) | set(spend) | set(completed))
    units: list[str] = []
    inputs: list[list[float]] = []
    outputs: list[list[float]] = []
    skipped: list[str] = []
    for state in all_states:
        b = backlog.get(state, 0)
        e = spend.get(state, 0)
        c = completed.get(state, 0)
        if b <= 0 or e <= 0 or c <= 0:
            skipped.append(state)
            continue
        units.append(state)
        inputs.append([float(b), float(e)])
        outputs.append([float(c)])
    if not units:
        return None, skipped
    return DeaInstance(tuple(units), np.array(inputs), np.array(outputs)), skipped
