"""Solver-agnostic MILP layer: model IR, LP-file I/O, solve adapters.

Model builders construct a :class:`MilpModel` and never touch a concrete
solver. Solving goes through one of two backends:

* the built-in HiGHS backend (``scipy.optimize.milp``), used by default;
* an external command consuming an LP file, configured via the
  ``ROBUSTEAM_SOLVER_CMD`` environment variable or an explicit
  ``solver_cmd`` argument. The command is invoked as
  ``<cmd...> <lp-path> <time-limit-seconds>`` and must print a JSON object
  ``{"status", "objective", "values", "bound", "runtime_seconds"}`` on
  stdout, with status one of optimal|feasible|infeasible|timeout.

Every returned assignment is re-verified against the model's constraints
before it is accepted, so adapter bugs surface as hard errors instead of
silently wrong studies.
"""

from __future__ import annotations

import json
import math
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

BINARY = "binary"
CONTINUOUS = "continuous"

FEASIBILITY_TOL = 1e-6
INTEGRALITY_TOL = 1e-5

SOLVER_CMD_ENV = "ROBUSTEAM_SOLVER_CMD"


class ModelError(ValueError):
    """Malformed model: duplicate names, unknown variables, bad senses."""


class SolverError(RuntimeError):
    """Base class for solve-adapter failures (not problem infeasibility)."""


class SolverNotFoundError(SolverError):
    """No solver backend available or the configured command is missing."""


class SolverCrashError(SolverError):
    """The backend ran but crashed or returned an unusable answer."""


class SolutionVerificationError(SolverError):
    """A returned assignment violates a model constraint beyond tolerance."""


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # BINARY | CONTINUOUS
    lower: float
    upper: float


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[float, str], ...]  # (coefficient, variable name)
    sense: str  # "<=", "=", ">="
    rhs: float


@dataclass
class MilpModel:
    """Linear model with named variables; declaration order is preserved."""

    name: str = "model"
    sense: str = "maximize"
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: tuple[tuple[float, str], ...] = ()

    def __post_init__(self) -> None:
        self._index: dict[str, int] = {v.name: i for i, v in enumerate(self.variables)}

    def add_var(self, name: str, kind: str = CONTINUOUS, lower: float = 0.0, upper: float = math.inf) -> str:
        if name in self._index:
            raise ModelError(f"duplicate variable name: {name}")
        if kind == BINARY:
            lower, upper = 0.0, 1.0
        elif kind != CONTINUOUS:
            raise ModelError(f"unknown variable kind: {kind}")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, kind, lower, upper))
        return name

    def add_constraint(self, name: str, terms, sense: str, rhs: float) -> None:
        if sense not in ("<=", "=", ">="):
            raise ModelError(f"unknown constraint sense: {sense}")
        terms = tuple((float(c), v) for c, v in terms)
        for _, v in terms:
            if v not in self._index:
                raise ModelError(f"constraint {name} references undeclared variable {v}")
        self.constraints.append(Constraint(name, terms, sense, float(rhs)))

    def set_objective(self, terms, sense: str = "maximize") -> None:
        if sense not in ("maximize", "minimize"):
            raise ModelError(f"unknown objective sense: {sense}")
        terms = tuple((float(c), v) for c, v in terms)
        for _, v in terms:
            if v not in self._index:
                raise ModelError(f"objective references undeclared variable {v}")
        self.sense = sense
        self.objective = terms

    def var_index(self, name: str) -> int:
        return self._index[name]

    def __contains__(self, name: str) -> bool:
        return name in self._index


@dataclass
class SolveResult:
    """Outcome of a solve call.

    ``gap`` is (bound - incumbent) / |incumbent| under maximization (and the
    mirror under minimization), clamped at zero; ``values`` maps every
    declared variable to its value whenever an incumbent exists.
    """

    status: str  # optimal | feasible | infeasible | timeout
    values: dict[str, float]
    objective_value: float
    bound: float
    gap: float
    runtime_seconds: float

    @property
    def has_solution(self) -> bool:
        return self.status in ("optimal", "feasible")


def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _fmt_terms(terms) -> str:
    if not terms:
        return ""
    parts: list[str] = []
    for i, (coef, var) in enumerate(terms):
        sign = "-" if coef < 0 else ("+" if i else "")
        mag = abs(coef)
        coef_str = "" if mag == 1 else _fmt(mag) + " "
        parts.append(f"{sign} {coef_str}{var}".strip())
    return " ".join(parts)


def emit_lp_file(model: MilpModel, path: str | Path) -> None:
    """Write the model in CPLEX LP text format, byte-stable for equal models."""
    lines = [f"\\ {model.name}", "Maximize" if model.sense == "maximize" else "Minimize"]
    lines.append(f" obj: {_fmt_terms(model.objective)}".rstrip())
    lines.append("Subject To")
    for con in model.constraints:
        lines.append(f" {con.name}: {_fmt_terms(con.terms)} {con.sense} {_fmt(con.rhs)}")
    lines.append("Bounds")
    for v in model.variables:
        if v.kind == BINARY:
            continue
        lo = "-inf" if v.lower == -math.inf else _fmt(v.lower)
        if v.upper == math.inf:
            if v.lower == -math.inf:
                lines.append(f" {v.name} free")
            elif v.lower != 0:
                lines.append(f" {v.name} >= {lo}")
            else:
                lines.append(f" 0 <= {v.name}")
        else:
            lines.append(f" {lo} <= {v.name} <= {_fmt(v.upper)}")
    binaries = [v.name for v in model.variables if v.kind == BINARY]
    if binaries:
        lines.append("Binaries")
        for i in range(0, len(binaries), 8):
            lines.append(" " + " ".join(binaries[i : i + 8]))
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_lp_file(path: str | Path) -> MilpModel:
    """Parse the LP subset written by :func:`emit_lp_file` back into a model.

    Handles objective/constraint expressions, bounds lines, and a Binaries
    section; enough to round-trip any model this package emits.
    """
    text = Path(path).read_text(encoding="utf-8")
    section = None
    model_name = "parsed"
    obj_terms: list[tuple[float, str]] = []
    sense = "maximize"
    raw_cons: list[tuple[str, list[tuple[float, str]], str, float]] = []
    bounds: dict[str, tuple[float, float]] = {}
    binaries: list[str] = []

    def parse_expr(expr: str) -> list[tuple[float, str]]:
        tokens = expr.replace("+", " + ").replace("-", " - ").split()
        terms: list[tuple[float, str]] = []
        sign, coef = 1.0, None
        for tok in tokens:
            if tok == "+":
                sign, coef = 1.0, None
            elif tok == "-":
                sign, coef = -1.0, None
            else:
                try:
                    coef = float(tok)
                except ValueError:
                    terms.append((sign * (1.0 if coef is None else coef), tok))
                    sign, coef = 1.0, None
        return terms

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            if line.startswith("\\"):
                model_name = line[1:].strip() or model_name
            continue
        lowered = line.lower()
        if lowered in ("maximize", "minimize"):
            sense = lowered
            section = "objective"
            continue
        if lowered in ("subject to", "st", "s.t."):
            section = "constraints"
            continue
        if lowered == "bounds":
            section = "bounds"
            continue
        if lowered in ("binaries", "binary", "bin"):
            section = "binaries"
            continue
        if lowered == "end":
            break
        if section == "objective":
            expr = line.split(":", 1)[1] if ":" in line else line
            obj_terms.extend(parse_expr(expr))
        elif section == "constraints":
            name, expr = line.split(":", 1) if ":" in line else ("c%d" % len(raw_cons), line)
            for op in ("<=", ">=", "="):
                if op in expr:
                    lhs, rhs = expr.split(op, 1)
                    raw_cons.append((name.strip(), parse_expr(lhs), op, float(rhs)))
                    break
        elif section == "bounds":
            if line.endswith(" free"):
                bounds[line[:-5].strip()] = (-math.inf, math.inf)
            elif "<=" in line:
                parts = [p.strip() for p in line.split("<=")]
                if len(parts) == 3:
                    bounds[parts[1]] = (float(parts[0]), float(parts[2]))
                elif len(parts) == 2:
                    try:
                        lo = float(parts[0])
                        bounds[parts[1]] = (lo, math.inf)
                    except ValueError:
                        bounds[parts[0]] = (0.0, float(parts[1]))
            elif ">=" in line:
                var, lo = line.split(">=")
                bounds[var.strip()] = (float(lo), math.inf)
        elif section == "binaries":
            binaries.extend(line.split())

    model = MilpModel(name=model_name, sense=sense)
    # register section order first so re-emitting is byte-stable, then any
    # variable that only shows up in an expression
    seen: dict[str, None] = {}
    for v in bounds:
        seen.setdefault(v)
    for v in binaries:
        seen.setdefault(v)
    for _, v in obj_terms:
        seen.setdefault(v)
    for _, terms, _, _ in raw_cons:
        for _, v in terms:
            seen.setdefault(v)
    binary_set = set(binaries)
    for v in seen:
        if v in binary_set:
            model.add_var(v, BINARY)
        else:
            lo, hi = bounds.get(v, (0.0, math.inf))
            model.add_var(v, CONTINUOUS, lo, hi)
    for name, terms, op, rhs in raw_cons:
        model.add_constraint(name, terms, op, rhs)
    model.set_objective(obj_terms, sense)
    return model


def check_assignment(model: MilpModel, values: dict[str, float], tol: float = FEASIBILITY_TOL) -> None:
    """Raise :class:`SolutionVerificationError` if any row exceeds tolerance."""
    missing = [v.name for v in model.variables if v.name not in values]
    if missing:
        raise SolutionVerificationError(f"assignment is missing variables, e.g. {missing[0]}")
    for v in model.variables:
        x = values[v.name]
        if x < v.lower - tol or x > v.upper + tol:
            raise SolutionVerificationError(f"{v.name} = {x} outside bounds [{v.lower}, {v.upper}]")
        if v.kind == BINARY and abs(x - round(x)) > INTEGRALITY_TOL:
            raise SolutionVerificationError(f"binary {v.name} = {x} is not integral")
    for con in model.constraints:
        activity = sum(c * values[v] for c, v in con.terms)
        violated = (
            (con.sense == "<=" and activity > con.rhs + tol)
            or (con.sense == ">=" and activity < con.rhs - tol)
            or (con.sense == "=" and abs(activity - con.rhs) > tol)
        )
        if violated:
            raise SolutionVerificationError(
                f"constraint {con.name} violated: activity {activity} {con.sense} {con.rhs}"
            )


def objective_value(model: MilpModel, values: dict[str, float]) -> float:
    return sum(c * values[v] for c, v in model.objective)


def _solve_builtin(model: MilpModel, time_limit: float) -> SolveResult:
    from scipy import sparse
    from scipy.optimize import Bounds, LinearConstraint, milp

    n = len(model.variables)
    sign = -1.0 if model.sense == "maximize" else 1.0
    c = np.zeros(n)
    for coef, var in model.objective:
        c[model.var_index(var)] += sign * coef

    lb = np.array([v.lower for v in model.variables])
    ub = np.array([v.upper for v in model.variables])
    integrality = np.array([1 if v.kind == BINARY else 0 for v in model.variables])

    constraints = []
    if model.constraints:
        rows, cols, data = [], [], []
        clo = np.empty(len(model.constraints))
        cup = np.empty(len(model.constraints))
        for i, con in enumerate(model.constraints):
            for coef, var in con.terms:
                rows.append(i)
                cols.append(model.var_index(var))
                data.append(coef)
            if con.sense == "<=":
                clo[i], cup[i] = -np.inf, con.rhs
            elif con.sense == ">=":
                clo[i], cup[i] = con.rhs, np.inf
            else:
                clo[i] = cup[i] = con.rhs
        a = sparse.csr_matrix((data, (rows, cols)), shape=(len(model.constraints), n))
        constraints = [LinearConstraint(a, clo, cup)]

    start = time.perf_counter()
    res = milp(
        c,
        constraints=constraints,
        bounds=Bounds(lb, ub),
        integrality=integrality,
        options={"time_limit": float(time_limit), "presolve": True},
    )
    runtime = time.perf_counter() - start

    if res.status == 2:
        return SolveResult("infeasible", {}, math.nan, math.nan, math.nan, runtime)
    if res.status == 3:
        raise SolverCrashError("model is unbounded; check variable bounds")
    if res.x is None:
        return SolveResult("timeout", {}, math.nan, math.nan, math.nan, runtime)

    values = {v.name: float(res.x[i]) for i, v in enumerate(model.variables)}
    objective = float(sign * res.fun)
    dual = getattr(res, "mip_dual_bound", None)
    bound = objective if dual is None else float(sign * dual)
    status = "optimal" if res.status == 0 else "feasible"
    gap = 0.0 if status == "optimal" else _relative_gap(model.sense, objective, bound)
    return SolveResult(status, values, objective, bound, gap, runtime)


def _relative_gap(sense: str, incumbent: float, bound: float) -> float:
    if not (math.isfinite(incumbent) and math.isfinite(bound)):
        return math.inf
    diff = bound - incumbent if sense == "maximize" else incumbent - bound
    return max(0.0, diff / max(abs(incumbent), 1e-10))


def _solve_subprocess(model: MilpModel, time_limit: float, solver_cmd: str) -> SolveResult:
    argv = shlex.split(solver_cmd)
    if not argv:
        raise SolverNotFoundError("solver command is empty")
    with tempfile.TemporaryDirectory(prefix="robusteam-") as tmp:
        lp_path = Path(tmp) / f"{model.name}.lp"
        emit_lp_file(model, lp_path)
        start = time.perf_counter()
        try:
            proc = subprocess.run(
                argv + [str(lp_path), str(time_limit)],
                capture_output=True,
                text=True,
                timeout=max(time_limit * 3, time_limit + 60),
            )
        except FileNotFoundError as exc:
            raise SolverNotFoundError(f"solver command not found: {argv[0]}") from exc
        except subprocess.TimeoutExpired as exc:
            raise SolverCrashError(f"solver did not exit within the grace period: {argv[0]}") from exc
        runtime = time.perf_counter() - start
    if proc.returncode != 0:
        raise SolverCrashError(
            f"solver exited with code {proc.returncode}: {proc.stderr.strip()[:500]}"
        )
    try:
        payload = json.loads(proc.stdout)
        status = payload["status"]
        if status in ("infeasible", "timeout"):
            return SolveResult(status, {}, math.nan, math.nan, math.nan, runtime)
        values = {k: float(v) for k, v in payload["values"].items()}
        objective = float(payload["objective"])
        bound = float(payload.get("bound", objective))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise SolverCrashError(f"could not parse solver output: {exc}") from exc
    if status not in ("optimal", "feasible"):
        raise SolverCrashError(f"unknown solver status: {status}")
    gap = 0.0 if status == "optimal" else _relative_gap(model.sense, objective, bound)
    reported = payload.get("runtime_seconds")
    return SolveResult(status, values, objective, bound, gap, float(reported or runtime))


def solve(
    model: MilpModel,
    time_limit_seconds: float = 3600.0,
    solver_cmd: str | None = None,
    verify: bool = True,
) -> SolveResult:
    """Solve a model, re-verify the returned assignment, and report the gap.

    Backend order: explicit ``solver_cmd``, then the ``ROBUSTEAM_SOLVER_CMD``
    environment variable, then the built-in HiGHS backend.
    """
    cmd = solver_cmd if solver_cmd is not None else os.environ.get(SOLVER_CMD_ENV)
    if cmd:
        result = _solve_subprocess(model, time_limit_seconds, cmd)
    else:
        result = _solve_builtin(model, time_limit_seconds)
    if verify and result.has_solution:
        check_assignment(model, result.values)
    return result
