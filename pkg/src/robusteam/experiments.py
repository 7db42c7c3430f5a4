"""Study and sweep drivers: solve models per instance, simulate, aggregate.

``run_study`` mirrors the benchmark protocol: solve the deterministic and
robust models on every instance, then stress each plan against both
scenario families and report solve metrics plus survival statistics.
``run_sweep`` keeps the solutions fixed and varies the scenario budget over
a grid, using nested scenarios under common random numbers so that each
seed's survivor count is exactly nonincreasing in the budget.

Aggregates are always derivable from the raw records kept on the report;
CSV writers emit those records and the plot-ready series.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import milp
from .instance import Instance, UncertaintySpec, generate_uncertainty
from .models import Solution, Weights, build_model, decode_solution
from .scenario import evaluate_scenario, gen_scenario_rm1, gen_scenario_rm2

SCENARIO_KINDS = ("rm1", "rm2")


def derive_seed(*parts: int) -> int:
    """Stable, well-mixed integer seed from integer components."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def default_grid(kind: str, n_jobs: int) -> tuple[int, ...]:
    """Sweep grids: cell counts 0..6, or spend budgets 0, 2n, ..., 16n."""
    if kind == "rm1":
        return tuple(range(7))
    if kind == "rm2":
        return tuple(2 * factor * n_jobs for factor in range(9))
    raise ValueError(f"unknown scenario kind: {kind}")


@dataclass(frozen=True)
class SolveRecord:
    """Solve metrics for one (instance, model) cell."""

    instance: str
    model: str
    status: str
    objective: float | None = None
    z_count: int | None = None
    complexity: float | None = None
    active_teams: int | None = None
    employees: int | None = None
    total_finish: float | None = None
    cpu_seconds: float | None = None
    gap_percent: float | None = None
    error: str | None = None


@dataclass(frozen=True)
class ScenarioRecord:
    """Survival of one solution under one scenario realization."""

    kind: str
    instance: str
    scenario_id: int
    seed: int
    model: str
    survived: int
    ratio: float | None  # survived / planned, percent; None when nothing planned


def solve_and_decode(
    kind: str,
    inst: Instance,
    unc: UncertaintySpec | None = None,
    weights: Weights | None = None,
    time_limit: float = 3600.0,
    solver_cmd: str | None = None,
    prune_arcs: bool = False,
) -> Solution:
    """Build, solve, and decode one model; decoding re-verifies the plan."""
    model = build_model(kind, inst, unc, weights, prune_arcs)
    result = milp.solve(model, time_limit_seconds=time_limit, solver_cmd=solver_cmd)
    if not result.has_solution:
        raise milp.SolverError(f"{kind} on {inst.name}: solver returned {result.status}")
    return decode_solution(kind, inst, result, verify=True)


def _solve_record(inst: Instance, kind: str, sol: Solution) -> SolveRecord:
    z = sol.n_performed
    complexity = None
    if z:
        total_req = sum(int(inst.requirements[j - 1].sum()) for j in sol.performed)
        complexity = total_req / z
    total_finish = float(sum(sol.f[t, j] for j, t in sol.performed.items()))
    meta = sol.solve_meta
    return SolveRecord(
        instance=inst.name,
        model=kind,
        status=meta.status if meta else "loaded",
        objective=float(sol.objective_value),
        z_count=z,
        complexity=complexity,
        active_teams=len(sol.active_teams),
        employees=sol.n_employees_active,
        total_finish=total_finish,
        cpu_seconds=meta.runtime_seconds if meta else None,
        gap_percent=meta.gap * 100.0 if meta else None,
    )


@dataclass
class MetricsReport:
    solve_records: list[SolveRecord] = field(default_factory=list)
    scenario_records: list[ScenarioRecord] = field(default_factory=list)

    def solve_summary(self) -> dict[str, dict[str, float | int | None]]:
        """Per-model averages over instances that produced a solution."""
        out: dict[str, dict] = {}
        models = sorted({r.model for r in self.solve_records})
        for model in models:
            rows = [r for r in self.solve_records if r.model == model and r.error is None]
            summary: dict[str, float | int | None] = {"instances": len(rows)}
            for name, attr in (
                ("Z", "z_count"),
                ("C", "complexity"),
                ("T", "active_teams"),
                ("E", "employees"),
                ("F", "total_finish"),
                ("CPU", "cpu_seconds"),
                ("GAP", "gap_percent"),
            ):
                vals = [getattr(r, attr) for r in rows if getattr(r, attr) is not None]
                summary[name] = sum(vals) / len(vals) if vals else None
            summary["Opt"] = sum(1 for r in rows if r.status == "optimal")
            out[model] = summary
        return out

    def simulation_summary(self) -> dict[str, dict[str, dict[str, float | None]]]:
        """Per scenario kind and model: A, R, and paired B/W versus dm."""
        out: dict[str, dict] = {}
        for kind in sorted({r.kind for r in self.scenario_records}):
            rows = [r for r in self.scenario_records if r.kind == kind]
            models = sorted({r.model for r in rows})
            dm_a = {
                (r.instance, r.scenario_id): r.survived
                for r in rows
                if r.model == "dm"
            }
            block: dict[str, dict] = {}
            for model in models:
                mine = [r for r in rows if r.model == model]
                ratios = [r.ratio for r in mine if r.ratio is not None]
                entry: dict[str, float | None] = {
                    "A": sum(r.survived for r in mine) / len(mine) if mine else None,
                    "R": sum(ratios) / len(ratios) if ratios else None,
                }
                if model != "dm" and dm_a:
                    paired = [
                        (r.survived, dm_a[(r.instance, r.scenario_id)])
                        for r in mine
                        if (r.instance, r.scenario_id) in dm_a
                    ]
                    if paired:
                        entry["B"] = 100.0 * sum(a > d for a, d in paired) / len(paired)
                        entry["W"] = 100.0 * sum(a < d for a, d in paired) / len(paired)
                block[model] = entry
            out[kind] = block
        return out

    def to_dict(self) -> dict:
        return {
            "solve": [vars(r).copy() for r in self.solve_records],
            "scenarios": [vars(r).copy() for r in self.scenario_records],
            "solve_summary": self.solve_summary(),
            "simulation_summary": self.simulation_summary(),
        }


@dataclass(frozen=True)
class StudyConfig:
    """Everything run_study needs beyond the instance list."""

    models: tuple[str, ...] = ("dm", "rm1", "rm2")
    weights: Weights | None = None
    uncertainty_seed: int = 0
    gamma_job: int = 4
    gamma_global_factor: int = 2       # solve budget: factor * n_jobs
    scenario_gamma_job: int = 3        # cell-count scenario budget
    scenario_budget_factor: int = 10   # spend scenario budget: factor * n_jobs
    n_scenarios: int = 1000
    scenario_seed: int = 0
    time_limit: float = 3600.0
    solver_cmd: str | None = None
    prune_arcs: bool = False
    threads: int = 1


def _study_instance(
    task: tuple[int, Instance, StudyConfig],
) -> tuple[list[SolveRecord], list[ScenarioRecord], dict[str, Solution]]:
    idx, inst, cfg = task
    unc = generate_uncertainty(
        inst,
        seed=derive_seed(cfg.uncertainty_seed, idx),
        gamma_job=cfg.gamma_job,
        gamma_global=cfg.gamma_global_factor * inst.n_jobs,
    )
    solve_records: list[SolveRecord] = []
    solutions: dict[str, Solution] = {}
    for kind in cfg.models:
        try:
            sol = solve_and_decode(
                kind,
                inst,
                unc,
                cfg.weights,
                time_limit=cfg.time_limit,
                solver_cmd=cfg.solver_cmd,
                prune_arcs=cfg.prune_arcs,
            )
        except (milp.SolverError, ValueError) as exc:
            solve_records.append(
                SolveRecord(instance=inst.name, model=kind, status="error", error=str(exc))
            )
            continue
        solutions[kind] = sol
        solve_records.append(_solve_record(inst, kind, sol))

    scenario_records: list[ScenarioRecord] = []
    for kind_id, kind in enumerate(SCENARIO_KINDS):
        if not solutions:
            break
        for sid in range(cfg.n_scenarios):
            seed = derive_seed(cfg.scenario_seed, kind_id, idx, sid)
            if kind == "rm1":
                scen = gen_scenario_rm1(inst, unc, cfg.scenario_gamma_job, seed)
            else:
                scen = gen_scenario_rm2(
                    inst, unc, cfg.scenario_budget_factor * inst.n_jobs, seed
                )
            for model, sol in solutions.items():
                survived, _ = evaluate_scenario(sol, scen, inst)
                z = sol.n_performed
                scenario_records.append(
                    ScenarioRecord(
                        kind=kind,
                        instance=inst.name,
                        scenario_id=sid,
                        seed=seed,
                        model=model,
                        survived=survived,
                        ratio=100.0 * survived / z if z else None,
                    )
                )
    return solve_records, scenario_records, solutions


def run_study(
    instances: Sequence[Instance],
    config: StudyConfig | None = None,
    solutions_out: dict[str, dict[str, Solution]] | None = None,
) -> MetricsReport:
    """Solve every model on every instance, simulate both scenario kinds.

    Per-instance solver failures are recorded as error rows and do not
    abort the batch. ``solutions_out``, when given, is filled with the
    decoded solutions keyed by instance name then model. Deterministic for
    fixed seeds, including across ``threads`` settings.
    """
    if not instances:
        raise ValueError("need at least one instance")
    cfg = config or StudyConfig()
    tasks = [(idx, inst, cfg) for idx, inst in enumerate(instances)]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_study_instance, tasks))
    else:
        results = [_study_instance(t) for t in tasks]

    report = MetricsReport()
    for (_, inst, _), (solve_recs, scen_recs, sols) in zip(tasks, results):
        report.solve_records.extend(solve_recs)
        report.scenario_records.extend(scen_recs)
        if solutions_out is not None:
            solutions_out[inst.name] = sols
    return report


@dataclass(frozen=True)
class SweepRecord:
    kind: str
    budget: int
    instance: str
    scenario_id: int
    seed: int
    model: str
    survived: int


@dataclass
class SweepResult:
    kind: str
    grid: tuple[int, ...]
    models: tuple[str, ...]
    records: list[SweepRecord] = field(default_factory=list)

    def series(self) -> dict[str, tuple[float, ...]]:
        """Average survivors per model along the grid."""
        out: dict[str, tuple[float, ...]] = {}
        for model in self.models:
            points = []
            for budget in self.grid:
                vals = [
                    r.survived
                    for r in self.records
                    if r.model == model and r.budget == budget
                ]
                points.append(sum(vals) / len(vals) if vals else math.nan)
            out[model] = tuple(points)
        return out

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "grid": list(self.grid),
            "models": list(self.models),
            "series": {m: list(v) for m, v in self.series().items()},
            "records": [vars(r).copy() for r in self.records],
        }


def run_sweep(
    instances: Sequence[Instance],
    uncertainties: Sequence[UncertaintySpec],
    solutions: dict[str, dict[str, Solution]],
    kind: str,
    grid: Sequence[int] | None = None,
    n_scenarios: int = 200,
    scenario_seed: int = 0,
    cap_rhat: bool = False,
) -> SweepResult:
    """Vary the scenario budget over fixed solutions.

    Scenarios share seeds across budgets (common random numbers) and use
    the nested generators, so per-seed survivor counts are exactly
    nonincreasing along the grid for every model.
    """
    if kind not in SCENARIO_KINDS:
        raise ValueError(f"unknown scenario kind: {kind}")
    if len(instances) != len(uncertainties):
        raise ValueError("need one uncertainty spec per instance")
    grid = tuple(grid) if grid is not None else default_grid(kind, instances[0].n_jobs)
    models = tuple(
        sorted({m for sols in solutions.values() for m in sols})
    )
    result = SweepResult(kind=kind, grid=grid, models=models)
    for idx, (inst, unc) in enumerate(zip(instances, uncertainties)):
        inst_solutions = solutions.get(inst.name, {})
        for sid in range(n_scenarios):
            seed = derive_seed(scenario_seed, idx, sid)
            cells = inst.n_skills * inst.n_levels
            for budget in grid:
                if kind == "rm1":
                    scen = gen_scenario_rm1(inst, unc, min(budget, cells), seed)
                else:
                    scen = gen_scenario_rm2(
                        inst, unc, budget, seed, nested=True, cap_rhat=cap_rhat
                    )
                for model, sol in sorted(inst_solutions.items()):
                    survived, _ = evaluate_scenario(sol, scen, inst)
                    result.records.append(
                        SweepRecord(
                            kind=kind,
                            budget=budget,
                            instance=inst.name,
                            scenario_id=sid,
                            seed=seed,
                            model=model,
                            survived=survived,
                        )
                    )
    return result


def write_solve_csv(records: Sequence[SolveRecord], path: str | Path) -> None:
    columns = [
        "instance", "model", "status", "objective", "Z", "C", "T", "E", "F",
        "cpu_seconds", "gap_percent", "error",
    ]
    attrs = [
        "instance", "model", "status", "objective", "z_count", "complexity",
        "active_teams", "employees", "total_finish", "cpu_seconds",
        "gap_percent", "error",
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for r in records:
            writer.writerow([_cell(getattr(r, a)) for a in attrs])


def write_scenario_csv(records: Sequence[ScenarioRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "instance", "scenario_id", "seed", "model", "A", "R"])
        for r in records:
            writer.writerow([
                r.kind, r.instance, r.scenario_id, r.seed, r.model,
                r.survived, _cell(r.ratio),
            ])


def write_simulation_csv(records: Sequence[ScenarioRecord], path: str | Path) -> None:
    """Single-solution simulation output: one row per scenario."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario_id", "seed", "A", "R"])
        for r in records:
            writer.writerow([r.scenario_id, r.seed, r.survived, _cell(r.ratio)])


def write_sweep_csv(sweep: SweepResult, path: str | Path) -> None:
    """Plot-ready long format: one row per (budget, model)."""
    series = sweep.series()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["budget", "model", "avg_A"])
        for model in sweep.models:
            for budget, value in zip(sweep.grid, series[model]):
                writer.writerow([budget, model, _cell(value)])


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(round(value, 10))
    return str(value)
