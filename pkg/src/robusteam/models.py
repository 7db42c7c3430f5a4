"""Model builders for the three team-routing formulations, plus decoding.

Three closely related MILPs over the same routing core:

* ``build_dm``: deterministic model with nominal per-cell qualification cover.
* ``build_rm1``: aggregate robust model, where each performing team's total
  qualification count must cover the job's worst-case aggregate demand,
  with a rewarded slack variable measuring the excess.
* ``build_rm2``: disruption-counting robust model, per-cell slacks plus a
  longest-path dual block that counts, inside the model, how many planned
  jobs a budget-constrained adversary could disrupt.

``decode_solution`` turns solver output back into routes/teams and
re-verifies every constraint family directly against the instance data,
independent of whatever the solver claimed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .instance import Instance, UncertaintySpec, ValidationError, _freeze
from .milp import CONTINUOUS, BINARY, MilpModel, SolveResult


@dataclass(frozen=True)
class Weights:
    """Objective weights; defaults match the benchmark configuration."""

    alpha: float = 1.0    # reward per performed job
    beta: float = 0.0001  # penalty per completion-time minute
    mu: float = 0.01      # reward per unit of qualification slack
    nu: float = 0.99      # penalty per adversary-disruptable job

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "mu", "nu"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


DEFAULT_WEIGHTS = Weights()


def time_big_m(inst: Instance) -> float:
    """Big-M for time-precedence rows: horizon + max travel + max processing."""
    return float(inst.e_max + inst.travel.max() + inst.processing.max())


def worst_case_demand(requirement: np.ndarray, deviation: np.ndarray, budget: int) -> int:
    """Worst-case aggregate demand of one job under a deviation-count budget.

    The adversary may push up to ``budget`` cells to their maximal deviation;
    fractional splits never beat taking the largest deviations whole, so the
    maximum is the nominal total plus the ``budget`` largest deviations.
    """
    requirement = np.asarray(requirement)
    deviation = np.asarray(deviation)
    if requirement.shape != deviation.shape:
        raise ValueError(f"shape mismatch: {requirement.shape} vs {deviation.shape}")
    cells = requirement.size
    if not 0 <= budget <= cells:
        raise ValueError(f"budget must lie in [0, {cells}], got {budget}")
    top = np.sort(deviation.ravel())[::-1][:budget]
    return int(requirement.sum() + top.sum())


def worst_case_demands(inst: Instance, unc: UncertaintySpec, budget: int | None = None) -> np.ndarray:
    """Per-job worst-case aggregate demands; ``budget`` overrides unc.gamma_job."""
    gamma = unc.gamma_job if budget is None else budget
    gamma = min(gamma, inst.n_skills * inst.n_levels)
    return np.array([
        worst_case_demand(inst.requirements[j - 1], unc.r_hat[j - 1], gamma)
        for j in inst.jobs
    ])


def _routing_core(inst: Instance, label: str) -> tuple[MilpModel, list[tuple[float, str]]]:
    """Declare routing/assignment/scheduling variables and shared constraints.

    Returns the model plus the started objective term list (job rewards and
    completion-time penalties are appended by the callers, which own the
    weights). Shared rows: employee assignment, depot departure, single
    visit, flow balance, travel precedence, processing, horizon.
    """
    n = inst.n_jobs
    n_teams = inst.team_bound
    big_m = time_big_m(inst)

    model = MilpModel(name=label)
    for m in range(inst.n_employees):
        for t in range(n_teams):
            model.add_var(f"x_{m}_{t}", BINARY)
    for t in range(n_teams):
        for i in inst.nodes:
            for j in inst.nodes:
                if i == 0 and j == 0:
                    continue  # a depot-to-depot trip has no meaning
                model.add_var(f"z_{t}_{i}_{j}", BINARY)
    for t in range(n_teams):
        for j in inst.jobs:
            model.add_var(f"s_{t}_{j}", CONTINUOUS, 0.0, inst.e_max)
    for t in range(n_teams):
        for j in inst.jobs:
            model.add_var(f"f_{t}_{j}", CONTINUOUS, 0.0, inst.e_max)

    for m in range(inst.n_employees):
        model.add_constraint(
            f"assign_{m}",
            [(1.0, f"x_{m}_{t}") for t in range(n_teams)],
            "<=",
            1.0,
        )
    for t in range(n_teams):
        model.add_constraint(
            f"depart_{t}",
            [(1.0, f"z_{t}_0_{j}") for j in inst.jobs],
            "<=",
            1.0,
        )
    for j in inst.jobs:
        model.add_constraint(
            f"visit_{j}",
            [(1.0, f"z_{t}_{i}_{j}") for t in range(n_teams) for i in inst.nodes],
            "<=",
            1.0,
        )
    for t in range(n_teams):
        for j in inst.nodes:
            # self-loop arcs appear on both sides and cancel, so skip them
            terms = [(1.0, f"z_{t}_{i}_{j}") for i in inst.nodes if i != j and (i, j) != (0, 0)]
            terms += [(-1.0, f"z_{t}_{j}_{i}") for i in inst.nodes if i != j and (j, i) != (0, 0)]
            model.add_constraint(f"flow_{j}_{t}", terms, "=", 0.0)
    for t in range(n_teams):
        for i in inst.nodes:
            for j in inst.jobs:
                # finish at i plus travel must precede the start at j when
                # the team drives i -> j; f at the depot is the 0 start time
                terms = [(big_m, f"z_{t}_{i}_{j}"), (-1.0, f"s_{t}_{j}")]
                if i != 0:
                    terms.append((1.0, f"f_{t}_{i}"))
                model.add_constraint(
                    f"travel_{t}_{i}_{j}", terms, "<=", big_m - inst.travel[i, j]
                )
    for t in range(n_teams):
        for j in inst.jobs:
            terms = [(1.0, f"s_{t}_{j}"), (-1.0, f"f_{t}_{j}")]
            terms += [(big_m, f"z_{t}_{i}_{j}") for i in inst.nodes]
            model.add_constraint(
                f"process_{t}_{j}", terms, "<=", big_m - inst.processing[j - 1]
            )
    for t in range(n_teams):
        for j in inst.jobs:
            model.add_constraint(f"horizon_{t}_{j}", [(1.0, f"f_{t}_{j}")], "<=", inst.e_max)

    objective: list[tuple[float, str]] = []
    return model, objective


def _base_objective(inst: Instance, weights: Weights) -> list[tuple[float, str]]:
    n_teams = inst.team_bound
    terms = [
        (weights.alpha, f"z_{t}_{i}_{j}")
        for t in range(n_teams)
        for i in inst.nodes
        for j in inst.jobs
    ]
    terms += [
        (-weights.beta, f"f_{t}_{j}") for t in range(n_teams) for j in inst.jobs
    ]
    return terms


def _add_nominal_quality(model: MilpModel, inst: Instance) -> None:
    # per-cell cover: the serving team holds every required skill/level count
    for j in inst.jobs:
        for k in range(inst.n_skills):
            for l in range(inst.n_levels):
                for t in range(inst.team_bound):
                    terms = [
                        (float(inst.qualifications[m, k, l]), f"x_{m}_{t}")
                        for m in range(inst.n_employees)
                        if inst.qualifications[m, k, l]
                    ]
                    terms += [
                        (-float(inst.requirements[j - 1, k, l]), f"z_{t}_{i}_{j}")
                        for i in inst.nodes
                    ]
                    model.add_constraint(f"qual_{j}_{k}_{l}_{t}", terms, ">=", 0.0)


def build_dm(inst: Instance, weights: Weights | None = None) -> MilpModel:
    """Deterministic model: route teams to cover nominal requirements."""
    weights = weights or DEFAULT_WEIGHTS
    model, objective = _routing_core(inst, "dm")
    _add_nominal_quality(model, inst)
    objective += _base_objective(inst, weights)
    model.set_objective(objective, "maximize")
    return model


def slack_big_m_aggregate(inst: Instance) -> float:
    """Cap for aggregate slack: no team can exceed this qualification total."""
    return float(inst.n_employees * inst.n_skills * inst.n_levels)


def build_rm1(
    inst: Instance, unc: UncertaintySpec, weights: Weights | None = None
) -> MilpModel:
    """Aggregate robust model.

    On top of the deterministic rows, each (job, team) pair gets an
    aggregate cover row: the team's total qualification count must reach
    the job's worst-case aggregate demand whenever the team performs the
    job, plus a slack variable rewarded in the objective. The slack is
    gated to zero for teams not performing the job.
    """
    weights = weights or DEFAULT_WEIGHTS
    rbar = worst_case_demands(inst, unc)
    n_teams = inst.team_bound
    model, objective = _routing_core(inst, "rm1")
    _add_nominal_quality(model, inst)

    slack_cap = slack_big_m_aggregate(inst)
    total_quals = inst.qualifications.sum(axis=(1, 2))  # per employee
    for j in inst.jobs:
        for t in range(n_teams):
            model.add_var(f"rho_{j}_{t}", CONTINUOUS, 0.0, slack_cap)
    for j in inst.jobs:
        for t in range(n_teams):
            terms = [
                (float(total_quals[m]), f"x_{m}_{t}")
                for m in range(inst.n_employees)
                if total_quals[m]
            ]
            terms += [(-float(rbar[j - 1]), f"z_{t}_{i}_{j}") for i in inst.nodes]
            terms.append((-1.0, f"rho_{j}_{t}"))
            model.add_constraint(f"rqual_{j}_{t}", terms, ">=", 0.0)
            gate = [(1.0, f"rho_{j}_{t}")]
            gate += [(-slack_cap, f"z_{t}_{i}_{j}") for i in inst.nodes]
            model.add_constraint(f"rgate_{j}_{t}", gate, "<=", 0.0)

    objective += _base_objective(inst, weights)
    objective += [
        (weights.mu, f"rho_{j}_{t}") for j in inst.jobs for t in range(n_teams)
    ]
    model.set_objective(objective, "maximize")
    return model


def disruption_big_m(inst: Instance, unc: UncertaintySpec) -> float:
    """Big-M for the disruption-indicator rows of the counting model."""
    worst_cost = (inst.requirements * unc.costs).max() if inst.n_jobs else 0
    return float(unc.gamma_global + 1 + worst_cost)


def build_rm2(
    inst: Instance,
    unc: UncertaintySpec,
    weights: Weights | None = None,
    prune_arcs: bool = False,
) -> MilpModel:
    """Disruption-counting robust model.

    Replaces the per-cell cover rows with slack-carrying versions, then adds
    a dual block over nodes (job, spent budget): binary v_{j}_{g} is forced
    on whenever job j is performed and a budget of g pays for raising some
    requirement cell past the serving team's count, and the chain rows push
    u_{n}_{Gamma} up to the maximum number of disruptable jobs, which the
    objective charges at rate nu.

    ``prune_arcs`` restricts the chain rows to consecutive job pairs, which
    preserves optima (longer chains compose from consecutive steps) and
    shrinks the model considerably.
    """
    weights = weights or DEFAULT_WEIGHTS
    n = inst.n_jobs
    n_teams = inst.team_bound
    gamma = unc.gamma_global
    model, objective = _routing_core(inst, "rm2")

    slack_cap = float(inst.n_employees)  # per-cell buffer never exceeds headcount
    for j in inst.jobs:
        for k in range(inst.n_skills):
            for l in range(inst.n_levels):
                for t in range(n_teams):
                    model.add_var(f"rho_{j}_{k}_{l}_{t}", CONTINUOUS, 0.0, slack_cap)
    for j in inst.nodes:
        for g in range(gamma + 1):
            model.add_var(f"u_{j}_{g}", CONTINUOUS, 0.0, math.inf)
    for j in inst.jobs:
        for g in range(gamma + 1):
            model.add_var(f"v_{j}_{g}", BINARY)

    # per-cell cover with rewarded slack, gated off for non-performing teams
    for j in inst.jobs:
        for k in range(inst.n_skills):
            for l in range(inst.n_levels):
                for t in range(n_teams):
                    terms = [
                        (float(inst.qualifications[m, k, l]), f"x_{m}_{t}")
                        for m in range(inst.n_employees)
                        if inst.qualifications[m, k, l]
                    ]
                    terms += [
                        (-float(inst.requirements[j - 1, k, l]), f"z_{t}_{i}_{j}")
                        for i in inst.nodes
                    ]
                    terms.append((-1.0, f"rho_{j}_{k}_{l}_{t}"))
                    model.add_constraint(f"rqual_{j}_{k}_{l}_{t}", terms, ">=", 0.0)
                    gate = [(1.0, f"rho_{j}_{k}_{l}_{t}")]
                    gate += [(-slack_cap, f"z_{t}_{i}_{j}") for i in inst.nodes]
                    model.add_constraint(f"rgate_{j}_{k}_{l}_{t}", gate, "<=", 0.0)

    model.add_constraint("ubase", [(1.0, "u_0_0")], "=", 0.0)

    # chain rows: reaching (j', g') is at least as good as reaching (j, g)
    # and then spending g'-g on job j'
    for jp in inst.jobs:
        predecessors = [jp - 1] if prune_arcs else range(jp)
        for j in predecessors:
            for gp in range(gamma + 1):
                for g in range(gp + 1):
                    model.add_constraint(
                        f"chain_{jp}_{gp}_{j}_{g}",
                        [
                            (1.0, f"u_{j}_{g}"),
                            (1.0, f"v_{jp}_{gp - g}"),
                            (-1.0, f"u_{jp}_{gp}"),
                        ],
                        "<=",
                        0.0,
                    )

    # force v_{j}_{g} = 1 when a budget of g covers the cheapest cell raise
    # against the serving team's buffer
    big_m = disruption_big_m(inst, unc)
    for j in inst.jobs:
        for g in range(gamma + 1):
            for k in range(inst.n_skills):
                for l in range(inst.n_levels):
                    cost = float(unc.costs[j - 1, k, l])
                    for t in range(n_teams):
                        terms = [(big_m, f"v_{j}_{g}")]
                        terms += [(-big_m, f"z_{t}_{i}_{j}") for i in inst.nodes]
                        terms += [
                            (cost * inst.qualifications[m, k, l], f"x_{m}_{t}")
                            for m in range(inst.n_employees)
                            if inst.qualifications[m, k, l]
                        ]
                        rhs = g + (inst.requirements[j - 1, k, l] - 1.0) * cost + 1.0 - big_m
                        model.add_constraint(f"force_{j}_{g}_{k}_{l}_{t}", terms, ">=", rhs)

    objective += _base_objective(inst, weights)
    objective.append((-weights.nu, f"u_{n}_{gamma}"))
    objective += [
        (weights.mu, f"rho_{j}_{k}_{l}_{t}")
        for j in inst.jobs
        for k in range(inst.n_skills)
        for l in range(inst.n_levels)
        for t in range(n_teams)
    ]
    model.set_objective(objective, "maximize")
    return model


def build_model(
    kind: str,
    inst: Instance,
    unc: UncertaintySpec | None = None,
    weights: Weights | None = None,
    prune_arcs: bool = False,
) -> MilpModel:
    """Dispatch on model kind; robust kinds require an uncertainty spec."""
    if kind == "dm":
        return build_dm(inst, weights)
    if kind in ("rm1", "rm2") and unc is None:
        raise ValueError(f"model {kind} requires an uncertainty spec")
    if kind == "rm1":
        return build_rm1(inst, unc, weights)
    if kind == "rm2":
        return build_rm2(inst, unc, weights, prune_arcs)
    raise ValueError(f"unknown model kind: {kind}")


class SolutionError(ValidationError):
    """A decoded solution violates a constraint family.

    ``family`` names the violated family; the message carries the indices.
    """

    def __init__(self, family: str, detail: str):
        super().__init__(f"{family}: {detail}")
        self.family = family


@dataclass(frozen=True, eq=False)
class Solution:
    """Decoded plan: team rosters, routes, schedule, and robust diagnostics.

    ``s``/``f`` are indexed [team, node] with column 0 fixed at zero (the
    depot has no schedule). ``rho`` is (jobs, teams) for the aggregate
    robust model and (jobs, skills, levels, teams) for the counting model;
    ``u``/``v`` are the dual-block values of the counting model. Optional
    fields are None when the model kind does not produce them or the
    solution was loaded from a file.
    """

    model_kind: str
    x: np.ndarray               # (n_employees, n_teams) binary
    z: np.ndarray               # (n_teams, n_jobs+1, n_jobs+1) binary
    s: np.ndarray               # (n_teams, n_jobs+1) start minutes
    f: np.ndarray               # (n_teams, n_jobs+1) finish minutes
    objective_value: float
    rho: np.ndarray | None = None
    u: np.ndarray | None = None
    v: np.ndarray | None = None
    solve_meta: SolveResult | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", _freeze(np.asarray(self.x, dtype=int)))
        object.__setattr__(self, "z", _freeze(np.asarray(self.z, dtype=int)))
        object.__setattr__(self, "s", _freeze(np.asarray(self.s, dtype=float)))
        object.__setattr__(self, "f", _freeze(np.asarray(self.f, dtype=float)))
        for name in ("rho", "u", "v"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _freeze(np.asarray(val, dtype=float)))

    @property
    def n_teams(self) -> int:
        return self.z.shape[0]

    @property
    def n_jobs(self) -> int:
        return self.z.shape[1] - 1

    @property
    def performed(self) -> dict[int, int]:
        """Job -> serving team, for every job with an incoming arc."""
        served: dict[int, int] = {}
        for t in range(self.n_teams):
            for j in range(1, self.n_jobs + 1):
                if self.z[t, :, j].sum() >= 1:
                    served.setdefault(j, t)
        return served

    @property
    def n_performed(self) -> int:
        return len(self.performed)

    @property
    def routes(self) -> tuple[tuple[int, ...], ...]:
        """Per-team job sequence, reconstructed by following successors."""
        out = []
        for t in range(self.n_teams):
            route: list[int] = []
            seen = {0}
            node = 0
            while True:
                successors = [
                    j for j in range(self.n_jobs + 1)
                    if j != node and self.z[t, node, j] >= 1
                ]
                if not successors:
                    break
                node = successors[0]
                if node in seen:
                    break
                seen.add(node)
                route.append(node)
            out.append(tuple(route))
        return tuple(out)

    @property
    def active_teams(self) -> tuple[int, ...]:
        served = self.performed
        return tuple(sorted(set(served.values())))

    @property
    def n_employees_active(self) -> int:
        active = self.active_teams
        if not active:
            return 0
        return int(self.x[:, list(active)].sum())

    def team_qualifications(self, inst: Instance) -> np.ndarray:
        """Per-team skill/level counts: (n_teams, n_skills, n_levels)."""
        return np.tensordot(self.x, inst.qualifications, axes=(0, 0))


def verify_solution(inst: Instance, sol: Solution, tol: float = 1e-6) -> None:
    """Re-check every constraint family against raw instance data.

    Raises :class:`SolutionError` naming the first violated family. This is
    intentionally independent of the model matrices: requirements, travel
    times, and the horizon are read straight from the instance.
    """
    n = inst.n_jobs
    n_teams = sol.n_teams
    if sol.n_jobs != n or sol.x.shape[0] != inst.n_employees:
        raise SolutionError("shape", f"solution is sized {sol.x.shape[0]}x{sol.n_jobs}, "
                                     f"instance {inst.n_employees}x{n}")

    for m in range(inst.n_employees):
        if sol.x[m].sum() > 1:
            raise SolutionError("employee-assignment", f"employee {m} is in several teams")

    teamq = sol.team_qualifications(inst)
    for t in range(n_teams):
        for j in inst.jobs:
            if sol.z[t, :, j].sum() >= 1:
                short = inst.requirements[j - 1] - teamq[t]
                if short.max() > 0:
                    k, l = np.unravel_index(short.argmax(), short.shape)
                    raise SolutionError(
                        "team-qualification",
                        f"team {t} lacks {int(short[k, l])} of skill {k} level {l} for job {j}",
                    )

    for t in range(n_teams):
        if sol.z[t, 0, 1:].sum() > 1:
            raise SolutionError("depot-departure", f"team {t} leaves the depot twice")

    for j in inst.jobs:
        if sol.z[:, :, j].sum() > 1:
            raise SolutionError("job-coverage", f"job {j} has several incoming arcs")

    for t in range(n_teams):
        for j in inst.nodes:
            if sol.z[t, :, j].sum() != sol.z[t, j, :].sum():
                raise SolutionError("flow-balance", f"team {t} node {j} in/out arcs differ")

    for t in range(n_teams):
        for i in inst.nodes:
            for j in inst.jobs:
                if sol.z[t, i, j] >= 1:
                    depart = sol.f[t, i] if i != 0 else 0.0
                    if depart + inst.travel[i, j] > sol.s[t, j] + tol:
                        raise SolutionError(
                            "travel-time-precedence",
                            f"team {t} arc {i}->{j}: finish {depart} + travel "
                            f"{inst.travel[i, j]} exceeds start {sol.s[t, j]}",
                        )

    for t in range(n_teams):
        for j in inst.jobs:
            if sol.z[t, :, j].sum() >= 1:
                if sol.s[t, j] + inst.processing[j - 1] > sol.f[t, j] + tol:
                    raise SolutionError(
                        "processing-time",
                        f"team {t} job {j}: start {sol.s[t, j]} + processing "
                        f"{inst.processing[j - 1]} exceeds finish {sol.f[t, j]}",
                    )

    for t in range(n_teams):
        for j in inst.jobs:
            if sol.z[t, :, j].sum() >= 1 and sol.f[t, j] > inst.e_max + tol:
                raise SolutionError(
                    "horizon", f"team {t} job {j} finishes at {sol.f[t, j]} past {inst.e_max}"
                )


def decode_solution(
    model_kind: str,
    inst: Instance,
    result: SolveResult,
    verify: bool = True,
) -> Solution:
    """Round a solver assignment into a Solution and re-verify it.

    Binaries are rounded at 0.5; schedule values are taken as-is. With
    ``verify`` set (the default), a violated constraint family raises
    :class:`SolutionError` naming the family and indices.
    """
    if not result.has_solution:
        raise ValueError(f"cannot decode a result with status {result.status}")
    values = result.values
    n = inst.n_jobs
    n_teams = inst.team_bound

    x = np.zeros((inst.n_employees, n_teams), dtype=int)
    for m in range(inst.n_employees):
        for t in range(n_teams):
            x[m, t] = 1 if values.get(f"x_{m}_{t}", 0.0) > 0.5 else 0
    z = np.zeros((n_teams, n + 1, n + 1), dtype=int)
    for t in range(n_teams):
        for i in inst.nodes:
            for j in inst.nodes:
                if (i, j) != (0, 0) and values.get(f"z_{t}_{i}_{j}", 0.0) > 0.5:
                    z[t, i, j] = 1
    s = np.zeros((n_teams, n + 1))
    f = np.zeros((n_teams, n + 1))
    for t in range(n_teams):
        for j in inst.jobs:
            s[t, j] = values.get(f"s_{t}_{j}", 0.0)
            f[t, j] = values.get(f"f_{t}_{j}", 0.0)

    rho = u = v = None
    if model_kind == "rm1":
        rho = np.zeros((n, n_teams))
        for j in inst.jobs:
            for t in range(n_teams):
                rho[j - 1, t] = values.get(f"rho_{j}_{t}", 0.0)
    elif model_kind == "rm2":
        ks, ls = inst.n_skills, inst.n_levels
        rho = np.zeros((n, ks, ls, n_teams))
        for j in inst.jobs:
            for k in range(ks):
                for l in range(ls):
                    for t in range(n_teams):
                        rho[j - 1, k, l, t] = values.get(f"rho_{j}_{k}_{l}_{t}", 0.0)
        gammas = [
            int(name.rsplit("_", 1)[1])
            for name in values
            if name.startswith("u_0_")
        ]
        gamma = max(gammas) if gammas else 0
        u = np.zeros((n + 1, gamma + 1))
        for j in inst.nodes:
            for g in range(gamma + 1):
                u[j, g] = values.get(f"u_{j}_{g}", 0.0)
        v = np.zeros((n, gamma + 1))
        for j in inst.jobs:
            for g in range(gamma + 1):
                v[j - 1, g] = 1 if values.get(f"v_{j}_{g}", 0.0) > 0.5 else 0

    sol = Solution(
        model_kind=model_kind,
        x=x,
        z=z,
        s=s,
        f=f,
        objective_value=result.objective_value,
        rho=rho,
        u=u,
        v=v,
        solve_meta=result,
    )
    if verify:
        verify_solution(inst, sol)
    return sol


def save_solution(sol: Solution, path: str | Path) -> None:
    """Write a solution as JSON: one block per team with roster and route.

    Robust diagnostics (slacks, dual block) are recomputable and are not
    persisted; loading restores the plan itself.
    """
    teams = []
    routes = sol.routes
    for t in range(sol.n_teams):
        route = list(routes[t])
        teams.append({
            "employees": [int(m) for m in np.flatnonzero(sol.x[:, t])],
            "route": route,
            "start": [float(sol.s[t, j]) for j in route],
            "finish": [float(sol.f[t, j]) for j in route],
        })
    payload = {
        "model": sol.model_kind,
        "objective": sol.objective_value,
        "status": sol.solve_meta.status if sol.solve_meta else None,
        "n_jobs": sol.n_jobs,
        "n_employees": int(sol.x.shape[0]),
        "n_teams": sol.n_teams,
        "teams": teams,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_solution(path: str | Path) -> Solution:
    """Rebuild a Solution from its JSON file (plan only, no diagnostics)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    try:
        n = int(data["n_jobs"])
        n_emp = int(data["n_employees"])
        n_teams = int(data["n_teams"])
        teams = data["teams"]
        model_kind = data["model"]
        objective = float(data["objective"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed solution file ({exc})") from exc
    if len(teams) != n_teams:
        raise ValidationError(f"{path}: expected {n_teams} team blocks, got {len(teams)}")

    x = np.zeros((n_emp, n_teams), dtype=int)
    z = np.zeros((n_teams, n + 1, n + 1), dtype=int)
    s = np.zeros((n_teams, n + 1))
    f = np.zeros((n_teams, n + 1))
    for t, block in enumerate(teams):
        for m in block.get("employees", []):
            if not 0 <= m < n_emp:
                raise ValidationError(f"{path}: team {t} lists unknown employee {m}")
            x[m, t] = 1
        route = block.get("route", [])
        starts = block.get("start", [])
        finishes = block.get("finish", [])
        if len(route) != len(starts) or len(route) != len(finishes):
            raise ValidationError(f"{path}: team {t} route/schedule lengths differ")
        prev = 0
        for idx, j in enumerate(route):
            if not 1 <= j <= n:
                raise ValidationError(f"{path}: team {t} routes unknown job {j}")
            z[t, prev, j] = 1
            s[t, j] = float(starts[idx])
            f[t, j] = float(finishes[idx])
            prev = j
        if route:
            z[t, prev, 0] = 1
    return Solution(
        model_kind=model_kind,
        x=x,
        z=z,
        s=s,
        f=f,
        objective_value=objective,
    )
