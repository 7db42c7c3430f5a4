"""Adversarial analysis of a fixed plan: how many jobs can a budget break?

Given a decoded solution, the adversary may raise requirement cells, paying
``costs[j][k][l]`` per unit raised, under a global budget. A performed job
is disrupted once any cell exceeds its serving team's qualification count,
so the cheapest way to break job j costs ``min_{k,l} (buffer+1)*cost``.

Four independent implementations of the same quantity live here: a dynamic
program, exhaustive subset enumeration, an integer program, and a
longest-path relaxation. They are kept deliberately separate so they can
validate each other and the counting model's dual block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import milp
from .instance import Instance, UncertaintySpec
from .models import Solution, verify_solution

BRUTEFORCE_JOB_LIMIT = 20


@dataclass(frozen=True)
class BufferTable:
    """Per-performed-job surplus and cheapest disruption cost.

    ``buffers[j]`` is the (skills, levels) surplus of job j's serving team
    over the nominal requirement; ``disruption_cost[j]`` is the cheapest
    total price for raising some cell past the team's count, clamped at 0:
    a requirement that is already unmet needs no budget to stay unmet.
    """

    buffers: dict[int, np.ndarray]
    disruption_cost: dict[int, int]

    @property
    def performed_jobs(self) -> tuple[int, ...]:
        return tuple(sorted(self.disruption_cost))


def compute_buffers(sol: Solution, inst: Instance, unc: UncertaintySpec) -> BufferTable:
    """Buffers and min disruption costs for every performed job."""
    teamq = sol.team_qualifications(inst)
    buffers: dict[int, np.ndarray] = {}
    cost: dict[int, int] = {}
    for j, t in sol.performed.items():
        b = teamq[t] - inst.requirements[j - 1]
        buffers[j] = b
        cost[j] = max(0, int(((b + 1) * unc.costs[j - 1]).min()))
    return BufferTable(buffers=buffers, disruption_cost=cost)


def _check(sol: Solution, inst: Instance, verify: bool) -> None:
    if verify:
        verify_solution(inst, sol)


def adversary_dp(
    sol: Solution, inst: Instance, unc: UncertaintySpec, verify: bool = True
) -> tuple[int, np.ndarray]:
    """Max disruptable jobs by budget, via the table T[j][g].

    T[j][g] is the best count using only jobs 1..j with budget g; row 0 is
    zero and each later row either skips job j or pays its cheapest
    disruption cost. Returns (T[n][gamma], full table).
    """
    _check(sol, inst, verify)
    n = inst.n_jobs
    gamma = unc.gamma_global
    table = compute_buffers(sol, inst, unc)
    t = np.zeros((n + 1, gamma + 1), dtype=int)
    for j in range(1, n + 1):
        t[j] = t[j - 1]
        cost = table.disruption_cost.get(j)
        if cost is None or cost > gamma:
            continue
        taken = 1 + t[j - 1, : gamma - cost + 1]
        t[j, cost:] = np.maximum(t[j - 1, cost:], taken)
    return int(t[n, gamma]), t


def adversary_bruteforce(
    sol: Solution, inst: Instance, unc: UncertaintySpec, verify: bool = True
) -> int:
    """Max disruptable jobs by enumerating every subset of performed jobs."""
    _check(sol, inst, verify)
    table = compute_buffers(sol, inst, unc)
    costs = [table.disruption_cost[j] for j in table.performed_jobs]
    if len(costs) > BRUTEFORCE_JOB_LIMIT:
        raise ValueError(
            f"brute force is limited to {BRUTEFORCE_JOB_LIMIT} performed jobs, got {len(costs)}"
        )
    gamma = unc.gamma_global
    best = 0
    for mask in range(1 << len(costs)):
        spent = count = 0
        for idx, cost in enumerate(costs):
            if mask >> idx & 1:
                spent += cost
                count += 1
        if spent <= gamma and count > best:
            best = count
    return best


def adversary_milp(
    sol: Solution, inst: Instance, unc: UncertaintySpec, verify: bool = True
) -> int:
    """Max disruptable jobs via the budget-constrained integer program.

    One binary per job marks disruption, linked to per-cell raise choices
    priced at (buffer+1)*cost; only performed jobs score. Cell prices are
    clamped at zero like the table costs.
    """
    _check(sol, inst, verify)
    table = compute_buffers(sol, inst, unc)
    model = milp.MilpModel(name="adversary")
    for j in inst.jobs:
        model.add_var(f"zeta_{j}", milp.BINARY)
    for j in inst.jobs:
        for k in range(inst.n_skills):
            for l in range(inst.n_levels):
                model.add_var(f"zeta_{j}_{k}_{l}", milp.BINARY)
    for j in inst.jobs:
        terms = [(1.0, f"zeta_{j}")]
        terms += [
            (-1.0, f"zeta_{j}_{k}_{l}")
            for k in range(inst.n_skills)
            for l in range(inst.n_levels)
        ]
        model.add_constraint(f"link_{j}", terms, "<=", 0.0)
    budget_terms = []
    for j in table.performed_jobs:
        prices = np.maximum(0, (table.buffers[j] + 1) * unc.costs[j - 1])
        for k in range(inst.n_skills):
            for l in range(inst.n_levels):
                budget_terms.append((float(prices[k, l]), f"zeta_{j}_{k}_{l}"))
    if budget_terms:
        model.add_constraint("budget", budget_terms, "<=", float(unc.gamma_global))
    model.set_objective(
        [(1.0, f"zeta_{j}") for j in table.performed_jobs], "maximize"
    )
    result = milp.solve(model)
    return int(round(result.objective_value))


def longest_path_value(
    sol: Solution, inst: Instance, unc: UncertaintySpec, verify: bool = True
) -> int:
    """Max disruptable jobs as a longest path over (job, spent budget) nodes.

    Arcs go from (j, g) to (j', g') with j' > j and g' >= g; an arc scores 1
    when job j' is performed and the budget step g'-g pays its cheapest
    disruption. Values propagate in topological (index) order from (0, 0).
    """
    _check(sol, inst, verify)
    n = inst.n_jobs
    gamma = unc.gamma_global
    table = compute_buffers(sol, inst, unc)
    neg = -1  # unreachable marker; all reachable values are >= 0
    value = np.full((n + 1, gamma + 1), neg, dtype=int)
    value[0, 0] = 0
    for jp in range(1, n + 1):
        cost = table.disruption_cost.get(jp)
        for gp in range(gamma + 1):
            best = neg
            for j in range(jp):
                for g in range(gp + 1):
                    if value[j, g] == neg:
                        continue
                    reward = 1 if cost is not None and cost <= gp - g else 0
                    if value[j, g] + reward > best:
                        best = value[j, g] + reward
            value[jp, gp] = best
    final = value[n, gamma]
    return int(final) if final != neg else 0
