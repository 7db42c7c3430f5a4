"""Exhaustive exact solver for tiny instances.

Ground truth for the model builders that never touches a MILP backend: it
enumerates job subsets, partitions them into team routes, tries every
qualifying employee-set assignment, and evaluates each model's objective in
closed form. Intended for cross-validation only; the size guard keeps the
search space enumerable.

Closed forms used (each mirrors what the corresponding MILP would choose):
schedules run earliest-start, which minimizes every completion time at once
and is therefore optimal under the completion-time penalty; slack variables
sit at their upper gates (team surplus), which is optimal because slack is
rewarded; the disruption count equals a cheapest-first knapsack over the
per-job disruption costs.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .adversary import adversary_dp
from .instance import Instance, UncertaintySpec
from .models import (
    DEFAULT_WEIGHTS,
    Solution,
    Weights,
    verify_solution,
    worst_case_demands,
)

SIZE_LIMIT = 5


def _route_schedule(inst: Instance, order: tuple[int, ...]):
    """Earliest-start schedule along a route; None when the horizon breaks."""
    starts, finishes = [], []
    clock = 0.0
    prev = 0
    for j in order:
        clock += inst.travel[prev, j]
        starts.append(clock)
        clock += inst.processing[j - 1]
        if clock > inst.e_max:
            return None
        finishes.append(clock)
        prev = j
    return starts, finishes


def _best_routes(inst: Instance) -> dict[frozenset, tuple]:
    """Per job set: the feasible visiting order with minimal total finish."""
    best: dict[frozenset, tuple] = {}
    jobs = list(inst.jobs)
    for size in range(1, len(jobs) + 1):
        for subset in itertools.combinations(jobs, size):
            candidate = None
            for order in itertools.permutations(subset):
                sched = _route_schedule(inst, order)
                if sched is None:
                    continue
                key = (sum(sched[1]), order)
                if candidate is None or key < candidate[0]:
                    candidate = (key, order, sched[0], sched[1])
            if candidate is not None:
                best[frozenset(subset)] = candidate[1:]
    return best


def _partitions(pool: frozenset, max_groups: int):
    """Canonical set partitions: each group is led by its smallest member."""
    if not pool:
        yield ()
        return
    if max_groups == 0:
        return
    leader = min(pool)
    others = sorted(pool - {leader})
    for r in range(len(others) + 1):
        for combo in itertools.combinations(others, r):
            group = frozenset((leader, *combo))
            for rest in _partitions(pool - group, max_groups - 1):
                yield (group,) + rest


def _assignments(candidates: list[list[int]], avail: int, chosen: tuple[int, ...]):
    """All ways to give each group a disjoint employee mask from its list."""
    if not candidates:
        yield chosen
        return
    for mask in candidates[0]:
        if mask & avail == mask:
            yield from _assignments(candidates[1:], avail & ~mask, chosen + (mask,))


def _knapsack_count(costs: list[int], budget: int) -> int:
    """Max number of items with total cost within budget (cheapest first)."""
    spent = count = 0
    for cost in sorted(costs):
        if spent + cost > budget:
            break
        spent += cost
        count += 1
    return count


def exhaustive_solve(
    inst: Instance,
    unc: UncertaintySpec | None,
    model_kind: str,
    weights: Weights | None = None,
) -> tuple[float, Solution]:
    """Enumerate every plan and return the exact optimum for a model kind.

    Requires at most 5 jobs and 5 employees and strictly positive
    processing times (zero-duration jobs would admit degenerate plans the
    enumeration does not cover).
    """
    if inst.n_jobs > SIZE_LIMIT or inst.n_employees > SIZE_LIMIT:
        raise ValueError(
            f"exhaustive search is limited to {SIZE_LIMIT} jobs/employees, "
            f"got {inst.n_jobs}x{inst.n_employees}"
        )
    if (inst.processing <= 0).any():
        raise ValueError("exhaustive search requires positive processing times")
    if model_kind not in ("dm", "rm1", "rm2"):
        raise ValueError(f"unknown model kind: {model_kind}")
    if model_kind in ("rm1", "rm2") and unc is None:
        raise ValueError(f"model {model_kind} requires an uncertainty spec")
    weights = weights or DEFAULT_WEIGHTS

    n, n_emp = inst.n_jobs, inst.n_employees
    n_teams = inst.team_bound
    routes = _best_routes(inst)

    # per employee-mask qualification tensors and totals
    teamq = np.zeros((1 << n_emp, inst.n_skills, inst.n_levels), dtype=int)
    for mask in range(1, 1 << n_emp):
        low = mask & -mask
        teamq[mask] = teamq[mask ^ low] + inst.qualifications[low.bit_length() - 1]
    totals = teamq.sum(axis=(1, 2))

    rbar = worst_case_demands(inst, unc) if model_kind == "rm1" else None
    sum_req = inst.requirements.sum(axis=(1, 2))
    if model_kind == "rm2":
        gamma = unc.gamma_global
        cost_jm = np.zeros((n, 1 << n_emp), dtype=int)
        for j in inst.jobs:
            raises = (teamq - inst.requirements[j - 1] + 1) * unc.costs[j - 1]
            cost_jm[j - 1] = np.maximum(0, raises.reshape(1 << n_emp, -1).min(axis=1))

    def covering_masks(group: frozenset) -> list[int]:
        need = inst.requirements[[j - 1 for j in group]].max(axis=0)
        ok = (teamq >= need).all(axis=(1, 2))
        if model_kind == "rm1":
            ok &= totals >= max(rbar[j - 1] for j in group)
        return [m for m in range(1 << n_emp) if ok[m]]

    best_value = -math.inf
    best_plan = None

    for job_mask in range(1 << n):
        subset = frozenset(j for j in inst.jobs if job_mask >> (j - 1) & 1)
        for partition in _partitions(subset, n_teams):
            if any(g not in routes for g in partition):
                continue
            total_finish = sum(sum(routes[g][2]) for g in partition)
            base = weights.alpha * len(subset) - weights.beta * total_finish
            candidates = [covering_masks(g) for g in partition]
            if any(not c for c in candidates):
                continue
            for masks in _assignments(candidates, (1 << n_emp) - 1, ()):
                value = base
                if model_kind == "rm1":
                    value += weights.mu * sum(
                        len(g) * totals[m] - sum(rbar[j - 1] for j in g)
                        for g, m in zip(partition, masks)
                    )
                elif model_kind == "rm2":
                    value += weights.mu * sum(
                        len(g) * totals[m] - sum(sum_req[j - 1] for j in g)
                        for g, m in zip(partition, masks)
                    )
                    costs = [
                        int(cost_jm[j - 1, m])
                        for g, m in zip(partition, masks)
                        for j in g
                    ]
                    value -= weights.nu * _knapsack_count(costs, gamma)
                if value > best_value:
                    best_value = float(value)
                    best_plan = (partition, masks)
                if model_kind == "dm":
                    break  # employee choice does not move the dm objective

    partition, masks = best_plan
    x = np.zeros((n_emp, n_teams), dtype=int)
    z = np.zeros((n_teams, n + 1, n + 1), dtype=int)
    s = np.zeros((n_teams, n + 1))
    f = np.zeros((n_teams, n + 1))
    for t, (group, mask) in enumerate(zip(partition, masks)):
        for m in range(n_emp):
            if mask >> m & 1:
                x[m, t] = 1
        order, starts, finishes = routes[group]
        prev = 0
        for idx, j in enumerate(order):
            z[t, prev, j] = 1
            s[t, j] = starts[idx]
            f[t, j] = finishes[idx]
            prev = j
        z[t, prev, 0] = 1

    rho = u = v = None
    if model_kind == "rm1":
        rho = np.zeros((n, n_teams))
        for t, (group, mask) in enumerate(zip(partition, masks)):
            for j in group:
                rho[j - 1, t] = totals[mask] - rbar[j - 1]
    elif model_kind == "rm2":
        rho = np.zeros((n, inst.n_skills, inst.n_levels, n_teams))
        for t, (group, mask) in enumerate(zip(partition, masks)):
            for j in group:
                rho[j - 1, :, :, t] = teamq[mask] - inst.requirements[j - 1]

    sol = Solution(
        model_kind=model_kind,
        x=x,
        z=z,
        s=s,
        f=f,
        objective_value=best_value,
        rho=rho,
    )
    if model_kind == "rm2":
        _, table = adversary_dp(sol, inst, unc, verify=False)
        v = np.zeros((n, gamma + 1))
        for t, (group, mask) in enumerate(zip(partition, masks)):
            for j in group:
                cost = int(cost_jm[j - 1, mask])
                v[j - 1, cost:] = 1
        sol = Solution(
            model_kind=model_kind,
            x=x,
            z=z,
            s=s,
            f=f,
            objective_value=best_value,
            rho=rho,
            u=table,
            v=v,
        )
    verify_solution(inst, sol)
    return best_value, sol
