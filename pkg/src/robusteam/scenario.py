"""Demand-deviation scenarios and plan survival under them.

Two scenario families mirror the two robust models:

* cell-count scenarios (``gen_scenario_rm1``): every job independently has
  a fixed number of requirement cells pushed to their maximal deviation;
* budget-spend scenarios (``gen_scenario_rm2``): a global budget is spent
  one unit-increase at a time over the jobs in a random cyclic order.

A planned job survives a scenario when its serving team still covers every
realized requirement cell. Jobs are evaluated independently: skipping an
infeasible job only shortens the route, so the rest of the schedule stays
valid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import Instance, UncertaintySpec, _freeze
from .models import Solution

# hard cap on generator iterations; unreachable for sane inputs, exists only
# so a pathological draw stream cannot spin forever
_MAX_DRAW_FACTOR = 1000


@dataclass(frozen=True, eq=False)
class Scenario:
    """One realized requirement tensor.

    ``budget_used`` is the per-job deviated-cell count for cell-count
    scenarios and the total cost spent for budget-spend scenarios.
    """

    realized: np.ndarray  # (n_jobs, n_skills, n_levels) int
    kind: str             # "rm1" | "rm2"
    budget_used: np.ndarray | int
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "realized", _freeze(np.asarray(self.realized, dtype=int)))


def gen_scenario_rm1(
    inst: Instance, unc: UncertaintySpec, budget: int, seed: int
) -> Scenario:
    """Deviate ``budget`` uniformly chosen cells per job by their full r_hat.

    Each job draws its own cell permutation, and the first ``budget`` cells
    deviate. Because the permutation depends only on the seed, scenarios
    with the same seed nest: a larger budget deviates a superset of cells.
    """
    cells = inst.n_skills * inst.n_levels
    if not 0 <= budget <= cells:
        raise ValueError(f"budget must lie in [0, {cells}], got {budget}")
    rng = np.random.default_rng(seed)
    realized = inst.requirements.copy()
    for j in range(inst.n_jobs):
        chosen = rng.permutation(cells)[:budget]
        flat_hat = unc.r_hat[j].ravel()
        realized[j].ravel()[chosen] += flat_hat[chosen]
    return Scenario(
        realized=realized,
        kind="rm1",
        budget_used=np.full(inst.n_jobs, budget, dtype=int),
        seed=seed,
    )


def _move_stream(inst: Instance, rng: np.random.Generator):
    """Endless (job, skill, level) draws: random cyclic job order, uniform cell."""
    order = rng.permutation(inst.n_jobs) + 1
    while True:
        for j in order:
            k = int(rng.integers(inst.n_skills))
            l = int(rng.integers(inst.n_levels))
            yield int(j), k, l


def gen_scenario_rm2(
    inst: Instance,
    unc: UncertaintySpec,
    budget: int,
    seed: int,
    nested: bool = False,
    cap_rhat: bool = False,
) -> Scenario:
    """Spend a global budget on unit requirement increases.

    Jobs are visited in a seed-determined cyclic order; each visit draws one
    cell and increases it by one if its cost fits the remaining budget.
    Unaffordable draws are skipped and the cycle continues until no cell is
    affordable at all. ``cap_rhat`` limits each cell to r + r_hat (off by
    default: the spending adversary has no per-cell cap).

    ``nested`` switches to prefix spending: the same draw stream is walked
    but the process stops at the first unaffordable draw. Affordability
    then never depends on luck further down the stream, so for a fixed seed
    the realized tensor is elementwise nondecreasing in the budget, which is
    the property the budget sweeps rely on.
    """
    if budget < 0:
        raise ValueError(f"budget must be nonnegative, got {budget}")
    rng = np.random.default_rng(seed)
    realized = inst.requirements.copy()
    cap = inst.requirements + unc.r_hat
    remaining = int(budget)
    spent = 0
    stream = _move_stream(inst, rng)
    max_draws = _MAX_DRAW_FACTOR * (budget + inst.n_jobs * inst.n_skills * inst.n_levels)

    for _ in range(max_draws):
        if remaining <= 0:
            break
        if cap_rhat:
            open_cells = realized < cap
            if not open_cells.any() or remaining < unc.costs[open_cells].min():
                break
        elif remaining < unc.costs.min():
            break
        j, k, l = next(stream)
        if cap_rhat and realized[j - 1, k, l] >= cap[j - 1, k, l]:
            continue
        cost = int(unc.costs[j - 1, k, l])
        if cost <= remaining:
            realized[j - 1, k, l] += 1
            remaining -= cost
            spent += cost
        elif nested:
            break
    else:
        raise RuntimeError("scenario generation did not terminate")

    return Scenario(realized=realized, kind="rm2", budget_used=spent, seed=seed)


def evaluate_scenario(
    sol: Solution, scen: Scenario, inst: Instance
) -> tuple[int, dict[int, bool]]:
    """Count planned jobs whose team still covers every realized cell.

    Expects a solution already verified against nominal data. Returns the
    survivor count and a per-job flag map over the performed jobs.
    """
    teamq = sol.team_qualifications(inst)
    flags: dict[int, bool] = {}
    for j, t in sol.performed.items():
        flags[j] = bool((teamq[t] >= scen.realized[j - 1]).all())
    return sum(flags.values()), flags
