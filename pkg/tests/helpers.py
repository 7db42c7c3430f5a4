"""Shared builders for hand-sized fixtures used across the test modules."""

from __future__ import annotations

import numpy as np

from robusteam import (
    Instance,
    UncertaintySpec,
    Weights,
    build_model,
    decode_solution,
    generate_instance,
    generate_uncertainty,
    solve,
)


def single_job_instance(
    travel: float = 10.0,
    processing: float = 20.0,
    requirement: int = 1,
    n_employees: int = 1,
    e_max: float = 540.0,
) -> Instance:
    """One job, one skill/level cell, every employee qualified."""
    return Instance(
        travel=[[0.0, travel], [travel, 0.0]],
        processing=[processing],
        requirements=[[[requirement]]],
        qualifications=[[[1]]] * n_employees,
        e_max=e_max,
        name="single-job",
    )


def two_job_instance(costs: tuple[int, int] = (3, 5)) -> tuple[Instance, UncertaintySpec]:
    """Two unit-requirement jobs with given disruption costs, two employees."""
    inst = Instance(
        travel=[[0, 10, 10], [10, 0, 10], [10, 10, 0]],
        processing=[20.0, 20.0],
        requirements=[[[1]], [[1]]],
        qualifications=[[[1]], [[1]]],
        e_max=540.0,
        name="two-job",
    )
    unc = UncertaintySpec(
        r_hat=[[[1]], [[1]]],
        costs=[[[costs[0]]], [[costs[1]]]],
        gamma_job=1,
        gamma_global=0,
    )
    return inst, unc


def random_pair(seed: int, n_jobs: int, n_employees: int, gamma_job: int = 4,
                gamma_global: int | None = None) -> tuple[Instance, UncertaintySpec]:
    inst = generate_instance(n_jobs, n_employees, seed=seed)
    unc = generate_uncertainty(inst, seed=seed + 1, gamma_job=gamma_job,
                               gamma_global=gamma_global)
    return inst, unc


def solve_kind(kind: str, inst: Instance, unc: UncertaintySpec | None = None,
               weights: Weights | None = None, time_limit: float = 120.0, **kw):
    """Build, solve, and decode; returns (SolveResult, Solution)."""
    model = build_model(kind, inst, unc, weights, **kw)
    result = solve(model, time_limit_seconds=time_limit)
    return result, decode_solution(kind, inst, result)


def family_counts(model) -> dict[str, int]:
    """Constraint counts keyed by name prefix (text before the first '_')."""
    counts: dict[str, int] = {}
    for con in model.constraints:
        prefix = con.name.split("_", 1)[0]
        counts[prefix] = counts.get(prefix, 0) + 1
    return counts


def zero_uncertainty(inst: Instance, gamma_job: int = 0,
                     gamma_global: int = 0) -> UncertaintySpec:
    """No deviations at all; costs filled with 1 to satisfy validation."""
    shape = inst.requirements.shape
    return UncertaintySpec(
        r_hat=np.zeros(shape, dtype=int),
        costs=np.ones(shape, dtype=int),
        gamma_job=gamma_job,
        gamma_global=gamma_global,
    )
