"""Acceptance battery: nine end-to-end checks of the planning stack.

Covers solver/oracle agreement, worst-case demand aggregation, adversary
oracle consensus, dual certificates, the simulated benefit and price of
robustness, budget-sweep monotonicity, zero-budget degeneracy, and
decoder verification. Each check prints one PASS/FAIL line to the real
stdout so the verdicts survive output capture.

The heavy solve batteries are cached module-wide and shared between
checks; run this file alone with `pytest tests/test_acceptance.py -v`.
"""

import sys
import time
from functools import lru_cache

import numpy as np
import pytest
from scipy.optimize import linprog

from helpers import zero_uncertainty
from robusteam import (
    Solution,
    StudyConfig,
    UncertaintySpec,
    Weights,
    adversary_bruteforce,
    adversary_dp,
    adversary_milp,
    exhaustive_solve,
    generate_instance,
    generate_uncertainty,
    longest_path_value,
    run_study,
    run_sweep,
    verify_solution,
    worst_case_demand,
)
from robusteam.experiments import solve_and_decode
from robusteam.models import SolutionError

WEIGHTS = Weights()

TINY_SIZES = ((2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4), (4, 2), (4, 3), (4, 4))

# (model kind, budget): per-job deviation cells for rm1, global spend for rm2
SETTINGS = (
    ("dm", None),
    ("rm1", 0),
    ("rm1", 4),
    ("rm2", 0),
    ("rm2", 5),
    ("rm2", 10),
)

FAMILIES = {
    "shape",
    "employee-assignment",
    "team-qualification",
    "depot-departure",
    "job-coverage",
    "flow-balance",
    "travel-time-precedence",
    "processing-time",
    "horizon",
}


@pytest.fixture(name="check")
def _check_fixture(capfd):
    """A reporter that prints its verdict outside capture, then enforces it."""

    def check(num: int, name: str, ok: bool, detail: str) -> None:
        verdict = "PASS" if ok else "FAIL"
        with capfd.disabled():
            print(f"[criterion {num}] {name}: {verdict} ({detail})",
                  file=sys.stdout, flush=True)
        assert ok, f"criterion {num} {name}: {detail}"

    return check


def _with_budgets(unc, gamma_job=None, gamma_global=None):
    return UncertaintySpec(
        r_hat=unc.r_hat,
        costs=unc.costs,
        gamma_job=unc.gamma_job if gamma_job is None else gamma_job,
        gamma_global=unc.gamma_global if gamma_global is None else gamma_global,
    )


@lru_cache(maxsize=1)
def _tiny_battery():
    """20 small instances, each solved and enumerated under every setting."""
    cases = []
    start = time.perf_counter()
    for i in range(20):
        jobs, emps = TINY_SIZES[i % len(TINY_SIZES)]
        inst = generate_instance(jobs, emps, seed=100 + i)
        unc = generate_uncertainty(inst, seed=200 + i, gamma_job=4)
        solves = {}
        for kind, budget in SETTINGS:
            spec = None
            if kind == "rm1":
                spec = _with_budgets(unc, gamma_job=budget)
            elif kind == "rm2":
                spec = _with_budgets(unc, gamma_global=budget)
            sol = solve_and_decode(kind, inst, spec, WEIGHTS, time_limit=540.0)
            value, _ = exhaustive_solve(inst, spec, kind, WEIGHTS)
            solves[(kind, budget)] = (sol, value, spec)
        cases.append((inst, unc, solves))
    return cases, time.perf_counter() - start


def test_criterion_1_oracle_equivalence(check):
    cases, elapsed = _tiny_battery()
    gaps = [
        abs(sol.objective_value - value)
        for _, _, solves in cases
        for sol, value, _ in solves.values()
    ]
    ok = len(gaps) == 120 and max(gaps) < 1e-6 and elapsed < 600.0
    check(1, "solver matches exhaustive oracle", ok,
           f"{len(gaps)} pairs on 20 instances, max gap {max(gaps):.2e}, "
           f"{elapsed:.0f}s")


def _lp_worst_case(requirement, deviation, budget):
    """Reference maximization of the aggregate demand over the budget set."""
    flat = deviation.reshape(-1).astype(float)
    res = linprog(
        -flat,
        A_ub=[np.ones_like(flat)],
        b_ub=[float(budget)],
        bounds=[(0.0, 1.0)] * flat.size,
        method="highs",
    )
    assert res.status == 0, res.message
    return float(requirement.sum()) - res.fun


def test_criterion_2_worst_case_aggregation(check):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(200):
        shape = (int(rng.integers(1, 5)), int(rng.integers(1, 5)))
        requirement = rng.integers(0, 4, shape)
        deviation = rng.integers(0, 5, shape)
        budget = int(rng.integers(0, shape[0] * shape[1] + 1))
        got = worst_case_demand(requirement, deviation, budget)
        err = abs(got - _lp_worst_case(requirement, deviation, budget))
        worst = max(worst, err)

    # benchmark profile: per-skill deviations (2, 1, 1), four cells allowed
    bench = np.array([[2, 1, 1]] * 3)
    got = worst_case_demand(np.zeros((3, 3), int), bench, 4)
    bench_ok = got == 7 and abs(_lp_worst_case(np.zeros((3, 3), int), bench, 4) - 7) < 1e-9

    ok = worst < 1e-9 and bench_ok
    check(2, "worst-case demand equals its LP", ok,
           f"200 random triples, max err {worst:.2e}, "
           f"benchmark increment {got} == 7")


@lru_cache(maxsize=1)
def _adversary_trials():
    """100 solved plans of up to 10 jobs, attacked by all four oracles."""
    rng = np.random.default_rng(42)
    trials = []
    for _ in range(100):
        jobs = int(rng.integers(1, 11))
        emps = int(rng.integers(2, 6))
        inst = generate_instance(jobs, emps, seed=int(rng.integers(10**6)))
        unc = _with_budgets(
            generate_uncertainty(inst, seed=int(rng.integers(10**6))),
            gamma_global=int(rng.integers(0, 41)),
        )
        # any verified incumbent is a valid attack target, so cap the solve
        sol = solve_and_decode("dm", inst, None, WEIGHTS, time_limit=15.0)
        values = (
            adversary_dp(sol, inst, unc, verify=False)[0],
            adversary_bruteforce(sol, inst, unc, verify=False),
            adversary_milp(sol, inst, unc, verify=False),
            longest_path_value(sol, inst, unc, verify=False),
        )
        trials.append((values, sol.n_performed))
    return trials


def test_criterion_3_adversary_agreement(check):
    trials = _adversary_trials()
    agree = sum(1 for values, _ in trials if len(set(values)) == 1)
    attacked = sum(1 for values, z in trials if z > 0 and max(values) > 0)
    ok = agree == 100 and attacked >= 20
    check(3, "four adversary oracles agree", ok,
           f"{agree}/100 exact matches, {attacked} plans with disruptions")


def test_criterion_4_dual_certificate(check):
    cases, _ = _tiny_battery()
    checked, bad = 0, 0
    for inst, _, solves in cases:
        for (kind, _), (sol, _, spec) in solves.items():
            if kind != "rm2":
                continue
            dp_value, _ = adversary_dp(sol, inst, spec, verify=False)
            u_value = float(sol.u[-1, -1])
            if int(round(u_value)) != dp_value or abs(u_value - dp_value) > 1e-6:
                bad += 1
            checked += 1
    ok = checked == 60 and bad == 0
    check(4, "counting table certifies the adversary", ok,
           f"{checked} optima, {bad} mismatches against the DP")


@lru_cache(maxsize=1)
def _service_study():
    """Eight 6x6 instances, all three models, 200 scenarios of each kind."""
    instances = [generate_instance(6, 6, seed=s) for s in range(1, 9)]
    cfg = StudyConfig(
        models=("dm", "rm1", "rm2"),
        weights=WEIGHTS,
        n_scenarios=200,
        uncertainty_seed=0,
        scenario_seed=0,
        gamma_job=4,
        time_limit=1500.0,
    )
    start = time.perf_counter()
    report = run_study(instances, cfg)
    return report, time.perf_counter() - start


def _pooled_ratio(report, kind, model):
    vals = [
        r.ratio
        for r in report.scenario_records
        if r.kind == kind and r.model == model and r.ratio is not None
    ]
    return sum(vals) / len(vals)


def test_criterion_5_benefit_of_robustness(check):
    report, elapsed = _service_study()
    assert all(r.error is None for r in report.solve_records)
    dm = _pooled_ratio(report, "rm1", "dm")
    rm1 = _pooled_ratio(report, "rm1", "rm1")
    gap = rm1 - dm
    ok = gap >= 15.0 and elapsed < 1800.0
    check(5, "robust plans survive cell scenarios", ok,
           f"mean R {rm1:.1f}% (rm1) vs {dm:.1f}% (dm), "
           f"gap {gap:.1f}pp >= 15pp, {elapsed:.0f}s")


def test_criterion_6_price_of_robustness(check):
    report, _ = _service_study()

    def avg_z(model):
        vals = [r.z_count for r in report.solve_records if r.model == model]
        return sum(vals) / len(vals)

    dm, rm1, rm2 = avg_z("dm"), avg_z("rm1"), avg_z("rm2")
    ok = dm >= rm1 and dm >= rm2
    check(6, "nominal plans serve at least as many jobs", ok,
           f"avg Z dm {dm:.2f} >= rm1 {rm1:.2f} and >= rm2 {rm2:.2f}")


def test_criterion_7_sweep_monotonicity(check):
    cases, _ = _tiny_battery()
    picks = [cases[i] for i in (6, 7, 8)]  # the three 4-job instances
    instances = [inst for inst, _, _ in picks]
    uncertainties = [unc for _, unc, _ in picks]

    checked = violations = planned = 0
    grids = {}
    for kind, budget_key in (("rm1", 4), ("rm2", 10)):
        solutions = {
            inst.name: {"dm": solves[("dm", None)][0], kind: solves[(kind, budget_key)][0]}
            for inst, _, solves in picks
        }
        sweep = run_sweep(
            instances, uncertainties, solutions, kind,
            n_scenarios=50, scenario_seed=5,
        )
        grids[kind] = sweep.grid
        per_seed: dict[tuple, dict[int, int]] = {}
        for r in sweep.records:
            per_seed.setdefault((r.instance, r.model, r.scenario_id), {})[r.budget] = r.survived
        for series in per_seed.values():
            values = [series[b] for b in sweep.grid]
            checked += 1
            planned += values[0] > 0
            violations += sum(1 for a, b in zip(values, values[1:]) if b > a)

    ok = (
        violations == 0
        and planned > 0
        and grids["rm1"] == tuple(range(7))
        and grids["rm2"] == tuple(range(0, 16 * 4 + 1, 8))
    )
    check(7, "survivors never rise with the budget", ok,
           f"{checked} per-seed series over grids {list(grids['rm1'])} and "
           f"0..64, {violations} violations")


def test_criterion_8_zero_budget_degeneracy(check):
    cases, _ = _tiny_battery()
    slackless = Weights(mu=0.0)
    worst = 0.0
    for inst, unc, solves in cases:
        dm_value = solves[("dm", None)][0].objective_value
        rm1 = solve_and_decode("rm1", inst, zero_uncertainty(inst), slackless,
                               time_limit=540.0)
        rm2 = solve_and_decode("rm2", inst, _with_budgets(unc, gamma_global=0),
                               slackless, time_limit=540.0)
        worst = max(worst, abs(rm1.objective_value - dm_value),
                    abs(rm2.objective_value - dm_value))
    ok = worst < 1e-6
    check(8, "zero budgets collapse to the nominal model", ok,
           f"20 instances, max objective drift {worst:.2e}")


def _fuzz(rng, inst, sol):
    """Corrupt one solved plan; return the violated family name."""
    x, z = sol.x.copy(), sol.z.copy()
    s, f = sol.s.copy(), sol.f.copy()
    jobs = sorted(sol.performed.items())
    j, t = jobs[int(rng.integers(len(jobs)))]
    op = int(rng.integers(5))
    if op == 0:
        members = np.flatnonzero(x[:, t])
        if members.size and x.shape[1] >= 2:
            x[members[0], (t + 1) % x.shape[1]] = 1  # one employee, two teams
        else:
            op = 2
    if op == 1:
        if inst.requirements[j - 1].max() >= 1:
            x[:, t] = 0  # strip the serving team of all skills
        else:
            op = 2
    if op == 2:
        s[t, j] = -5.0  # start before any travel could finish
    elif op == 3:
        f[t, j] = s[t, j]  # finish with no processing time
    elif op == 4:
        f[t, j] = inst.e_max + 400.0  # finish past the working day
    corrupted = Solution(sol.model_kind, x, z, s, f, sol.objective_value)
    with pytest.raises(SolutionError) as err:
        verify_solution(inst, corrupted)
    return err.value.family


def test_criterion_9_decoder_verification(check):
    cases, _ = _tiny_battery()
    verified = 0
    for inst, _, solves in cases:
        for sol, _, _ in solves.values():
            verify_solution(inst, sol)
            verified += 1

    rng = np.random.default_rng(7)
    candidates = [
        (inst, sol)
        for inst, _, solves in cases
        for sol, _, _ in solves.values()
        if sol.n_performed >= 1
    ]
    families = set()
    for _ in range(20):
        inst, sol = candidates[int(rng.integers(len(candidates)))]
        family = _fuzz(rng, inst, sol)
        assert family in FAMILIES
        families.add(family)

    ok = verified == 120 and len(families) >= 3
    check(9, "every optimum re-verifies, corruptions are named", ok,
           f"{verified}/120 verified, 20 corruptions rejected as "
           f"{sorted(families)}")
