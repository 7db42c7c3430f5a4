"""Command-line interface.

One binary, eight subcommands: generate, build, solve, oracle, adversary,
simulate, study, sweep. All randomness is seed-controlled and outputs are
deterministic for fixed inputs; timing diagnostics go to stderr so stdout
and files stay byte-stable across reruns.

Option precedence: command-line flags, then the --config JSON file, then
environment variables (ROBUSTEAM_SOLVER_CMD, ROBUSTEAM_THREADS), then
built-in defaults.

Exit codes: 0 success, 2 usage error, 3 invalid input data, 4 solver
backend failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import adversary as adversary_mod
from . import experiments, figures, milp
from .instance import (
    Instance,
    UncertaintySpec,
    ValidationError,
    generate_instance,
    generate_uncertainty,
    load_instance,
    load_uncertainty,
    save_instance,
    save_uncertainty,
)
from .models import (
    Weights,
    build_model,
    decode_solution,
    load_solution,
    save_solution,
    verify_solution,
)
from .oracle import exhaustive_solve
from .scenario import evaluate_scenario, gen_scenario_rm1, gen_scenario_rm2

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_SOLVER = 4


@dataclass
class RunConfig:
    """Resolved run options; defaults match the benchmark configuration."""

    alpha: float = 1.0
    beta: float = 0.0001
    mu: float = 0.01
    nu: float = 0.99
    gamma_job: int = 4
    gamma_global: int | None = None  # None: 2 * n_jobs at the point of use
    time_limit: float = 3600.0
    seed: int = 0
    solver_cmd: str | None = None
    threads: int = 1

    @property
    def weights(self) -> Weights:
        return Weights(alpha=self.alpha, beta=self.beta, mu=self.mu, nu=self.nu)


_ENV_KEYS = {"solver_cmd": milp.SOLVER_CMD_ENV, "threads": "ROBUSTEAM_THREADS"}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags, config file, environment, and defaults, in that order."""
    file_cfg: dict = {}
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"{config_path}: cannot read config ({exc})") from exc
        if not isinstance(file_cfg, dict):
            raise ValidationError(f"{config_path}: config must be a JSON object")

    cfg = RunConfig()
    known = {f.name: f.type for f in fields(RunConfig)}
    for key in file_cfg:
        if key not in known:
            raise ValidationError(f"{config_path}: unknown config key '{key}'")
    for name in known:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            setattr(cfg, name, flag_value)
        elif name in file_cfg:
            setattr(cfg, name, file_cfg[name])
        elif name in _ENV_KEYS and os.environ.get(_ENV_KEYS[name]):
            raw = os.environ[_ENV_KEYS[name]]
            setattr(cfg, name, int(raw) if name == "threads" else raw)
    return cfg


def _print_json(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _load_pair(args, need_uncertainty: bool) -> tuple[Instance, UncertaintySpec | None]:
    inst = load_instance(args.instance)
    unc = None
    if getattr(args, "uncertainty", None):
        unc = load_uncertainty(args.uncertainty)
        if unc.r_hat.shape != inst.requirements.shape:
            raise ValidationError(
                f"uncertainty shape {unc.r_hat.shape} does not match "
                f"instance {inst.requirements.shape}"
            )
    elif need_uncertainty:
        raise ValidationError(f"model {args.model} requires --uncertainty")
    return inst, unc


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    inst = generate_instance(args.jobs, args.employees, cfg.seed)
    save_instance(inst, args.out)
    payload = {"instance": str(args.out), "jobs": args.jobs, "employees": args.employees}
    if args.uncertainty_out:
        unc = generate_uncertainty(
            inst,
            seed=cfg.seed,
            gamma_job=cfg.gamma_job,
            gamma_global=cfg.gamma_global,
        )
        save_uncertainty(unc, args.uncertainty_out)
        payload["uncertainty"] = str(args.uncertainty_out)
    _print_json(payload)
    return EXIT_OK


def cmd_build(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    inst, unc = _load_pair(args, need_uncertainty=args.model in ("rm1", "rm2"))
    model = build_model(args.model, inst, unc, cfg.weights, args.prune_arcs)
    milp.emit_lp_file(model, args.out)
    _print_json({
        "model": args.model,
        "variables": len(model.variables),
        "constraints": len(model.constraints),
        "out": str(args.out),
    })
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    inst, unc = _load_pair(args, need_uncertainty=args.model in ("rm1", "rm2"))
    model = build_model(args.model, inst, unc, cfg.weights, args.prune_arcs)
    result = milp.solve(model, time_limit_seconds=cfg.time_limit, solver_cmd=cfg.solver_cmd)
    _note(f"solved in {result.runtime_seconds:.2f}s")
    if not result.has_solution:
        raise milp.SolverError(f"solver returned {result.status}")
    sol = decode_solution(args.model, inst, result, verify=True)
    if args.out:
        save_solution(sol, args.out)
    _print_json({
        "model": args.model,
        "status": result.status,
        "objective": result.objective_value,
        "gap": result.gap,
        "performed": sol.n_performed,
        "routes": [list(r) for r in sol.routes],
        "out": str(args.out) if args.out else None,
    })
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    inst, unc = _load_pair(args, need_uncertainty=args.model in ("rm1", "rm2"))
    value, sol = exhaustive_solve(inst, unc, args.model, cfg.weights)
    _print_json({
        "model": args.model,
        "objective": value,
        "performed": sol.n_performed,
        "routes": [list(r) for r in sol.routes],
    })
    return EXIT_OK


def cmd_adversary(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    unc = load_uncertainty(args.uncertainty)
    if args.gamma is not None:
        unc = UncertaintySpec(
            r_hat=unc.r_hat,
            costs=unc.costs,
            gamma_job=unc.gamma_job,
            gamma_global=args.gamma,
        )
    sol = load_solution(args.solution)
    verify_solution(inst, sol)
    table = adversary_mod.compute_buffers(sol, inst, unc)
    if args.oracle == "dp":
        value, _ = adversary_mod.adversary_dp(sol, inst, unc, verify=False)
    elif args.oracle == "brute":
        value = adversary_mod.adversary_bruteforce(sol, inst, unc, verify=False)
    elif args.oracle == "milp":
        value = adversary_mod.adversary_milp(sol, inst, unc, verify=False)
    else:
        value = adversary_mod.longest_path_value(sol, inst, unc, verify=False)
    _print_json({
        "oracle": args.oracle,
        "gamma": unc.gamma_global,
        "disruptable": value,
        "disruption_cost": {str(j): c for j, c in sorted(table.disruption_cost.items())},
    })
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    inst = load_instance(args.instance)
    unc = load_uncertainty(args.uncertainty)
    sol = load_solution(args.solution)
    verify_solution(inst, sol)
    budget = args.budget
    if budget is None:
        budget = 3 if args.kind == "rm1" else 10 * inst.n_jobs
    records = []
    z = sol.n_performed
    for sid in range(args.n):
        seed = experiments.derive_seed(cfg.seed, sid)
        if args.kind == "rm1":
            scen = gen_scenario_rm1(inst, unc, budget, seed)
        else:
            scen = gen_scenario_rm2(
                inst, unc, budget, seed, nested=args.nested, cap_rhat=args.cap_rhat
            )
        survived, _ = evaluate_scenario(sol, scen, inst)
        records.append(experiments.ScenarioRecord(
            kind=args.kind,
            instance=inst.name,
            scenario_id=sid,
            seed=seed,
            model=sol.model_kind,
            survived=survived,
            ratio=100.0 * survived / z if z else None,
        ))
    experiments.write_simulation_csv(records, args.out)
    ratios = [r.ratio for r in records if r.ratio is not None]
    _print_json({
        "kind": args.kind,
        "budget": budget,
        "scenarios": args.n,
        "planned": z,
        "mean_A": sum(r.survived for r in records) / len(records) if records else None,
        "mean_R": sum(ratios) / len(ratios) if ratios else None,
        "out": str(args.out),
    })
    return EXIT_OK


def _load_instance_dir(path: str) -> list[Instance]:
    files = sorted(Path(path).glob("*.json"))
    if not files:
        raise ValidationError(f"{path}: no instance files (*.json) found")
    return [load_instance(f) for f in files]


def cmd_study(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    instances = _load_instance_dir(args.instances)
    models = tuple(args.models.split(","))
    study_cfg = experiments.StudyConfig(
        models=models,
        weights=cfg.weights,
        uncertainty_seed=cfg.seed,
        gamma_job=cfg.gamma_job,
        n_scenarios=args.n_scenarios,
        scenario_seed=cfg.seed,
        time_limit=cfg.time_limit,
        solver_cmd=cfg.solver_cmd,
        prune_arcs=args.prune_arcs,
        threads=cfg.threads,
    )
    report = experiments.run_study(instances, study_cfg)
    solve_summary = report.solve_summary()
    for block in solve_summary.values():
        # measured runtimes go to the CSV/JSON artifacts; stdout stays
        # byte-stable across reruns
        block.pop("CPU", None)
    payload = {
        "instances": len(instances),
        "models": list(models),
        "solve_summary": solve_summary,
        "simulation_summary": report.simulation_summary(),
    }
    if args.csv_dir:
        # create the artifact directory before the report write so the
        # report can live inside it
        Path(args.csv_dir).mkdir(parents=True, exist_ok=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")
        payload["out"] = str(args.out)
    if args.csv_dir:
        csv_dir = Path(args.csv_dir)
        experiments.write_solve_csv(report.solve_records, csv_dir / "solve_metrics.csv")
        experiments.write_scenario_csv(report.scenario_records, csv_dir / "scenarios.csv")
        payload["csv"] = [str(csv_dir / "solve_metrics.csv"), str(csv_dir / "scenarios.csv")]
        if not args.no_figures:
            fig = figures.plot_study(report, csv_dir / "study_survival.png")
            payload["figures"] = [str(fig)]
    _print_json(payload)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    instances = _load_instance_dir(args.instances)
    models = tuple(args.models.split(",")) if args.models else ("dm", args.kind)
    grid = _parse_grid(args.grid) if args.grid else None

    uncertainties = []
    solutions: dict[str, dict[str, object]] = {}
    for idx, inst in enumerate(instances):
        unc = generate_uncertainty(
            inst,
            seed=experiments.derive_seed(cfg.seed, idx),
            gamma_job=cfg.gamma_job,
            gamma_global=cfg.gamma_global,
        )
        uncertainties.append(unc)
        inst_sols = {}
        for kind in models:
            _note(f"solving {kind} on {inst.name}")
            inst_sols[kind] = experiments.solve_and_decode(
                kind,
                inst,
                unc,
                cfg.weights,
                time_limit=cfg.time_limit,
                solver_cmd=cfg.solver_cmd,
                prune_arcs=args.prune_arcs,
            )
        solutions[inst.name] = inst_sols

    sweep = experiments.run_sweep(
        instances,
        uncertainties,
        solutions,
        kind=args.kind,
        grid=grid,
        n_scenarios=args.n_scenarios,
        scenario_seed=cfg.seed,
        cap_rhat=args.cap_rhat,
    )
    experiments.write_sweep_csv(sweep, args.out)
    payload = {
        "kind": sweep.kind,
        "grid": list(sweep.grid),
        "models": list(sweep.models),
        "series": {m: list(v) for m, v in sweep.series().items()},
        "out": str(args.out),
    }
    if not args.no_figures:
        fig_path = Path(args.out).with_suffix(".png")
        figures.plot_sweep(sweep, fig_path)
        payload["figures"] = [str(fig_path)]
    _print_json(payload)
    return EXIT_OK


def _parse_grid(text: str) -> tuple[int, ...]:
    """Grid syntax: comma list '0,2,4' or inclusive range '0..6[:step]'."""
    text = text.strip()
    if ".." in text:
        lo, _, rest = text.partition("..")
        hi, _, step = rest.partition(":")
        try:
            return tuple(range(int(lo), int(hi) + 1, int(step) if step else 1))
        except ValueError as exc:
            raise ValidationError(f"bad grid '{text}': {exc}") from exc
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"bad grid '{text}': {exc}") from exc


def _add_common(parser: argparse.ArgumentParser, weights: bool = True) -> None:
    parser.add_argument("--config", help="JSON config file with run options")
    parser.add_argument("--seed", type=int, help="base random seed (default 0)")
    if weights:
        parser.add_argument("--alpha", type=float, help="reward per performed job")
        parser.add_argument("--beta", type=float, help="penalty per completion minute")
        parser.add_argument("--mu", type=float, help="reward per unit of slack")
        parser.add_argument("--nu", type=float, help="penalty per disruptable job")


def _add_solver(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--time-limit", type=float, dest="time_limit",
                        help="solver time limit in seconds (default 3600)")
    parser.add_argument("--solver-cmd", dest="solver_cmd",
                        help="external solver command (default: built-in backend)")
    parser.add_argument("--threads", type=int, help="parallel workers (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robusteam",
        description="Route and schedule multi-skilled teams under demand uncertainty.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a random instance (and uncertainty)")
    p.add_argument("--jobs", type=int, required=True)
    p.add_argument("--employees", type=int, required=True)
    p.add_argument("--out", required=True, help="instance JSON path")
    p.add_argument("--uncertainty-out", dest="uncertainty_out",
                   help="also write an uncertainty JSON here")
    p.add_argument("--gamma-job", type=int, dest="gamma_job",
                   help="per-job deviation-cell budget (default 4)")
    p.add_argument("--gamma-global", type=int, dest="gamma_global",
                   help="global adversary budget (default 2x jobs)")
    _add_common(p, weights=False)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("build", help="write a model as an LP file")
    p.add_argument("--model", choices=("dm", "rm1", "rm2"), required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--uncertainty")
    p.add_argument("--out", required=True, help="LP file path")
    p.add_argument("--prune-arcs", action="store_true", dest="prune_arcs",
                   help="use consecutive-pair chain rows in the counting model")
    _add_common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="solve a model and decode the plan")
    p.add_argument("--model", choices=("dm", "rm1", "rm2"), required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--uncertainty")
    p.add_argument("--out", help="write the decoded solution JSON here")
    p.add_argument("--prune-arcs", action="store_true", dest="prune_arcs")
    _add_common(p)
    _add_solver(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exact enumeration on a tiny instance")
    p.add_argument("--model", choices=("dm", "rm1", "rm2"), required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--uncertainty")
    _add_common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("adversary", help="disruption analysis of a solution")
    p.add_argument("--solution", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--uncertainty", required=True)
    p.add_argument("--gamma", type=int, help="override the global budget")
    p.add_argument("--oracle", choices=("dp", "brute", "milp", "path"), default="dp")
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("simulate", help="stress a solution with scenarios")
    p.add_argument("--solution", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--uncertainty", required=True)
    p.add_argument("--kind", choices=("rm1", "rm2"), required=True)
    p.add_argument("--budget", type=int,
                   help="deviated cells per job (rm1) or spend budget (rm2)")
    p.add_argument("--n", type=int, default=1000, help="number of scenarios")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--nested", action="store_true",
                   help="prefix spending (nested across budgets)")
    p.add_argument("--cap-rhat", action="store_true", dest="cap_rhat",
                   help="cap spend-scenario cells at r + r_hat")
    _add_common(p, weights=False)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("study", help="solve models over instances and simulate")
    p.add_argument("--instances", required=True, help="directory of instance JSON files")
    p.add_argument("--models", default="dm,rm1,rm2", help="comma list of models")
    p.add_argument("--n-scenarios", type=int, default=1000, dest="n_scenarios")
    p.add_argument("--out", help="full report JSON path")
    p.add_argument("--csv-dir", dest="csv_dir", help="directory for CSV and figures")
    p.add_argument("--gamma-job", type=int, dest="gamma_job")
    p.add_argument("--prune-arcs", action="store_true", dest="prune_arcs")
    p.add_argument("--no-figures", action="store_true", dest="no_figures")
    _add_common(p)
    _add_solver(p)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("sweep", help="budget sensitivity over fixed solutions")
    p.add_argument("--kind", choices=("rm1", "rm2"), required=True)
    p.add_argument("--instances", required=True, help="directory of instance JSON files")
    p.add_argument("--models", help="comma list of models (default: dm + kind)")
    p.add_argument("--grid", help="budgets: '0,2,4' or '0..6' or '0..60:12'")
    p.add_argument("--n-scenarios", type=int, default=200, dest="n_scenarios")
    p.add_argument("--out", required=True, help="sweep CSV path")
    p.add_argument("--gamma-job", type=int, dest="gamma_job")
    p.add_argument("--gamma-global", type=int, dest="gamma_global")
    p.add_argument("--prune-arcs", action="store_true", dest="prune_arcs")
    p.add_argument("--cap-rhat", action="store_true", dest="cap_rhat")
    p.add_argument("--no-figures", action="store_true", dest="no_figures")
    _add_common(p)
    _add_solver(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except ValidationError as exc:
        _note(f"error: {exc}")
        return EXIT_VALIDATION
    except milp.SolverError as exc:
        _note(f"solver error: {exc}")
        return EXIT_SOLVER
    except ValueError as exc:
        _note(f"error: {exc}")
        return EXIT_VALIDATION
    except OSError as exc:
        _note(f"error: {exc}")
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
