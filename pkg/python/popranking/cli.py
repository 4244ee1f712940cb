"""
Command line front end.

    popranking simulate --L 7 --N 5000
    popranking limits --params baseline.toml
    popranking metrics --regime random --q 0.9
    popranking figure fig1 --out out/
    popranking sweep experiments/por_grid.yml --jobs 4
    popranking verify closed_forms
    popranking verify oracle_agreement --quick

Exit codes: 0 on success, 1 when checks fail, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .application import Application
from .core import fix_realization, uniform_ranking, validate
from .dynamics import (
    integrate_ode,
    mean_dynamics_recursion,
    personalized_mean_dynamics,
    replicate,
    rich_get_richer_initial_ranking,
    simulate,
    simulate_personalized,
)
from .experiments import figure_ids, run_figure, run_sweep, write_rows
from .limits import (
    class_limit,
    closed_form_mu1_alpha1,
    limit_surface,
    solve_personalized_limit,
    theta_params_for,
)
from .metrics import belief_polarization, efficiency_report, per, por
from .models import (
    ConfigError,
    ExperimentConfig,
    FeedbackMode,
    ParameterError,
    PopRankingError,
    RankingRegime,
    RegimeError,
    load_parameter_file,
)
from .verification import SUITES, verify

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="popranking",
        description="Opinion dynamics under popularity and personalized "
        "search rankings.",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", type=str, help="Settings file overlaying info.yml."
    )
    common.add_argument(
        "--params", type=str, help="Flat TOML or JSON parameter file."
    )
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="Worker processes.")
    common.add_argument("--reps", type=int, help="Monte Carlo replications.")
    common.add_argument("--out", type=str, help="Output folder.")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument(
        "--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"]
    )

    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser(
        "simulate", parents=[common], help="Run ranking trajectories."
    )
    sim.add_argument("--L", type=int, required=True, help="Correct websites.")
    sim.add_argument("--N", type=int, default=20_000, help="Number of agents.")
    sim.add_argument(
        "--mode",
        choices=[mode.value for mode in FeedbackMode],
        default=FeedbackMode.PROB_FEEDBACK.value,
    )
    sim.add_argument(
        "--schedule", choices=["constant", "growing"], default="constant"
    )
    sim.add_argument(
        "--r1",
        choices=["uniform", "rich"],
        default="uniform",
        help="Initial ranking.",
    )
    sim.add_argument(
        "--mean",
        action="store_true",
        help="Run the deterministic mean dynamics instead.",
    )
    sim.add_argument(
        "--rest-point",
        action="store_true",
        help="Also integrate the mean ODE to its rest point.",
    )
    sim.add_argument(
        "--lambda",
        dest="lambda_",
        type=float,
        help="Personalization; needs gamma_a and gamma_b in --params.",
    )

    lim = commands.add_parser(
        "limits", parents=[common], help="Limit class masses across L."
    )
    lim.add_argument("--L", type=int, nargs="*", help="Only these L values.")
    lim.add_argument(
        "--closed-form",
        action="store_true",
        help="Also report the mu=1, alpha=1 closed forms.",
    )
    lim.add_argument("--lambda", dest="lambda_", type=float)

    met = commands.add_parser(
        "metrics", parents=[common], help="Efficiency and polarization."
    )
    met.add_argument(
        "--regime",
        choices=[regime.value for regime in RankingRegime],
        default=RankingRegime.POPULARITY.value,
    )
    met.add_argument("--q", type=float, help="Website accuracy.")
    met.add_argument("--lambda", dest="lambda_", type=float)

    fig = commands.add_parser(
        "figure", parents=[common], help="Regenerate one figure."
    )
    fig.add_argument("figure_id", choices=figure_ids())
    fig.add_argument("--no-plot", action="store_true")

    sweep = commands.add_parser(
        "sweep", parents=[common], help="Run a parameter sweep config."
    )
    sweep.add_argument("config_file", type=str)

    ver = commands.add_parser(
        "verify", parents=[common], help="Run an acceptance suite."
    )
    ver.add_argument("suite", choices=SUITES)
    ver.add_argument("--update-goldens", action="store_true")
    ver.add_argument(
        "--quick",
        action="store_true",
        help="Reduced oracle grid and replication counts.",
    )
    ver.add_argument(
        "--points", type=int, help="Random parameter points for oracle checks."
    )
    ver.add_argument(
        "--horizon", type=int, help="Agents per Monte Carlo replication."
    )
    return parser


def _model(app: Application, args):
    if args.params:
        params, group = load_parameter_file(args.params)
    else:
        params, group = app.settings.model_params, None
    lambda_ = getattr(args, "lambda_", None)
    if lambda_ is not None:
        if group is None:
            msg = "--lambda needs gamma_a and gamma_b in the parameter file"
            raise ConfigError(msg)
        group = group.with_lambda(lambda_)
    return params, group


def _print_block(title: str, data: dict):
    print(f"{title}: {json.dumps(data, default=str)}")


def _emit(rows: list[dict], app: Application, name: str) -> Path:
    out = Path(app.settings.output_dir)
    fmt = app.settings.format
    path = write_rows(rows, out / f"{name}.{fmt}", fmt)
    print(f"Wrote {path}")
    return path


def cmd_simulate(app: Application, args) -> int:
    settings = app.settings
    params, group = _model(app, args)
    real = fix_realization(1, args.L, params)
    report = validate(params)
    if not report.ok:
        msg = "Invalid parameters: " + ", ".join(report.violations)
        raise ParameterError(msg)
    for flag in report.flags:
        logger.warning(flag)

    r1 = (
        rich_get_richer_initial_ranking(params.M)
        if args.r1 == "rich"
        else uniform_ranking(params.M)
    )
    schedule = (
        settings.growing_schedule if args.schedule == "growing" else None
    )
    _print_block("Simulating", {**params.as_dict(), "L": args.L, "N": args.N})

    if group is not None:
        if args.mean:
            records = personalized_mean_dynamics(
                params, group, real, r1, r1, args.N, schedule
            )
        else:
            records = simulate_personalized(
                params, group, real, r1, r1, args.N, schedule, settings.seed
            )
        rows = [row for record in records for row in record.iter_rows()]
        for record in records:
            print(
                f"group {record.group}: terminal mass on correct websites "
                f"{record.terminal_class_mass(real.correct_mask):.6f}"
            )
        _emit(rows, app, "trajectory")
        return EXIT_OK

    if args.mean:
        record = mean_dynamics_recursion(
            params, real, r1, args.N, schedule, eps=settings.epsilon_floor
        )
    else:
        record = simulate(
            params,
            real,
            r1,
            args.N,
            schedule,
            FeedbackMode(args.mode),
            settings.seed,
        )
    print(
        "terminal mass on correct websites "
        f"{record.terminal_class_mass(real.correct_mask):.6f}"
    )
    _emit(list(record.iter_rows()), app, "trajectory")

    if args.rest_point:
        rest = integrate_ode(params, real, r1, **settings.ode_options)
        mass = rest[real.correct_mask].sum()
        print(f"rest point mass on correct websites {mass:.12g}")

    if args.reps and not args.mean:
        mean, stderr, _ = replicate(
            params,
            real,
            args.N,
            settings.reps,
            r1=r1,
            schedule=schedule,
            mode=FeedbackMode(args.mode),
            seed=settings.seed,
            jobs=settings.jobs,
        )
        print(f"{settings.reps} replications: {mean:.6f} ± {stderr:.6f}")
    return EXIT_OK


def cmd_limits(app: Application, args) -> int:
    params, group = _model(app, args)
    L_values = args.L if args.L else list(range(params.M + 1))
    _print_block("Limits", params.as_dict())

    rows = limit_surface(params, L_values)
    for L in L_values:
        limit = class_limit(
            params,
            L,
            grid=app.settings.root_grid,
            tol=app.settings.root_tolerance,
        )
        line = f"L={L}: {limit:.12g}"
        if group is not None:
            real = fix_realization(1, L, params)
            result_a, result_b = solve_personalized_limit(params, group, real)
            line += f"  A={result_a.mass:.12g} B={result_b.mass:.12g}"
        if args.closed_form and 0 < L < params.M and 2 * L != params.M:
            try:
                closed = closed_form_mu1_alpha1(theta_params_for(params, L))
                line += f"  closed form={closed.value:.12g}"
            except RegimeError as err:
                line += f"  ({err})"
        print(line)
    _emit(rows, app, "limits")
    return EXIT_OK


def cmd_metrics(app: Application, args) -> int:
    params, group = _model(app, args)
    q = params.q if args.q is None else args.q
    regime = RankingRegime(args.regime)
    _print_block(
        "Metrics", {**params.as_dict(), "q": q, "regime": regime.value}
    )

    report = efficiency_report(params, regime, q, group)
    report.extra["PoR"] = por(params, q)
    if group is not None:
        report.extra["PeR"] = per(params, group, q)
        M = params.M
        report.extra["BP"] = {
            L: belief_polarization(
                params, group, fix_realization(1, L, params), tie_rule=True
            )
            for L in range(M + 1)
        }
    print(report)
    for key in ("PoR", "PeR"):
        if key in report.extra:
            print(f"{key}: {report.extra[key]:.6f}")

    out = Path(app.settings.output_dir) / f"metrics.{app.settings.format}"
    if app.settings.format == "json":
        report.to_json(out)
    else:
        report.to_csv(out)
    print(f"Wrote {out}")
    return EXIT_OK


def cmd_figure(app: Application, args) -> int:
    settings = app.settings
    artifacts = run_figure(
        args.figure_id,
        settings.output_dir,
        reps=args.reps,
        seed=settings.seed,
        jobs=settings.jobs,
        fmt=settings.format,
        plot=not args.no_plot,
    )
    meta = json.loads(artifacts["meta"].read_text())
    _print_block(
        f"Figure {args.figure_id} parameters",
        meta["config"].get("params", {}),
    )
    for kind, path in artifacts.items():
        print(f"{kind}: {path}")
    return EXIT_OK


def cmd_sweep(app: Application, args) -> int:
    config = ExperimentConfig.load(args.config_file)
    if args.seed is not None:
        config.seed = args.seed
    if args.reps is not None:
        config.reps = args.reps
    if args.out is not None:
        config.out = Path(args.out)
    _print_block("Sweep", config.as_dict())
    artifacts = run_sweep(
        config, jobs=app.settings.jobs, fmt=app.settings.format
    )
    for kind, path in artifacts.items():
        print(f"{kind}: {path}")
    return EXIT_OK


def cmd_verify(app: Application, args) -> int:
    options = {"seed": app.settings.seed, "jobs": app.settings.jobs}
    if args.update_goldens:
        options["update_goldens"] = True
    if args.quick:
        options["quick"] = True
    if args.points is not None:
        options["points"] = args.points
    if args.horizon is not None:
        options["horizon"] = args.horizon
    if args.reps is not None:
        options["reps"] = args.reps

    results = verify(args.suite, **options)
    for result in results:
        print(result)
    failed = [r for r in results if not (r.passed or r.skipped)]
    print(f"{len(results)} checks, {len(failed)} failed")
    return EXIT_CHECKS_FAILED if failed else EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "limits": cmd_limits,
    "metrics": cmd_metrics,
    "figure": cmd_figure,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    overrides = {
        "seed": args.seed,
        "jobs": args.jobs,
        "reps": args.reps,
        "output_dir": args.out,
        "format": args.format,
    }
    try:
        app = Application(args.config, overrides, args.log_level)
        if app.settings.sentry_dsn:
            app.setup_sentry()
        return COMMANDS[args.command](app, args)
    except (ConfigError, ParameterError) as err:
        logger.error("%s", err)
        print(f"Configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except PopRankingError as err:
        logger.error("%s", err)
        print(f"Error: {err}", file=sys.stderr)
        return EXIT_CHECKS_FAILED


if __name__ == "__main__":
    sys.exit(main())
