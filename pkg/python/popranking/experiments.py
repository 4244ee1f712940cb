"""
Figure reproduction and parameter sweeps.

Figure configurations live in ``resources/figures.yml``; each one names a
``kind`` handled by one of the ``_figure_*`` functions below. Every run
writes a CSV (the authoritative artifact), an SVG line plot and a meta JSON
echoing the configuration it ran with.
"""

from __future__ import annotations

import copy
import csv
import dataclasses
import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import plotting
from .core import fix_realization, uniform_ranking
from .dynamics import (
    mean_dynamics_recursion,
    rich_get_richer_initial_ranking,
    simulate,
)
from .limits import theta, theta_params_for
from .metrics import (
    aof_amplification,
    belief_polarization,
    binomial_weights,
    ex_ante_efficiency,
    interim_efficiency,
    monte_carlo_interim,
    net_of_aof,
    per,
    por,
)
from .models import (
    LONG_FORMAT_COLUMNS,
    Branch,
    ConfigError,
    ExperimentConfig,
    FeedbackMode,
    GroupConfig,
    ModelParams,
    ParameterError,
    PersistenceSchedule,
    RankingRegime,
    SweepAxis,
)
from .variants import merging_sweep, ordinal_interim_profile

logger = logging.getLogger(__name__)

RESOURCES = Path(__file__).parent / "resources"
FIGURES_PATH = RESOURCES / "figures.yml"
GOLDENS_DIR = RESOURCES / "goldens"

GROUP_SETTINGS = {
    "gamma_a": "gamma_a",
    "gamma_b": "gamma_b",
    "share_a": "share_a",
    "lambda": "lambda_",
}


def load_figure_configs(path: str | Path = FIGURES_PATH) -> dict:
    with open(path) as handle:
        return yaml.safe_load(handle)


def figure_ids(path: str | Path = FIGURES_PATH) -> list[str]:
    return list(load_figure_configs(path))


def apply_setting(
    params: ModelParams, group: GroupConfig | None, name: str, value
) -> tuple[ModelParams, GroupConfig | None]:
    """Set one named parameter on whichever of params or group owns it."""
    if name in GROUP_SETTINGS:
        if group is None:
            msg = f"{name!r} needs a group configuration"
            raise ConfigError(msg)
        return params, dataclasses.replace(
            group, **{GROUP_SETTINGS[name]: float(value)}
        )
    if name in ("M", "kappa"):
        value = int(value)
    elif name != "signal_model":
        value = float(value)
    return params.replace(**{name: value}), group


def _apply_all(params, group, settings: dict):
    for name, value in settings.items():
        params, group = apply_setting(params, group, name, value)
    return params, group


def _grid(grid: dict) -> list[dict]:
    if not grid:
        return [{}]
    names = list(grid)
    return [
        dict(zip(names, values))
        for values in itertools.product(*(grid[name] for name in names))
    ]


def _axis_values(entry: dict) -> tuple[str, tuple]:
    axis = SweepAxis.from_dict(entry)
    return axis.name, axis.values


def format_cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return "" if value is None else value


def write_rows(
    rows: list[dict], path: str | Path, fmt: str = "csv", fieldnames=None
) -> Path:
    """Write rows as CSV or JSON with columns in first-seen order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fieldnames is None:
        fieldnames = []
        for row in rows:
            fieldnames.extend(key for key in row if key not in fieldnames)

    if fmt == "json":
        data = [
            {key: format_cell(row.get(key)) for key in fieldnames}
            for row in rows
        ]
        path.write_text(json.dumps(data, indent=2) + "\n")
        return path

    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {key: format_cell(row.get(key)) for key in fieldnames}
            )
    return path


def read_rows(path: str | Path) -> list[dict]:
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


# --- figure kinds ---


def _figure_interim_profile(config, params, group, options):
    rows = []
    for settings in _grid(config.get("grid")):
        point, point_group = _apply_all(params, group, settings)
        for regime in config.get("regimes", ["popularity"]):
            interim = interim_efficiency(point, regime, point_group)
            rows.extend(
                {"L": L, "P_L": value, **settings, "regime": regime}
                for L, value in enumerate(interim)
            )

    # Binomial density of L drawn alongside the profile of each panel
    panel = config["plot"].get("panel")
    series = config["plot"]["series"][0]
    for key, q in config.get("density_q", {}).items():
        weights = binomial_weights(params.M, q)
        rows.extend(
            {
                "L": L,
                "P_L": weight,
                panel: float(key),
                series: f"binomial q={q}",
                "regime": "density",
            }
            for L, weight in enumerate(weights)
        )
    return rows


def _figure_ex_ante_curve(config, params, group, options):
    name, values = _axis_values(config["x"])
    rows = []
    for value in values:
        point, point_group = apply_setting(params, group, name, value)
        for series in config["series"]:
            regime = RankingRegime(series["regime"])
            lambda_ = series.get("lambda")
            series_group = None
            if regime is RankingRegime.PERSONALIZED:
                series_group = point_group.with_lambda(lambda_)
            interim = interim_efficiency(point, regime, series_group)
            if series["metric"] == "P":
                result = ex_ante_efficiency(interim, point.q)
            else:
                result = net_of_aof(point, point.q, interim=interim)
            rows.append(
                {
                    name: value,
                    "metric": series["metric"],
                    "regime": regime.value,
                    "lambda": lambda_,
                    "value": result,
                }
            )
    return rows


def _figure_theta_curves(config, params, group, options):
    ys = np.linspace(0.0, 1.0, int(config.get("points", 101)))
    branch = Branch(config.get("branch", "majority"))
    rows = []
    for alpha in config["alphas"]:
        point = params.replace(alpha=float(alpha))
        for L in config["L_values"]:
            curve = theta(ys, theta_params_for(point, L, branch))
            rows.extend(
                {"alpha": alpha, "L": L, "y": y, "theta": value}
                for y, value in zip(ys, curve)
            )
    return rows


def _figure_amplification(config, params, group, options):
    name, values = _axis_values(config["x"])
    rows = []
    for value in values:
        point, _ = apply_setting(params, group, name, value)
        for L_from, L_to in config["pairs"]:
            rows.append(
                {
                    name: value,
                    "L_from": L_from,
                    "L_to": L_to,
                    "ratio": aof_amplification(point, L_from, L_to),
                }
            )
    return rows


def _figure_ordinal_profile(config, params, group, options):
    reps = options.get("reps") or config.get("reps", 100)
    rows = []
    for settings in _grid(config.get("grid")):
        point, _ = _apply_all(params, group, settings)
        means, errors = ordinal_interim_profile(
            point,
            beta=config.get("beta", 1.5),
            N=config.get("N", 1000),
            reps=reps,
            seed=options.get("seed", 0),
            jobs=options.get("jobs", 1),
        )
        rows.extend(
            {"L": L, "P_L": mean, "stderr": error, **settings}
            for L, (mean, error) in enumerate(zip(means, errors))
        )
    return rows


def _figure_merging(config, params, group, options):
    J = int(config["J"])
    L_range = range(0, int(config.get("L_max", 2 * J)) + 1)
    rows = []
    for settings in _grid(config.get("grid")):
        point, _ = _apply_all(params, group, settings)
        values = merging_sweep(point, J, L_range)
        rows.extend(
            {"L": L, "M": J + L, "P_L": value, **settings}
            for L, value in zip(L_range, values)
        )
    return rows


def _figure_concentration(config, params, group, options):
    N = int(config.get("N", 5000))
    stride = int(config.get("stride", 10))
    schedule = PersistenceSchedule.constant(params.kappa)
    r1 = uniform_ranking(params.M)
    rows = []

    for side in ("correct", "wrong"):
        for size in config["sizes"]:
            L = size if side == "correct" else params.M - size
            real = fix_realization(1, L, params)
            mask = (
                real.correct_mask if side == "correct" else ~real.correct_mask
            )
            mean = mean_dynamics_recursion(params, real, r1, N, schedule)
            runs = [("mean_dynamics", mean)]
            if size == config.get("simulated_size"):
                record = simulate(
                    params,
                    real,
                    r1,
                    N,
                    schedule,
                    FeedbackMode(config.get("mode", "prob_feedback")),
                    options.get("seed", 0),
                )
                runs.append(("simulate", record))
            for source, record in runs:
                masses = record.class_mass(mask, of="rankings")
                rows.extend(
                    {
                        "side": side,
                        "size": size,
                        "source": source,
                        "step": t + 1,
                        "mass": masses[t],
                    }
                    for t in range(0, N, stride)
                )
    return rows


def _figure_rich_get_richer(config, params, group, options):
    N = int(config.get("N", 1000))
    r1 = rich_get_richer_initial_ranking(params.M)
    rows = []
    for settings in _grid(config.get("grid")):
        point, _ = _apply_all(params, group, settings)
        real = fix_realization(1, int(config["L"]), point)
        for alpha in config["alphas"]:
            record = mean_dynamics_recursion(
                point.replace(alpha=float(alpha)), real, r1, N
            )
            cumulative = record.choices.sum(axis=0)
            rows.extend(
                {**settings, "alpha": alpha, "m": m, "cumulative": value}
                for m, value in enumerate(cumulative)
            )
    return rows


FIGURE_KINDS = {
    "interim_profile": _figure_interim_profile,
    "ex_ante_curve": _figure_ex_ante_curve,
    "theta_curves": _figure_theta_curves,
    "amplification": _figure_amplification,
    "ordinal_profile": _figure_ordinal_profile,
    "merging": _figure_merging,
    "concentration": _figure_concentration,
    "rich_get_richer": _figure_rich_get_richer,
}


def figure_rows(
    figure_id: str, config: dict | None = None, **options
) -> tuple[list[dict], dict]:
    """Compute the data of one figure. Returns the rows and the config used."""
    if config is None:
        configs = load_figure_configs()
        if figure_id not in configs:
            choices = ", ".join(configs)
            msg = f"Unknown figure {figure_id!r}, pick one of {choices}"
            raise ConfigError(msg)
        config = configs[figure_id]
    config = copy.deepcopy(config)

    try:
        kind = FIGURE_KINDS[config["kind"]]
    except KeyError as err:
        msg = f"Figure {figure_id!r} has no known kind: {config.get('kind')!r}"
        raise ConfigError(msg) from err

    params = ModelParams.from_dict(config.get("params", {}))
    group = (
        GroupConfig.from_dict(config["group"]) if config.get("group") else None
    )
    return kind(config, params, group, options), config


def run_figure(
    figure_id: str,
    out_dir: str | Path,
    reps: int | None = None,
    seed: int = 0,
    jobs: int = 1,
    fmt: str = "csv",
    plot: bool = True,
) -> dict[str, Path]:
    """
    Regenerate one figure into ``out_dir``: its data, a line plot of it and
    a meta JSON holding the configuration and run options.
    """
    logger.info("======= Running figure %s =======", figure_id)
    rows, config = figure_rows(figure_id, reps=reps, seed=seed, jobs=jobs)
    logger.info("Parameters: %s", config.get("params"))
    if config.get("group"):
        logger.info("Groups: %s", config["group"])

    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        msg = f"Cannot write figure output to {out_dir}: {err}"
        raise ConfigError(msg) from err

    artifacts = {
        "data": write_rows(rows, out_dir / f"{figure_id}.{fmt}", fmt),
    }
    if plot:
        layout = config["plot"]
        artifacts["plot"] = plotting.line_plot(
            rows,
            out_dir / f"{figure_id}.svg",
            x=layout["x"],
            y=layout["y"],
            series=layout.get("series"),
            panel=layout.get("panel"),
            title=config.get("title", figure_id),
        )
    meta = {
        "figure": figure_id,
        "config": config,
        "options": {"reps": reps, "seed": seed},
        "rows": len(rows),
    }
    artifacts["meta"] = out_dir / f"{figure_id}.meta.json"
    artifacts["meta"].write_text(
        json.dumps(meta, indent=2, default=str) + "\n"
    )

    logger.info("Wrote %s rows for %s to %s", len(rows), figure_id, out_dir)
    logger.info("=" * 35)
    return artifacts


# --- sweeps ---


def _regime_tag(regime: RankingRegime, group: GroupConfig | None) -> str:
    if regime is RankingRegime.PERSONALIZED:
        return f"personalized({group.lambda_})"
    return regime.value


def _expected_polarization(params, group) -> float:
    """Belief polarization averaged over L ~ Binomial(M, q)."""
    weights = binomial_weights(params.M, params.q)
    return float(
        sum(
            weight
            * belief_polarization(
                params, group, fix_realization(1, L, params), tie_rule=True
            )
            for L, weight in enumerate(weights)
        )
    )


def _metric_value(metric, params, group, regime, L, reps, horizon, seed):
    if metric in ("P", "P_net", "P_L"):
        interim = interim_efficiency(params, regime, group)
        if metric == "P":
            value = ex_ante_efficiency(interim, params.q)
            return value, _regime_tag(regime, group)
        if metric == "P_net":
            value = net_of_aof(params, params.q, interim=interim)
            return value, _regime_tag(regime, group)
        return float(interim[L]), _regime_tag(regime, group)
    if metric == "P_L_mc":
        means, _ = monte_carlo_interim(
            params, horizon, reps, seed=seed, L_values=[L]
        )
        return float(means[0]), RankingRegime.POPULARITY.value
    if metric == "PoR":
        return por(params, params.q), "popularity-random"
    if metric == "PeR":
        return (
            per(params, group, params.q),
            f"personalized({group.lambda_})-personalized(0.0)",
        )
    if metric == "BP":
        if L is None:
            value = _expected_polarization(params, group)
        else:
            value = belief_polarization(
                params, group, fix_realization(1, L, params), tie_rule=True
            )
        return value, _regime_tag(RankingRegime.PERSONALIZED, group)
    msg = f"Unknown metric {metric!r}"
    raise ConfigError(msg)


def _sweep_point(task) -> list[dict]:
    config, settings = task
    L = settings.get("L")
    point_settings = {k: v for k, v in settings.items() if k != "L"}
    params, group = _apply_all(config.params, config.group, point_settings)
    if L is not None and not 0 <= int(L) <= params.M:
        msg = f"L={L} lies outside 0..{params.M}"
        raise ParameterError(msg)

    metrics = list(config.metrics)
    if config.reps > 0 and "P_L" in metrics:
        metrics.append("P_L_mc")

    names = ";".join(settings)
    values = ";".join(str(value) for value in settings.values())
    rows = []
    for metric in metrics:
        value, regime = _metric_value(
            metric,
            params,
            group,
            config.regime,
            None if L is None else int(L),
            config.reps,
            config.horizon,
            config.seed,
        )
        rows.append(
            {
                "sweep_var": names,
                "sweep_value": values,
                "metric": metric,
                "value": value,
                "regime": regime,
            }
        )
    return rows


def run_sweep(
    config: ExperimentConfig, jobs: int = 1, fmt: str = "csv"
) -> dict[str, Path]:
    """
    Evaluate every requested metric on the cartesian product of the sweep
    axes. Rows follow the axis order, so output is identical across runs
    and across ``jobs``.
    """
    config.raise_for_problems()
    logger.info("======= Running sweep %s =======", config.name)

    names = [axis.name for axis in config.axes]
    points = [
        dict(zip(names, values))
        for values in itertools.product(*(axis.values for axis in config.axes))
    ]
    tasks = [(config, point) for point in points]
    logger.info("%s grid points, metrics %s", len(points), config.metrics)

    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_sweep_point, tasks))
        else:
            results = [_sweep_point(task) for task in tasks]
    except ParameterError as err:
        msg = f"Sweep {config.name!r} hit an invalid grid point: {err}"
        raise ConfigError(msg) from err

    rows = [row for point_rows in results for row in point_rows]
    out = Path(config.out)
    artifacts = {
        "data": write_rows(
            rows, out / f"{config.name}.{fmt}", fmt, LONG_FORMAT_COLUMNS
        ),
        "meta": out / f"{config.name}.meta.json",
    }
    meta = {"config": config.as_dict(), "jobs": jobs, "rows": len(rows)}
    artifacts["meta"].write_text(
        json.dumps(meta, indent=2, default=str) + "\n"
    )

    logger.info("Wrote %s rows to %s", len(rows), artifacts["data"])
    logger.info("=" * 35)
    return artifacts
