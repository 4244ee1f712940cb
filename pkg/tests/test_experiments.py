import json

import pytest

from popranking.experiments import (
    apply_setting,
    figure_ids,
    figure_rows,
    format_cell,
    read_rows,
    run_figure,
    run_sweep,
    write_rows,
)
from popranking.limits import class_limit
from popranking.metrics import por
from popranking.models import (
    LONG_FORMAT_COLUMNS,
    ConfigError,
    ExperimentConfig,
    GroupConfig,
    ModelParams,
)


def test_figure_ids():
    ids = figure_ids()
    for figure_id in ("fig1", "fig2", "fig3", "fig4", "fig5"):
        assert figure_id in ids
    assert "figA6" in ids


def test_apply_setting(baseline, groups):
    params, group = apply_setting(baseline, groups, "lambda", 1)
    assert params is baseline
    assert group.lambda_ == 1.0
    params, _ = apply_setting(baseline, None, "M", 12.0)
    assert params.M == 12
    with pytest.raises(ConfigError):
        apply_setting(baseline, None, "gamma_b", 0.5)


def test_write_and_read_rows(tmp_path):
    rows = [{"L": 1, "P_L": 0.1}, {"L": 2, "P_L": 0.2, "note": None}]
    path = write_rows(rows, tmp_path / "rows.csv")
    read = read_rows(path)
    assert list(read[0]) == ["L", "P_L", "note"]
    assert read[1] == {"L": "2", "P_L": "0.2", "note": ""}

    path = write_rows(rows, tmp_path / "rows.json", "json")
    data = json.loads(path.read_text())
    assert data[0] == {"L": 1, "P_L": "0.1", "note": ""}
    assert format_cell(1 / 3) == repr(1 / 3)


def test_unknown_figure():
    with pytest.raises(ConfigError):
        figure_rows("fig99")
    with pytest.raises(ConfigError):
        figure_rows("custom", config={"kind": "pie_chart"})


def test_theta_curve_rows():
    rows, config = figure_rows("figB1")
    assert len(rows) == 2 * 5 * 101
    assert config["kind"] == "theta_curves"
    assert {row["alpha"] for row in rows} == {1.0, 4.0}


def test_merging_figure_rows():
    rows, _ = figure_rows("figA4")
    at_three = [row for row in rows if row["L"] == 3 and row["gamma"] == 0.33]
    assert len(at_three) == 1
    expected = class_limit(ModelParams(p=0.55, mu=0.9, gamma=0.33, M=13), 3)
    assert at_three[0]["P_L"] == pytest.approx(expected)


def test_run_figure(tmp_path):
    artifacts = run_figure("figB1", tmp_path / "figures")
    assert artifacts["data"].name == "figB1.csv"
    assert artifacts["plot"].read_text().lstrip().startswith("<?xml")
    meta = json.loads(artifacts["meta"].read_text())
    assert meta["figure"] == "figB1"
    assert meta["rows"] == 1010
    assert len(read_rows(artifacts["data"])) == 1010


def test_run_figure_is_deterministic(tmp_path):
    first = run_figure("figA4", tmp_path / "a", plot=False)
    second = run_figure("figA4", tmp_path / "b", plot=False)
    assert "plot" not in first
    assert first["data"].read_text() == second["data"].read_text()


def test_run_figure_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ConfigError):
        run_figure("figB1", blocker / "out", plot=False)


def _config(tmp_path, **changes):
    data = {
        "name": "grid",
        "params": {"M": 20, "p": 0.55, "mu": 0.9, "q": 0.7},
        "axes": [{"name": "gamma", "values": [0.33, 0.5]}],
        "metrics": ["P", "PoR"],
        "out": str(tmp_path),
    }
    data.update(changes)
    return ExperimentConfig.from_dict(data)


def test_run_sweep(tmp_path):
    artifacts = run_sweep(_config(tmp_path))
    rows = read_rows(artifacts["data"])
    assert list(rows[0]) == LONG_FORMAT_COLUMNS
    assert len(rows) == 4
    values = [row["sweep_value"] for row in rows]
    assert values == ["0.33", "0.33", "0.5", "0.5"]
    assert [row["metric"] for row in rows] == ["P", "PoR", "P", "PoR"]
    assert rows[1]["regime"] == "popularity-random"

    expected = por(ModelParams(p=0.55, mu=0.9, gamma=0.33, M=20), 0.7)
    assert float(rows[1]["value"]) == pytest.approx(expected)
    meta = json.loads(artifacts["meta"].read_text())
    assert meta["rows"] == 4


def test_run_sweep_over_L(tmp_path):
    config = _config(
        tmp_path,
        axes=[
            {"name": "gamma", "values": [0.33]},
            {"name": "L", "values": [5, 15]},
        ],
        metrics=["P_L"],
        reps=2,
        horizon=200,
    )
    rows = read_rows(run_sweep(config)["data"])
    assert [row["metric"] for row in rows] == ["P_L", "P_L_mc"] * 2
    assert rows[0]["sweep_var"] == "gamma;L"
    assert rows[0]["sweep_value"] == "0.33;5"
    assert float(rows[0]["value"]) == pytest.approx(
        class_limit(ModelParams(gamma=0.33), 5)
    )


def test_run_sweep_personalized(tmp_path):
    config = _config(
        tmp_path,
        axes=[{"name": "lambda", "values": [0.0, 1.0]}],
        group=GroupConfig(0.0, 0.66).as_dict(),
        metrics=["PeR"],
    )
    rows = read_rows(run_sweep(config)["data"])
    assert float(rows[0]["value"]) == 0.0
    assert rows[1]["regime"] == "personalized(1.0)-personalized(0.0)"


def test_run_sweep_is_independent_of_jobs(tmp_path):
    serial = run_sweep(_config(tmp_path / "serial"))["data"].read_text()
    parallel = run_sweep(_config(tmp_path / "parallel"), jobs=2)["data"]
    assert parallel.read_text() == serial


def test_run_sweep_rejects_bad_configs(tmp_path):
    with pytest.raises(ConfigError):
        run_sweep(_config(tmp_path, metrics=["BP"]))
    with pytest.raises(ConfigError):
        run_sweep(
            _config(
                tmp_path,
                axes=[{"name": "L", "values": [25]}],
                metrics=["P_L"],
            )
        )
