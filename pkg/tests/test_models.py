import json

import numpy as np
import pytest

from popranking.core import uniform_ranking
from popranking.models import (
    CheckResult,
    ConfigError,
    ConvergenceError,
    ExperimentConfig,
    GroupConfig,
    ModelParams,
    ParameterError,
    RankingRegime,
    Settings,
    SweepAxis,
    TrajectoryRecord,
    load_parameter_file,
    read_config_file,
)


def test_params_round_trip_and_hash(baseline):
    data = baseline.as_dict()
    assert ModelParams.from_dict(data) == baseline
    assert baseline.hash() == ModelParams.from_dict(data).hash()
    assert baseline.hash() != baseline.replace(gamma=0.5).hash()
    assert "mu_hat" not in data


def test_group_config():
    group = GroupConfig.from_dict(
        {"gamma_a": 0.0, "gamma_b": 0.66, "lambda": 1}
    )
    assert group.share_a == 0.5
    assert group.lambda_ == 1
    assert group.as_dict()["lambda"] == 1
    assert group.params_for(ModelParams(), "B").gamma == 0.66

    with pytest.raises(ParameterError):
        GroupConfig(0.0, 0.66, share_a=1.0)
    with pytest.raises(ParameterError):
        GroupConfig(0.0, 1.5)
    with pytest.raises(ParameterError):
        group.gamma_for("C")


def test_read_config_file_formats(tmp_path):
    toml = tmp_path / "params.toml"
    toml.write_text("p = 0.6\nM = 10\n")
    yml = tmp_path / "params.yml"
    yml.write_text("p: 0.6\nM: 10\n")
    js = tmp_path / "params.json"
    js.write_text(json.dumps({"p": 0.6, "M": 10}))
    for path in (toml, yml, js):
        assert read_config_file(path) == {"p": 0.6, "M": 10}


def test_read_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "missing.toml")

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError):
        read_config_file(broken)

    other = tmp_path / "params.ini"
    other.write_text("p=0.6")
    with pytest.raises(ConfigError):
        read_config_file(other)

    listed = tmp_path / "list.yml"
    listed.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        read_config_file(listed)


def test_load_parameter_file(tmp_path):
    path = tmp_path / "params.toml"
    path.write_text(
        'p = 0.6\nM = 10\ngamma_a = 0.0\ngamma_b = 0.66\nlambda = 0.5\n'
    )
    params, group = load_parameter_file(path)
    assert params.p == 0.6
    assert params.M == 10
    assert group == GroupConfig(0.0, 0.66, lambda_=0.5)

    path.write_text("p = 0.6\nbeta = 2\n")
    with pytest.raises(ConfigError, match="beta"):
        load_parameter_file(path)

    path.write_text('signal_model = "sophisticated"\n')
    with pytest.raises(ConfigError):
        load_parameter_file(path)


def test_settings_defaults():
    settings = Settings()
    assert settings.model_params == ModelParams()
    assert settings.epsilon_floor == 1e-9
    assert settings.ode_options["eps"] == 1e-9
    assert settings.growing_schedule.kappa_at(10) == 110
    assert settings.format == "csv"


def test_settings_overrides(tmp_path):
    user = tmp_path / "settings.yml"
    user.write_text("M: 12\nseed: 3\n")
    settings = Settings(user, {"seed": 5, "jobs": None})
    assert settings.M == 12
    assert settings.seed == 5
    assert settings.jobs == 1


def test_settings_collects_every_problem(tmp_path):
    user = tmp_path / "settings.yml"
    user.write_text("M: twenty\nunknown_key: 1\nflag_me: true\n")
    with pytest.raises(ConfigError) as err:
        Settings(user)
    message = str(err.value)
    assert "M: expected int, got str" in message
    assert "unknown_key: unknown setting" in message
    assert "flag_me: unknown setting" in message


def test_experiment_config(tmp_path):
    path = tmp_path / "por_grid.yml"
    path.write_text(
        "params: {M: 20, p: 0.55}\n"
        "q: 0.8\n"
        "axes:\n"
        "  - {name: gamma, values: [0.0, 0.5]}\n"
        "  - {name: mu, start: 0.8, stop: 1.0, num: 3}\n"
        "metrics: [P, PoR]\n"
    )
    config = ExperimentConfig.load(path)
    assert config.name == "por_grid"
    assert config.params.q == 0.8
    assert config.axes[1].values == pytest.approx((0.8, 0.9, 1.0))
    assert config.validate() == []
    assert config.as_dict()["horizon"] == 20_000


def test_experiment_config_problems():
    config = ExperimentConfig(
        axes=[
            SweepAxis("gamma", (0.0, 1.5)),
            SweepAxis("beta", (1.0,)),
            SweepAxis("lambda", (0.5,)),
        ],
        metrics=["P", "BP", "P_L", "entropy"],
        regime=RankingRegime.PERSONALIZED,
    )
    problems = config.validate()
    assert "axis 'gamma' value 1.5 is outside its domain" in problems
    assert "axis 'beta' does not name a parameter" in problems
    assert "axis 'lambda' requires a group block" in problems
    assert "unknown metric 'entropy'" in problems
    assert "metric 'BP' requires a group block" in problems
    assert "metric 'P_L' requires an 'L' axis" in problems
    assert "regime 'personalized' requires a group block" in problems
    with pytest.raises(ConfigError):
        config.raise_for_problems()


def test_experiment_config_bad_values():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"regime": "alphabetical"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"axes": [{"values": [1]}]})


def test_trajectory_export(tmp_path):
    rankings = np.tile(uniform_ranking(3), (2, 1))
    record = TrajectoryRecord(
        rankings=rankings, choices=rankings, final_ranking=rankings[-1]
    )
    rows = list(record.iter_rows())
    assert len(rows) == 6
    assert rows[0]["step"] == 1
    assert record.terminal_class_mass([True, False, False]) == pytest.approx(
        1 / 3
    )
    lines = record.to_csv(tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "step,group,m,r,rho"
    assert len(lines) == 7


def test_check_result():
    close = CheckResult.close("limit", 0.5801, 0.58, 1e-3)
    assert close.passed
    assert close.status == "PASS"
    assert str(close).startswith("[PASS] limit")
    far = CheckResult.close("limit", 0.6, 0.58, 1e-3)
    assert far.status == "FAIL"
    skipped = CheckResult("golden", passed=True, skipped=True)
    assert skipped.as_dict()["status"] == "SKIP"


def test_convergence_error_message():
    err = ConvergenceError("no rest point", 1e-3, 10)
    assert err.residual == 1e-3
    assert "steps=10" in str(err)
