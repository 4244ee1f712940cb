import numpy as np
import pytest

from popranking.core import fix_realization
from popranking.limits import class_limit
from popranking.metrics import (
    aof_amplification,
    belief_polarization,
    binomial_weights,
    efficiency_report,
    ex_ante_efficiency,
    interim_efficiency,
    monte_carlo_interim,
    net_of_aof,
    per,
    por,
)
from popranking.models import (
    ParameterError,
    RankingRegime,
    RegimeError,
    TieError,
)


def test_interim_profile(baseline):
    interim = interim_efficiency(baseline)
    assert interim.shape == (21,)
    assert interim[0] == 0.0
    assert interim[20] == 1.0
    assert interim[7] == pytest.approx(class_limit(baseline, 7))

    # callers get their own copy of the cached profile
    interim[5] = -1.0
    assert interim_efficiency(baseline)[5] != -1.0


def test_random_regime_plateaus(baseline):
    random = interim_efficiency(baseline, "random")
    assert random[1:10] == pytest.approx(np.full(9, 0.2485), abs=1e-12)
    assert random[11:20] == pytest.approx(np.full(9, 0.7845), abs=1e-12)


def test_personalized_regime_needs_groups(baseline):
    with pytest.raises(ParameterError):
        interim_efficiency(baseline, RankingRegime.PERSONALIZED)


def test_ex_ante_efficiency(baseline):
    weights = binomial_weights(20, 0.7)
    assert weights.sum() == pytest.approx(1.0)
    assert ex_ante_efficiency(np.ones(21), 0.7) == pytest.approx(1.0)
    interim = interim_efficiency(baseline)
    assert 0 < ex_ante_efficiency(interim, 0.7) < 1


def test_net_of_aof(baseline):
    # every non-degenerate L takes one of two plateau values
    flat = np.zeros(21)
    flat[5] = 0.2
    flat[15] = 0.8
    value = net_of_aof(baseline, 0.7, interim=flat)
    weights = binomial_weights(20, 0.7)
    expected = (
        weights[1:10].sum() * 0.2
        + weights[10] * 0.5
        + weights[11:20].sum() * 0.8
        + 0.7**20
    )
    assert value == pytest.approx(expected)


def test_net_of_aof_increases_in_q(baseline):
    values = [net_of_aof(baseline, q) for q in np.linspace(0.55, 0.95, 5)]
    assert np.all(np.diff(values) >= -1e-12)


def test_value_of_popularity_ranking(baseline):
    assert por(baseline, 0.7) > 0
    assert por(baseline, 0.9) < 0


def test_value_of_personalization(baseline, groups):
    assert per(baseline, groups.with_lambda(0.0), 0.7) == 0.0
    split = per(baseline, groups.with_lambda(1.0), 0.7)
    assert split * por(baseline, 0.7) < 0


def test_belief_polarization(baseline, groups, majority):
    shared = belief_polarization(baseline, groups, majority)
    split = belief_polarization(baseline, groups.with_lambda(1.0), majority)
    assert shared >= 0
    assert split >= shared

    tie = fix_realization(1, 10, baseline)
    with pytest.raises(TieError):
        belief_polarization(baseline, groups, tie)
    assert belief_polarization(baseline, groups, tie, tie_rule=True) >= 0


def test_belief_polarization_at_a_horizon(baseline, groups, majority):
    value = belief_polarization(
        baseline, groups.with_lambda(1.0), majority, horizon=2000
    )
    assert value > 0


def test_aof_amplification(baseline):
    ratio = aof_amplification(baseline, 3, 2)
    assert ratio > 1
    assert ratio == pytest.approx(
        class_limit(baseline, 2) / class_limit(baseline, 3)
    )
    assert aof_amplification(baseline, 16, 16) == 1.0

    with pytest.raises(RegimeError):
        aof_amplification(baseline, 9, 11)
    with pytest.raises(RegimeError):
        aof_amplification(baseline, 10, 11)


def test_efficiency_report(tmp_path, baseline, groups):
    report = efficiency_report(baseline, "popularity", 0.7)
    assert report.ex_ante == pytest.approx(
        ex_ante_efficiency(report.interim, 0.7)
    )
    assert report.lambda_ is None

    personalized = efficiency_report(
        baseline, RankingRegime.PERSONALIZED, 0.7, groups.with_lambda(1.0)
    )
    assert personalized.lambda_ == 1.0
    assert personalized.to_csv(tmp_path / "report.csv").exists()
    assert personalized.to_json(tmp_path / "report.json").exists()


def test_monte_carlo_interim(baseline):
    means, errors = monte_carlo_interim(
        baseline, 300, 3, seed=2, L_values=[0, 15, 20]
    )
    assert means.shape == errors.shape == (3,)
    assert means[0] == 0.0
    assert means[2] == pytest.approx(1.0)
    assert 0 < means[1] < 1
