import numpy as np
import pytest

from popranking.choice import (
    cell_weights,
    choice_for_signals,
    class_total,
    expected_choice,
    expected_value_table,
    fallback_values,
    ranking_free_values,
    sample_choice,
    value_table_csv,
    value_vectors,
    weighted_choice,
)
from popranking.core import (
    fix_realization,
    is_on_simplex,
    sample_agent_signals,
    uniform_ranking,
)
from popranking.experiments import read_rows
from popranking.models import AgentSignals, ChoiceError


def test_ranking_free_values(minority):
    # x agrees with the correct websites, z with the incorrect majority
    values = ranking_free_values(AgentSignals(1, 0), minority, 0.33)
    assert values[:7] == pytest.approx(np.full(7, 0.33 / 7))
    assert values[7:] == pytest.approx(np.full(13, 0.67 / 13))
    assert values.sum() == pytest.approx(1.0)

    both = ranking_free_values(AgentSignals(1, 1), minority, 0.33)
    assert both[:7] == pytest.approx(np.full(7, 1 / 7))
    assert not both[7:].any()


def test_fallback_when_no_website_matches(baseline):
    real = fix_realization(1, 20, baseline)
    signals = AgentSignals(0, 0)
    assert not ranking_free_values(signals, real, 0.33).any()
    assert fallback_values(signals, real) == pytest.approx(uniform_ranking(20))

    rho, fallback = choice_for_signals(
        uniform_ranking(20), signals, real, 0.33, 1.0
    )
    assert fallback
    assert is_on_simplex(rho)

    vectors = value_vectors(real, 0.33)
    assert vectors[(0, 0)][1]
    assert not vectors[(1, 1)][1]


def test_weighted_choice_scales_with_alpha():
    ranking = np.array([0.6, 0.3, 0.1])
    values = np.array([1.0, 1.0, 1.0])
    assert weighted_choice(ranking, values, 1.0) == pytest.approx(ranking)
    assert weighted_choice(ranking, values, 0.0) == pytest.approx(
        np.full(3, 1 / 3)
    )

    with pytest.raises(ChoiceError):
        weighted_choice(ranking, np.zeros(3), 1.0)


def test_cell_weights_sum_to_one(baseline):
    weights = cell_weights(baseline)
    assert sum(weights.values()) == pytest.approx(1.0)
    assert weights["00"] == pytest.approx(0.55 * 0.9)


def test_expected_choice_is_class_symmetric(baseline, minority):
    table = expected_value_table(minority, baseline.gamma)
    rho = expected_choice(uniform_ranking(20), table, baseline)
    assert is_on_simplex(rho)
    assert np.ptp(rho[:7]) < 1e-12
    assert np.ptp(rho[7:]) < 1e-12


def test_alpha_zero_class_total(baseline, minority):
    flat = baseline.replace(alpha=0.0)
    table = expected_value_table(minority, flat.gamma)
    rho = expected_choice(uniform_ranking(20), table, flat)
    assert class_total(rho, minority.correct_mask) == pytest.approx(0.2485)


def test_degenerate_tables_are_uniform(baseline):
    for L in (0, 20):
        table = expected_value_table(fix_realization(1, L, baseline), 0.33)
        assert np.allclose(table.as_matrix(), 1 / 20)


def test_sample_choice_frequencies():
    rng = np.random.default_rng(5)
    probs = np.array([0.2, 0.5, 0.3])
    draws = np.bincount(
        [sample_choice(probs, rng) for _ in range(5000)], minlength=3
    )
    assert draws / 5000 == pytest.approx(probs, abs=0.03)


def test_value_table_csv(tmp_path, minority):
    path = value_table_csv(minority, 0.33, tmp_path / "table.csv")
    rows = read_rows(path)
    assert len(rows) == 20
    assert list(rows[0]) == ["m", "v00", "v01", "v10", "v11"]
    assert float(rows[0]["v00"]) == pytest.approx(0.33 / 7)


def test_weighted_choice_ignores_ranking_scale():
    ranking = np.array([0.5, 0.3, 0.15, 0.05])
    values = np.array([0.1, 0.4, 0.2, 0.3])
    for alpha in (0.5, 1.0, 1.25):
        assert weighted_choice(5 * ranking, values, alpha) == pytest.approx(
            weighted_choice(ranking, values, alpha), abs=1e-12
        )


def test_minority_value_table_rows(minority):
    gamma = 0.33
    table = expected_value_table(minority, gamma)
    # correct website, then incorrect website; cells 00, 01, 10, 11
    assert table.row(0) == pytest.approx(
        (gamma / 7, 1 / 7, 0.0, (1 - gamma) / 7)
    )
    assert table.row(7) == pytest.approx(
        ((1 - gamma) / 13, 0.0, 1 / 13, gamma / 13)
    )


def test_sampled_signals_match_value_table(baseline, minority):
    rng = np.random.default_rng(17)
    draws = 20_000
    total = np.zeros(20)
    cells = dict.fromkeys(cell_weights(baseline), 0)
    for _ in range(draws):
        signals = sample_agent_signals(minority, baseline, rng)
        total += ranking_free_values(signals, minority, baseline.gamma)
        x_wrong = int(signals.x != minority.omega)
        z_wrong = int(signals.z != minority.majority_signal)
        cells[f"{x_wrong}{z_wrong}"] += 1

    table = expected_value_table(minority, baseline.gamma)
    expected = sum(
        weight * table.cell(name)
        for name, weight in cell_weights(baseline).items()
    )
    assert total / draws == pytest.approx(expected, abs=2e-3)
    for name, weight in cell_weights(baseline).items():
        assert cells[name] / draws == pytest.approx(weight, abs=0.015)
