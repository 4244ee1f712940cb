import numpy as np
import pytest

from popranking.core import fix_realization, is_on_simplex, uniform_ranking
from popranking.dynamics import (
    integrate_ode,
    mean_dynamics_recursion,
    personalized_mean_dynamics,
    replicate,
    rich_get_richer_initial_ranking,
    rich_get_richer_ratio,
    simulate,
    simulate_personalized,
    step_ranking,
)
from popranking.limits import class_limit
from popranking.models import (
    FeedbackMode,
    ModelParams,
    ParameterError,
    PersistenceSchedule,
)


def test_step_ranking_moves_towards_feedback():
    r = uniform_ranking(4)
    feedback = np.array([1.0, 0.0, 0.0, 0.0])
    stepped = step_ranking(r, feedback, 99)
    assert stepped[0] == pytest.approx(0.25 + 0.75 / 100)
    assert is_on_simplex(stepped)


def test_schedules():
    constant = PersistenceSchedule.constant(50)
    growing = PersistenceSchedule.growing(100, 2.0)
    assert constant.kappa_at(1000) == 50
    assert growing.kappa_at(10) == 120
    with pytest.raises(ParameterError):
        PersistenceSchedule.constant(0.5)
    with pytest.raises(ParameterError):
        PersistenceSchedule.growing(100, -1.0)


def test_simulate_stays_on_simplex(baseline, minority):
    record = simulate(baseline, minority, uniform_ranking(20), 300, rng_seed=3)
    assert record.N == 300
    assert record.M == 20
    assert record.clicks is None
    assert all(is_on_simplex(row) for row in record.rankings)
    assert all(is_on_simplex(row) for row in record.choices)
    assert is_on_simplex(record.final_ranking)


def test_simulate_realized_clicks(baseline, minority):
    record = simulate(
        baseline,
        minority,
        uniform_ranking(20),
        200,
        mode=FeedbackMode.REALIZED_CLICK,
        rng_seed=3,
    )
    assert record.clicks.shape == (200,)
    assert record.clicks.min() >= 0
    assert record.clicks.max() < 20
    assert is_on_simplex(record.final_ranking)


def test_simulate_is_reproducible(baseline, minority):
    first = simulate(baseline, minority, uniform_ranking(20), 100, rng_seed=9)
    second = simulate(baseline, minority, uniform_ranking(20), 100, rng_seed=9)
    other = simulate(baseline, minority, uniform_ranking(20), 100, rng_seed=10)
    assert np.array_equal(first.choices, second.choices)
    assert not np.array_equal(first.choices, other.choices)


def test_simulate_rejects_bad_input(baseline, minority):
    with pytest.raises(ParameterError):
        simulate(baseline, minority, uniform_ranking(20), 0)
    with pytest.raises(ParameterError):
        simulate(baseline, minority, uniform_ranking(19), 10)


def test_mean_dynamics_approaches_limit(baseline, majority):
    record = mean_dynamics_recursion(
        baseline, majority, uniform_ranking(20), 20_000
    )
    mass = record.terminal_class_mass(majority.correct_mask)
    assert mass == pytest.approx(class_limit(baseline, 15), abs=1e-4)


def test_random_ranking_keeps_the_start(baseline, minority):
    record = mean_dynamics_recursion(
        baseline, minority, uniform_ranking(20), 50, random_ranking=True
    )
    assert np.allclose(record.rankings, 1 / 20)
    assert record.terminal_class_mass(minority.correct_mask) == pytest.approx(
        record.class_mass(minority.correct_mask)[0]
    )


def test_ode_rest_point_matches_limit(baseline, minority, majority):
    for real, L in ((minority, 7), (majority, 15)):
        rest = integrate_ode(baseline, real, uniform_ranking(20))
        assert is_on_simplex(rest, 1e-9)
        assert rest[real.correct_mask].sum() == pytest.approx(
            class_limit(baseline, L), abs=1e-6
        )


def test_tie_averages_both_branches(baseline):
    real = fix_realization(1, 10, baseline)
    rest = integrate_ode(baseline, real, uniform_ranking(20))
    assert rest[real.correct_mask].sum() == pytest.approx(
        class_limit(baseline, 10), abs=1e-6
    )


def test_rich_get_richer_ratios():
    params = ModelParams(p=0.55, mu=1.0, gamma=0.0, M=20, kappa=100)
    real = fix_realization(1, 15, params)
    r1 = rich_get_richer_initial_ranking(20)
    assert r1.sum() == pytest.approx(1.0)
    assert r1[0] > r1[1]

    def ratios(alpha):
        record = mean_dynamics_recursion(
            params.replace(alpha=alpha), real, r1, 1000
        )
        return rich_get_richer_ratio(record, 0, 1)

    assert np.ptp(ratios(1.0)) < 1e-12
    assert np.all(np.diff(ratios(1.25)) > 0)
    poorer = ratios(0.5)
    assert np.all(np.diff(poorer) < 0)
    assert poorer[-1] > 1.0


def test_faster_than_linear_attention_separates_ratios():
    params = ModelParams(p=0.55, mu=1.0, gamma=0.0, M=20, kappa=100)
    real = fix_realization(1, 15, params)
    r1 = rich_get_richer_initial_ranking(20)
    linear = mean_dynamics_recursion(params, real, r1, 1000)
    richer = mean_dynamics_recursion(
        params.replace(alpha=1.25), real, r1, 1000
    )
    linear_ratio = rich_get_richer_ratio(linear, 0, 1)
    richer_ratio = rich_get_richer_ratio(richer, 0, 1)
    assert linear_ratio[-1] == pytest.approx(1.017857, abs=1e-6)
    assert richer_ratio[-1] - linear_ratio[-1] > 0.3


@pytest.mark.parametrize("L", [3, 10, 15])
def test_alpha_zero_equals_frozen_ranking(baseline, L):
    real = fix_realization(1, L, baseline)
    r1 = uniform_ranking(20)
    flat = mean_dynamics_recursion(baseline.replace(alpha=0.0), real, r1, 200)
    frozen = mean_dynamics_recursion(
        baseline, real, r1, 200, random_ranking=True
    )
    assert np.max(np.abs(flat.choices - frozen.choices)) <= 1e-15
    assert flat.terminal_class_mass(real.correct_mask) == pytest.approx(
        class_limit(baseline.replace(alpha=0.0), L), abs=1e-12
    )


def test_personalized_simulation(baseline, groups, majority):
    record_a, record_b = simulate_personalized(
        baseline,
        groups.with_lambda(0.5),
        majority,
        uniform_ranking(20),
        uniform_ranking(20),
        300,
        rng_seed=4,
    )
    assert record_a.group == "A"
    assert record_b.group == "B"
    assert set(np.unique(record_a.groups)) <= {"A", "B"}
    assert all(is_on_simplex(row) for row in record_a.rankings)
    assert all(is_on_simplex(row) for row in record_b.rankings)
    assert np.array_equal(record_a.choices, record_b.choices)


def test_shared_ranking_without_personalization(baseline, groups, majority):
    record_a, record_b = personalized_mean_dynamics(
        baseline,
        groups,
        majority,
        uniform_ranking(20),
        uniform_ranking(20),
        200,
    )
    assert np.allclose(record_a.rankings, record_b.rankings)
    assert not np.allclose(record_a.choices, record_b.choices)


def test_replicate_is_independent_of_jobs(baseline, majority):
    mean, stderr, samples = replicate(baseline, majority, 200, 4, seed=1)
    again, _, _ = replicate(baseline, majority, 200, 4, seed=1, jobs=2)
    assert samples.shape == (4,)
    assert stderr >= 0
    assert mean == pytest.approx(again, abs=1e-15)
