import numpy as np
import pytest
from scipy import stats

from popranking.core import (
    check_ranking,
    fix_realization,
    is_on_simplex,
    majority_informativeness,
    project_to_floor,
    sample_agent_signals,
    sample_realization,
    tie_resolved,
    uniform_ranking,
    validate,
)
from popranking.models import (
    InterimRealization,
    ModelParams,
    ParameterError,
    SignalModel,
    TieError,
)


def test_validate_baseline(baseline):
    report = validate(baseline)
    assert report.ok
    assert not report.flags
    assert validate(baseline, strict=True).ok


def test_validate_collects_violations():
    report = validate(ModelParams(p=0.4, q=1.2, gamma=1.5, M=1, kappa=0))
    assert not report
    assert "0.5 < p < 1.0" in report.violations
    assert "0.5 < q < 1.0" in report.violations
    assert "0 <= gamma <= 1" in report.violations
    assert "M >= 2" in report.violations
    assert "kappa >= 1" in report.violations


def test_validate_flags_boundary_values():
    params = ModelParams(p=0.5, mu=0.5)
    report = validate(params)
    assert report.ok
    assert len(report.flags) == 3
    assert not validate(params, strict=True).ok


def test_validate_strict_informativeness():
    # mu * q = 0.49 is less informative than the private signal
    params = ModelParams(p=0.55, q=0.7, mu=0.7)
    assert validate(params).ok
    assert "mu·q > p" in validate(params, strict=True).violations
    assert "relaxed: mu·q=0.49 <= p=0.55" in validate(params).flags


def test_sophisticated_needs_mu_hat():
    with pytest.raises(ParameterError):
        ModelParams(signal_model=SignalModel.SOPHISTICATED)
    params = ModelParams(signal_model="sophisticated", mu_hat=0.95)
    assert params.sophisticated
    assert params.z_accuracy == 0.95


def test_majority_informativeness_bounds(baseline):
    value = majority_informativeness(baseline)
    assert 0.5 < value < baseline.mu
    assert majority_informativeness(baseline.replace(mu=1.0)) > value


def test_fix_realization(baseline):
    real = fix_realization(1, 7, baseline)
    assert real.L == 7
    assert real.L_set == tuple(range(7))
    assert real.majority_signal == 0
    assert not real.majority_correct
    assert list(real.class_sizes()[:7]) == [7] * 7
    assert list(real.class_sizes()[7:]) == [13] * 13

    with pytest.raises(ParameterError):
        fix_realization(1, 21, baseline)


def test_tied_realization(baseline):
    real = fix_realization(0, 10, baseline)
    assert real.is_tie
    with pytest.raises(TieError):
        real.require_majority()
    with pytest.raises(TieError):
        sample_agent_signals(real, baseline, rng_seed=1)

    resolved = tie_resolved(real, 3)
    assert resolved.majority_signal in (0, 1)
    assert tie_resolved(resolved) is resolved
    signals = sample_agent_signals(resolved, baseline, rng_seed=1)
    assert signals.x in (0, 1)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_tie_coin_shared_by_every_agent(seed):
    params = ModelParams(p=0.55, mu=1.0, gamma=0.33, M=20)
    real = fix_realization(1, 10, params, tie_seed=seed)
    assert not real.is_tie
    # with mu = 1 the second signal is the perceived majority itself
    perceived = {
        sample_agent_signals(real, params, rng_seed=agent).z
        for agent in range(50)
    }
    assert perceived == {real.majority_signal}
    assert real == fix_realization(1, 10, params, tie_seed=seed)


def test_realization_rejects_non_bits():
    with pytest.raises(ParameterError):
        InterimRealization.from_signals(2, [0, 1])
    with pytest.raises(ParameterError):
        InterimRealization.from_signals(1, [0, 3])


def test_sample_realization_is_reproducible(baseline):
    first = sample_realization(baseline, 42)
    assert first == sample_realization(baseline, 42)
    assert first.M == baseline.M

    rng = np.random.default_rng(7)
    draws = [sample_realization(baseline, rng).L for _ in range(2000)]
    assert np.mean(draws) == pytest.approx(baseline.q * baseline.M, abs=0.2)


def test_correct_count_is_binomial(baseline):
    rng = np.random.default_rng(23)
    draws = 5000
    counts = np.bincount(
        [sample_realization(baseline, rng).L for _ in range(draws)],
        minlength=baseline.M + 1,
    )
    pmf = stats.binom.pmf(np.arange(baseline.M + 1), baseline.M, baseline.q)
    # pool the sparse lower tail and the last two counts
    edges = [0, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 21]
    observed = np.add.reduceat(counts, edges[:-1])
    expected = np.add.reduceat(pmf, edges[:-1]) * draws
    _, p_value = stats.chisquare(observed, expected)
    assert p_value > 1e-3


def test_agent_signal_frequencies(baseline, majority):
    rng = np.random.default_rng(11)
    draws = [
        sample_agent_signals(majority, baseline, rng) for _ in range(4000)
    ]
    x_correct = np.mean([s.x == majority.omega for s in draws])
    z_correct = np.mean([s.z == majority.majority_signal for s in draws])
    assert x_correct == pytest.approx(baseline.p, abs=0.03)
    assert z_correct == pytest.approx(baseline.mu, abs=0.02)


def test_rankings_and_floor():
    r = uniform_ranking(4)
    assert is_on_simplex(r)
    assert check_ranking(r, 4, interior=True) is not None

    with pytest.raises(ParameterError):
        check_ranking([0.5, 0.6], 2)
    with pytest.raises(ParameterError):
        check_ranking(r, 5)
    with pytest.raises(ParameterError):
        check_ranking([1.0, 0.0], 2, interior=True)

    floored = project_to_floor(np.array([1.0, 0.0, 0.0]), 1e-3)
    assert is_on_simplex(floored)
    assert floored.min() > 0
