"""
Efficiency and polarization metrics computed from limit class masses.
"""

from __future__ import annotations

import logging
import math
from functools import lru_cache

import numpy as np
from scipy import stats

from .core import fix_realization, uniform_ranking
from .dynamics import personalized_mean_dynamics, replicate
from .limits import class_limit, solve_personalized_limit
from .models import (
    EfficiencyReport,
    GroupConfig,
    InterimRealization,
    ModelParams,
    ParameterError,
    PersistenceSchedule,
    RankingRegime,
    RegimeError,
    TieError,
)

logger = logging.getLogger(__name__)


@lru_cache(maxsize=512)
def _interim(
    params: ModelParams, regime: RankingRegime, group: GroupConfig | None
) -> np.ndarray:
    M = params.M
    if regime is RankingRegime.POPULARITY:
        values = [class_limit(params, L) for L in range(M + 1)]
    elif regime is RankingRegime.RANDOM:
        random = params.replace(alpha=0.0)
        values = [class_limit(random, L) for L in range(M + 1)]
    else:
        if group is None:
            msg = "Personalized efficiency needs a GroupConfig"
            raise ParameterError(msg)
        values = []
        for L in range(M + 1):
            real = fix_realization(1, L, params)
            result_a, result_b = solve_personalized_limit(params, group, real)
            values.append(
                group.share_a * result_a.mass
                + (1 - group.share_a) * result_b.mass
            )
    interim = np.asarray(values, dtype=float)
    interim.setflags(write=False)
    return interim


def interim_efficiency(
    params: ModelParams,
    ranking_regime: RankingRegime = RankingRegime.POPULARITY,
    group: GroupConfig | None = None,
) -> np.ndarray:
    """
    Limit click mass on correct websites for every L in 0..M.

    Args:
        params: Model parameters
        ranking_regime: Popularity, random or personalized ranking
        group: Group configuration, required for personalized ranking

    Returns:
        Array of M + 1 interim efficiencies
    """
    ranking_regime = RankingRegime(ranking_regime)
    if ranking_regime is not RankingRegime.PERSONALIZED:
        group = None
    return _interim(params, ranking_regime, group).copy()


def binomial_weights(M: int, q: float) -> np.ndarray:
    return stats.binom.pmf(np.arange(M + 1), M, q)


def ex_ante_efficiency(interim: np.ndarray, q: float) -> float:
    """
    Args:
        interim: Interim efficiencies for L = 0..M
        q: Website accuracy

    Returns:
        Interim efficiency averaged over L ~ Binomial(M, q)
    """
    interim = np.asarray(interim, dtype=float)
    M = len(interim) - 1
    return float(np.dot(binomial_weights(M, q), interim))


def net_of_aof(
    params: ModelParams,
    q: float,
    ranking_regime: RankingRegime = RankingRegime.POPULARITY,
    interim: np.ndarray | None = None,
) -> float:
    """
    Ex-ante efficiency with every minority and majority L replaced by the
    interim values at ceil(M/4) and ceil(3M/4). A tie counts half to each.

    Args:
        params: Model parameters
        q: Website accuracy
        ranking_regime: Regime the interim values come from
        interim: Precomputed interim values, skipping the solver

    Returns:
        Net-of-AOF ex-ante efficiency
    """
    if interim is None:
        interim = interim_efficiency(params, ranking_regime)
    M = params.M
    low = interim[math.ceil(M / 4)]
    high = interim[math.ceil(3 * M / 4)]

    total = 0.0
    weights = binomial_weights(M, q)
    for k in range(1, M):
        if 2 * k < M:
            total += weights[k] * low
        elif 2 * k > M:
            total += weights[k] * high
        else:
            total += weights[k] * 0.5 * (low + high)
    return float(total + q**M)


def por(params: ModelParams, q: float) -> float:
    """Ex-ante efficiency under popularity ranking minus random ranking."""
    popularity = interim_efficiency(params, RankingRegime.POPULARITY)
    random = interim_efficiency(params, RankingRegime.RANDOM)
    return ex_ante_efficiency(popularity, q) - ex_ante_efficiency(random, q)


def per(params: ModelParams, group: GroupConfig, q: float) -> float:
    """Ex-ante efficiency with personalization lambda minus without."""
    personalized = interim_efficiency(
        params, RankingRegime.PERSONALIZED, group
    )
    shared = interim_efficiency(
        params, RankingRegime.PERSONALIZED, group.with_lambda(0.0)
    )
    return ex_ante_efficiency(personalized, q) - ex_ante_efficiency(shared, q)


def belief_polarization(
    params: ModelParams,
    group: GroupConfig,
    real: InterimRealization,
    horizon: int | None = None,
    schedule: PersistenceSchedule | None = None,
    tie_rule: bool = False,
) -> float:
    """
    Gap between the groups' expected click mass on the website majority,
    in the limit or after ``horizon`` agents of the mean dynamics.

    The gap on the majority class equals the gap on the correct class, since
    one is the complement of the other whenever they differ.

    Args:
        params: Model parameters
        group: Group gammas and personalization lambda
        real: Interim realization
        horizon: Agents of the mean dynamics, or None for the limit
        schedule: Persistence schedule of the mean dynamics
        tie_rule: Allow a tied realization, averaging both branches

    Returns:
        Absolute gap in click mass between the groups
    """
    if real.is_tie and not tie_rule:
        msg = f"Belief polarization is undefined for the tie in {real}"
        raise TieError(msg)

    mask = real.correct_mask
    if horizon is None:
        result_a, result_b = solve_personalized_limit(params, group, real)
        return abs(result_a.mass - result_b.mass)

    r1 = uniform_ranking(real.M)
    record_a, record_b = personalized_mean_dynamics(
        params, group, real, r1, r1, horizon, schedule
    )
    return abs(
        record_a.terminal_class_mass(mask) - record_b.terminal_class_mass(mask)
    )


def _side(L: int, M: int) -> str:
    if 0 < 2 * L < M:
        return "minority"
    if M < 2 * L < 2 * M:
        return "majority"
    msg = f"L={L} is neither a strict minority nor a strict majority of {M}"
    raise RegimeError(msg)


def aof_amplification(params: ModelParams, L_from: int, L_to: int) -> float:
    """
    Ratio of limit click masses P_{L_to} / P_{L_from} on one side of M/2.

    Returns:
        The ratio, 1.0 when L_from == L_to
    """
    if _side(L_from, params.M) != _side(L_to, params.M):
        msg = f"L={L_from} and L={L_to} lie on different sides of M/2"
        raise RegimeError(msg)
    if L_from == L_to:
        return 1.0
    start = class_limit(params, L_from)
    if start <= 0:
        msg = f"Zero limit click mass at L={L_from}"
        raise ParameterError(msg)
    return class_limit(params, L_to) / start


def efficiency_report(
    params: ModelParams,
    ranking_regime: RankingRegime,
    q: float,
    group: GroupConfig | None = None,
) -> EfficiencyReport:
    ranking_regime = RankingRegime(ranking_regime)
    interim = interim_efficiency(params, ranking_regime, group)
    return EfficiencyReport(
        interim=interim,
        ex_ante=ex_ante_efficiency(interim, q),
        ex_ante_net=net_of_aof(params, q, interim=interim),
        regime=ranking_regime,
        q=q,
        params_hash=params.hash(),
        lambda_=group.lambda_ if group is not None else None,
    )


def monte_carlo_interim(
    params: ModelParams,
    N: int,
    reps: int,
    seed: int = 0,
    jobs: int = 1,
    schedule: PersistenceSchedule | None = None,
    L_values=None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Interim efficiency re-estimated from stochastic terminal states, with
    standard errors. Used to validate the limit computations.

    Args:
        params: Model parameters
        N: Agents per replication
        reps: Replications per L
        seed: Base seed, offset by the position of L
        jobs: Worker processes
        schedule: Persistence schedule
        L_values: Correct counts to estimate, 0..M by default

    Returns:
        Means and standard errors in the order of ``L_values``
    """
    L_values = list(range(params.M + 1)) if L_values is None else L_values
    means = np.empty(len(L_values))
    errors = np.empty(len(L_values))
    for i, L in enumerate(L_values):
        real = fix_realization(1, L, params)
        means[i], errors[i], _ = replicate(
            params,
            real,
            N,
            reps,
            schedule=schedule,
            seed=seed + i,
            jobs=jobs,
        )
        logger.debug("L=%s: %.6f ± %.6f", L, means[i], errors[i])
    return means, errors
