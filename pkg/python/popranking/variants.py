"""
Model variants: ordinal ranked lists with realized clicks, and interim
profiles where outlets merge so the total count moves with L.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .choice import (
    expected_choice,
    expected_value_table,
    sample_choice,
    value_vectors,
    weighted_choice,
)
from .core import RngLike, fix_realization, make_rng, tie_resolved
from .limits import class_limit
from .models import (
    InterimRealization,
    ModelParams,
    OrdinalState,
    ParameterError,
    TrajectoryRecord,
)

logger = logging.getLogger(__name__)

DEFAULT_BETA = 1.5


def bottom_ranked_positions(real: InterimRealization) -> np.ndarray:
    """Incorrect websites on top in index order, correct ones below them."""
    order = np.concatenate(
        [np.flatnonzero(~real.correct_mask), np.flatnonzero(real.correct_mask)]
    )
    positions = np.empty(real.M, dtype=int)
    positions[order] = np.arange(1, real.M + 1)
    return positions


def simulate_ordinal(
    params: ModelParams,
    real: InterimRealization,
    initial_positions,
    N: int,
    beta: float = DEFAULT_BETA,
    rng_seed: RngLike = None,
) -> TrajectoryRecord:
    """
    Run N agents against a ranked list. Each agent weights website m by
    beta ** (M - rank_m), clicks once, and the list is re-sorted by clicks.

    ``rankings`` holds the normalized position weights each agent faced.
    """
    if N < 1:
        msg = f"Horizon must be at least 1, got {N}"
        raise ParameterError(msg)
    if len(initial_positions) != real.M:
        msg = (
            f"Expected {real.M} initial positions, "
            f"got {len(initial_positions)}"
        )
        raise ParameterError(msg)

    state = OrdinalState.initial(initial_positions, beta)
    rng = make_rng(rng_seed)
    if not params.sophisticated:
        real = tie_resolved(real, rng)
    vectors = value_vectors(real, params.gamma)

    omega = real.omega
    target = real.omega if params.sophisticated else real.majority_signal
    xs = np.where(rng.random(N) < params.p, omega, 1 - omega)
    zs = np.where(rng.random(N) < params.z_accuracy, target, 1 - target)

    rankings = np.empty((N, real.M))
    choices = np.empty((N, real.M))
    positions = np.empty((N, real.M), dtype=int)
    clicks = np.empty(N, dtype=int)
    fallbacks = 0

    for t in range(N):
        weights = state.position_weights()
        values, fallback = vectors[(int(xs[t]), int(zs[t]))]
        if fallback:
            rho = values
            fallbacks += 1
        else:
            rho = weighted_choice(weights, values, 1.0)
        rankings[t] = weights / weights.sum()
        choices[t] = rho
        positions[t] = state.positions
        clicks[t] = sample_choice(rho, rng)
        state = state.record_click(int(clicks[t]))

    final = state.position_weights()
    table = expected_value_table(real, params.gamma, params.sophisticated)
    return TrajectoryRecord(
        rankings=rankings,
        choices=choices,
        final_ranking=final / final.sum(),
        clicks=clicks,
        positions=positions,
        terminal_choice=expected_choice(
            final, table, params.replace(alpha=1.0)
        ),
        edge_fallbacks=fallbacks,
    )


def _ordinal_one(task):
    params, real, N, beta, seed = task
    record = simulate_ordinal(
        params, real, bottom_ranked_positions(real), N, beta, seed
    )
    return record.terminal_class_mass(real.correct_mask)


def ordinal_interim_profile(
    params: ModelParams,
    beta: float = DEFAULT_BETA,
    N: int = 1000,
    reps: int = 500,
    seed: int = 0,
    jobs: int = 1,
    L_values=None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Monte Carlo interim efficiency of the ordinal variant, starting every
    run with the correct websites at the bottom of the list. Returns the
    mean terminal click mass on correct websites and its standard error.
    """
    L_values = list(range(params.M + 1)) if L_values is None else L_values
    root = np.random.SeedSequence(seed)
    tasks = []
    for L, child in zip(L_values, root.spawn(len(L_values))):
        real = fix_realization(1, L, params)
        tasks.extend((params, real, N, beta, s) for s in child.spawn(reps))

    logger.info(
        "Ordinal profile: %s values of L, %s reps, beta=%s",
        len(L_values),
        reps,
        beta,
    )
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            samples = list(pool.map(_ordinal_one, tasks, chunksize=16))
    else:
        samples = [_ordinal_one(task) for task in tasks]

    samples = np.asarray(samples).reshape(len(L_values), reps)
    means = samples.mean(axis=1)
    if reps > 1:
        errors = samples.std(axis=1, ddof=1) / np.sqrt(reps)
    else:
        errors = np.zeros(len(L_values))
    return means, errors


def merging_sweep(
    params: ModelParams, J_fixed: int, L_range=None
) -> np.ndarray:
    """
    Limit click mass on correct websites when J_fixed incorrect websites
    stay put and the correct count L varies, so M = J_fixed + L.
    """
    if J_fixed < 1:
        msg = f"J must be at least 1, got {J_fixed}"
        raise ParameterError(msg)
    L_range = range(0, 2 * J_fixed + 1) if L_range is None else L_range

    values = []
    for L in L_range:
        if L < 0:
            msg = f"L must be nonnegative, got {L}"
            raise ParameterError(msg)
        if L == 0:
            values.append(0.0)
            continue
        values.append(class_limit(params.replace(M=J_fixed + L), L))
    logger.debug("Merging sweep J=%s: %s", J_fixed, values)
    return np.asarray(values)

