"""
Ranking-free values, ranking-weighted choice and its expectation over
agent signals.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from .models import (
    AgentSignals,
    ChoiceError,
    ExpectedValueTable,
    InterimRealization,
    ModelParams,
)

logger = logging.getLogger(__name__)


def ranking_free_values(
    signals: AgentSignals, real: InterimRealization, gamma: float
) -> np.ndarray:
    y = real.signals
    match_x = y == signals.x
    match_z = y == signals.z
    numerators = np.select(
        [match_x & match_z, match_x, match_z],
        [1.0, gamma, 1.0 - gamma],
        default=0.0,
    )
    return numerators / real.class_sizes()


def fallback_values(
    signals: AgentSignals, real: InterimRealization
) -> np.ndarray:
    """
    Uniform values over websites matching either agent signal, or over all
    websites if none does. Used where every ranking-free value is zero.
    """
    y = real.signals
    mask = (y == signals.x) | (y == signals.z)
    if not mask.any():
        mask = np.ones(real.M, dtype=bool)
    return mask / mask.sum()


def weighted_choice(
    ranking: np.ndarray, vstar: np.ndarray, alpha: float
) -> np.ndarray:
    weights = np.power(np.asarray(ranking, dtype=float), alpha)
    peak = weights.max()
    if peak > 0:
        weights = weights / peak
    scores = weights * vstar
    total = scores.sum()
    if not total > 0:
        msg = "Every ranking-weighted value is zero"
        raise ChoiceError(msg)
    return scores / total


def value_vectors(
    real: InterimRealization, gamma: float
) -> dict[tuple[int, int], tuple[np.ndarray, bool]]:
    """
    Ranking-free values for every (x, z) pair, with a flag telling whether
    the uniform fallback replaced an all-zero vector.
    """
    vectors = {}
    for x in (0, 1):
        for z in (0, 1):
            signals = AgentSignals(x, z)
            values = ranking_free_values(signals, real, gamma)
            fallback = not values.any()
            if fallback:
                values = fallback_values(signals, real)
            vectors[(x, z)] = (values, fallback)
    return vectors


def choice_for_signals(
    ranking: np.ndarray,
    signals: AgentSignals,
    real: InterimRealization,
    gamma: float,
    alpha: float,
) -> tuple[np.ndarray, bool]:
    """Choice distribution of one agent and whether edge_fallback fired."""
    values = ranking_free_values(signals, real, gamma)
    if not values.any():
        logger.debug("Edge fallback for %s in %s", signals, real)
        return fallback_values(signals, real), True
    return weighted_choice(ranking, values, alpha), False


def expected_value_table(
    real: InterimRealization, gamma: float, sophisticated: bool = False
) -> ExpectedValueTable:
    """
    Expected ranking-free values for the four signal cells. With no correct
    website, or only correct ones, every cell is uniform over all websites.
    """
    M = real.M
    if real.L in (0, M):
        uniform = np.full(M, 1.0 / M)
        return ExpectedValueTable(uniform, uniform, uniform, uniform)

    if sophisticated:
        target = real.omega
    else:
        real.require_majority()
        target = real.majority_signal

    cells = {}
    for x_wrong in (0, 1):
        for z_wrong in (0, 1):
            x = real.omega if not x_wrong else 1 - real.omega
            z = target if not z_wrong else 1 - target
            cells[f"v{x_wrong}{z_wrong}"] = ranking_free_values(
                AgentSignals(x, z), real, gamma
            )
    return ExpectedValueTable(**cells)


def cell_weights(params: ModelParams) -> dict[str, float]:
    p, mu = params.p, params.z_accuracy
    return {
        "00": p * mu,
        "01": p * (1 - mu),
        "10": (1 - p) * mu,
        "11": (1 - p) * (1 - mu),
    }


def expected_choice(
    ranking: np.ndarray, table: ExpectedValueTable, params: ModelParams
) -> np.ndarray:
    rho = np.zeros(table.M)
    for name, weight in cell_weights(params).items():
        if weight == 0:
            continue
        rho += weight * weighted_choice(
            ranking, table.cell(name), params.alpha
        )
    return rho


def class_total(probs: np.ndarray, mask: np.ndarray) -> float:
    return float(np.asarray(probs)[np.asarray(mask, dtype=bool)].sum())


def sample_choice(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Index of one realized click."""
    cumulative = np.cumsum(probs)
    draw = rng.random() * cumulative[-1]
    index = int(np.searchsorted(cumulative, draw, side="right"))
    return min(index, len(probs) - 1)


def value_table_csv(
    real: InterimRealization, gamma: float, path: str | Path
) -> Path:
    return expected_value_table(real, gamma).to_csv(path)

