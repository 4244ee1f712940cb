# MIT License

# Copyright (c) 2026 The popranking authors

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

"""
Parameter checks, interim realizations and signal sampling.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy import stats

from .models import (
    AgentSignals,
    InterimRealization,
    ModelParams,
    ParameterError,
    TieError,
    ValidationReport,
)

logger = logging.getLogger(__name__)

EPSILON_FLOOR = 1e-9
TOLERANCE = 1e-12
SIMPLEX_TOLERANCE = 1e-12

RngLike = int | np.random.Generator | np.random.SeedSequence | None


def make_rng(seed: RngLike) -> np.random.Generator:
    """A Generator from a seed, a SeedSequence or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _open_interval(name, value, low, high, report, strict):
    if low < value < high:
        return
    if strict or not (low - TOLERANCE <= value <= high + TOLERANCE):
        report.violations.append(f"{low} < {name} < {high}")
    else:
        report.flags.append(f"boundary value: {name}={value}")


def validate(params: ModelParams, strict: bool = False) -> ValidationReport:
    """
    List the parameter restrictions ``params`` violates.

    Without ``strict`` the probability bounds may be attained (p = 1/2 or
    q = 1 for example); such values are flagged instead of rejected, and so
    is a perceived majority signal no more informative than the private
    one (mu·q <= p). With ``strict`` the informativeness ordering is
    enforced.
    """
    report = ValidationReport()

    _open_interval("p", params.p, 0.5, 1.0, report, strict)
    _open_interval("q", params.q, 0.5, 1.0, report, strict)

    if not 0.5 < params.mu <= 1.0:
        if strict or not 0.5 - TOLERANCE <= params.mu <= 1.0:
            report.violations.append("1/2 < mu <= 1")
        else:
            report.flags.append(f"boundary value: mu={params.mu}")

    if not 0.0 <= params.gamma <= 1.0:
        report.violations.append("0 <= gamma <= 1")
    if params.alpha < 0:
        report.violations.append("alpha >= 0")
    if params.M < 2:
        report.violations.append("M >= 2")
    if params.kappa < 1:
        report.violations.append("kappa >= 1")

    if params.sophisticated and not 0.5 <= params.mu_hat <= 1.0:
        report.violations.append("1/2 <= mu_hat <= 1")

    informative = params.mu * params.q
    if not informative > params.p + TOLERANCE and not strict:
        report.flags.append(
            f"relaxed: mu·q={informative:.4g} <= p={params.p:.4g}"
        )

    if strict:
        if not informative > params.p + TOLERANCE:
            report.violations.append("mu·q > p")
        if (
            params.sophisticated
            and not params.mu_hat > informative + TOLERANCE
        ):
            report.violations.append("mu_hat > mu·q")
        if not params.q > params.p + TOLERANCE:
            report.violations.append("q > p")
        if not majority_informativeness(params) > params.p + TOLERANCE:
            report.violations.append(
                "mu·P(majority correct) + (1−mu)·P(majority wrong) > p"
            )

    if report.violations:
        logger.debug("Validation of %s failed: %s", params, report.violations)
    return report


def majority_informativeness(params: ModelParams) -> float:
    """
    Ex-ante probability that the perceived website majority matches the
    true state. Ties count for neither side.
    """
    M = params.M
    half = M // 2
    # P(K > M/2) for K ~ Binomial(M, q), and the mirrored wrong-majority mass
    correct = stats.binom.sf(half, M, params.q)
    wrong = stats.binom.sf(half, M, 1 - params.q)
    return float(params.mu * correct + (1 - params.mu) * wrong)


def sample_realization(
    params: ModelParams, rng_seed: RngLike = None
) -> InterimRealization:
    rng = make_rng(rng_seed)
    omega = int(rng.integers(2))
    correct = rng.random(params.M) < params.q
    signals = np.where(correct, omega, 1 - omega)
    return InterimRealization.from_signals(omega, signals)


def fix_realization(
    omega: int,
    L_count: int,
    params: ModelParams,
    tie_seed: RngLike = None,
) -> InterimRealization:
    """
    Realization with the first ``L_count`` websites carrying omega. A tied
    majority stays unresolved unless ``tie_seed`` is given, in which case
    one coin drawn from it settles the majority for the whole realization.
    """
    if not 0 <= L_count <= params.M:
        msg = f"L must lie in [0, {params.M}], got {L_count}"
        raise ParameterError(msg)
    signals = [omega] * L_count + [1 - omega] * (params.M - L_count)
    real = InterimRealization.from_signals(omega, signals)
    if tie_seed is not None:
        real = tie_resolved(real, tie_seed)
    return real


def tie_resolved(
    real: InterimRealization, rng_seed: RngLike = None
) -> InterimRealization:
    """Break a tied website majority with one fair coin for the realization."""
    if not real.is_tie:
        return real
    rng = make_rng(rng_seed)
    bit = int(rng.integers(2))
    logger.debug("Tied majority in %s resolved to %s", real, bit)
    return real.with_majority(bit)


def z_target(real: InterimRealization, params: ModelParams) -> int:
    """The bit the agent's second signal is about in the active mode."""
    if params.sophisticated:
        return real.omega
    real.require_majority()
    return real.majority_signal


def sample_agent_signals(
    real: InterimRealization,
    params: ModelParams,
    rng_seed: RngLike = None,
) -> AgentSignals:
    """
    Draw one agent's signals. A tied majority must already be settled for
    the realization with tie_resolved, so every agent of a run perceives
    the same majority.
    """
    rng = make_rng(rng_seed)
    if not params.sophisticated and real.is_tie:
        msg = (
            f"Cannot sample the perceived majority of {real}, "
            "resolve the tie for the realization first"
        )
        raise TieError(msg)

    target = z_target(real, params)
    x = real.omega if rng.random() < params.p else 1 - real.omega
    z = target if rng.random() < params.z_accuracy else 1 - target
    return AgentSignals(int(x), int(z))


def uniform_ranking(M: int) -> np.ndarray:
    return np.full(M, 1.0 / M)


def is_on_simplex(vec: np.ndarray, tol: float = SIMPLEX_TOLERANCE) -> bool:
    vec = np.asarray(vec, dtype=float)
    return bool(np.all(vec >= -tol) and abs(vec.sum() - 1.0) <= tol * len(vec))


def check_ranking(
    ranking: np.ndarray, M: int | None = None, interior: bool = False
) -> np.ndarray:
    ranking = np.asarray(ranking, dtype=float)
    if ranking.ndim != 1 or (M is not None and len(ranking) != M):
        msg = (
            f"Ranking must be a vector of length {M}, "
            f"got shape {ranking.shape}"
        )
        raise ParameterError(msg)
    if not is_on_simplex(ranking):
        msg = f"Ranking is not on the simplex (sum={ranking.sum()!r})"
        raise ParameterError(msg)
    if interior and np.any(ranking <= 0):
        msg = "Initial ranking must be interior (every entry positive)"
        raise ParameterError(msg)
    return ranking


def project_to_floor(
    vec: np.ndarray, eps: float = EPSILON_FLOOR
) -> np.ndarray:
    """Clamp entries to at least ``eps`` and renormalize."""
    vec = np.maximum(np.asarray(vec, dtype=float), eps)
    return vec / vec.sum()
