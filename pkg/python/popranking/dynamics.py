"""
Ranking trajectories: stochastic simulation, the deterministic mean
dynamics, the ODE they track and the two-group personalized variants.
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
from .core import (
    EPSILON_FLOOR,
    RngLike,
    check_ranking,
    make_rng,
    project_to_floor,
    tie_resolved,
    uniform_ranking,
)
from .models import (
    ChoiceError,
    ConvergenceError,
    ExpectedValueTable,
    FeedbackMode,
    GroupConfig,
    InterimRealization,
    ModelParams,
    ParameterError,
    PersistenceSchedule,
    TrajectoryRecord,
)

logger = logging.getLogger(__name__)

ODE_STEP = 0.01
ODE_TOLERANCE = 1e-10
ODE_MAX_STEPS = 1_000_000


def step_ranking(
    r_prev: np.ndarray, rho_prev: np.ndarray, kappa_t: float
) -> np.ndarray:
    return (kappa_t * r_prev + rho_prev) / (kappa_t + 1.0)


def _schedule(params: ModelParams, schedule: PersistenceSchedule | None):
    if schedule is None:
        return PersistenceSchedule.constant(params.kappa)
    return schedule


def _check_horizon(N: int):
    if N < 1:
        msg = f"Horizon must be at least 1, got {N}"
        raise ParameterError(msg)


def _z_targets(real: InterimRealization, params: ModelParams) -> int:
    return real.omega if params.sophisticated else real.majority_signal


def _draw_signals(real, params, N, rng):
    """Signals of N agents as two bit arrays."""
    omega = real.omega
    target = _z_targets(real, params)
    xs = np.where(rng.random(N) < params.p, omega, 1 - omega)
    zs = np.where(rng.random(N) < params.z_accuracy, target, 1 - target)
    return xs, zs


def simulate(
    params: ModelParams,
    real: InterimRealization,
    r1: np.ndarray,
    N: int,
    schedule: PersistenceSchedule | None = None,
    mode: FeedbackMode = FeedbackMode.PROB_FEEDBACK,
    rng_seed: RngLike = None,
) -> TrajectoryRecord:
    """
    Run N sequential agents. Each draws signals, forms a choice
    distribution from the current ranking and feeds either that
    distribution or one realized click back into the ranking.

    Args:
        params: Model parameters
        real: Interim realization, a tie is resolved once for the run
        r1: Interior initial ranking
        N: Number of agents
        schedule: Persistence schedule, constant kappa by default
        mode: Feed back the choice distribution or one realized click
        rng_seed: Seed or Generator for the run

    Returns:
        TrajectoryRecord of rankings, choices and clicks
    """
    _check_horizon(N)
    r = check_ranking(r1, real.M, interior=True)
    schedule = _schedule(params, schedule)
    mode = FeedbackMode(mode)
    rng = make_rng(rng_seed)

    if not params.sophisticated:
        real = tie_resolved(real, rng)
    vectors = value_vectors(real, params.gamma)
    xs, zs = _draw_signals(real, params, N, rng)

    rankings = np.empty((N, real.M))
    choices = np.empty((N, real.M))
    clicks = (
        np.empty(N, dtype=int)
        if mode is FeedbackMode.REALIZED_CLICK
        else None
    )
    fallbacks = 0

    for t in range(N):
        values, fallback = vectors[(int(xs[t]), int(zs[t]))]
        if fallback:
            rho = values
            fallbacks += 1
        else:
            rho = weighted_choice(r, values, params.alpha)
        rankings[t] = r
        choices[t] = rho

        feedback = rho
        if clicks is not None:
            clicks[t] = sample_choice(rho, rng)
            feedback = np.zeros(real.M)
            feedback[clicks[t]] = 1.0
        r = step_ranking(r, feedback, schedule.kappa_at(t + 1))

    if fallbacks:
        logger.warning(
            "Edge fallback used for %s of %s agents in %s", fallbacks, N, real
        )

    table = expected_value_table(real, params.gamma, params.sophisticated)
    return TrajectoryRecord(
        rankings=rankings,
        choices=choices,
        final_ranking=r,
        clicks=clicks,
        terminal_choice=expected_choice(r, table, params),
        edge_fallbacks=fallbacks,
    )


def _branches(real: InterimRealization, params: ModelParams):
    """Realizations a deterministic computation averages over."""
    if real.is_tie and not params.sophisticated:
        return [real.with_majority(0), real.with_majority(1)]
    return [real]


def _mean_recursion(
    params: ModelParams,
    table: ExpectedValueTable,
    r1: np.ndarray,
    N: int,
    schedule: PersistenceSchedule,
    eps: float,
    random_ranking: bool,
):
    M = len(r1)
    rankings = np.empty((N, M))
    choices = np.empty((N, M))
    r = r1.copy()
    for t in range(N):
        rho = expected_choice(r, table, params)
        rankings[t] = r
        choices[t] = rho
        if not random_ranking:
            r = project_to_floor(
                r + (rho - r) / (1.0 + schedule.kappa_at(t + 1)), eps
            )
    return rankings, choices, r, expected_choice(r, table, params)


def mean_dynamics_recursion(
    params: ModelParams,
    real: InterimRealization,
    r1: np.ndarray,
    N: int,
    schedule: PersistenceSchedule | None = None,
    eps: float = EPSILON_FLOOR,
    random_ranking: bool = False,
) -> TrajectoryRecord:
    """
    Deterministic recursion obtained by replacing each agent's choice with
    its expectation over signals. With ``random_ranking`` the ranking is
    never updated. A tied website majority averages both branches.

    Args:
        params: Model parameters
        real: Interim realization
        r1: Interior initial ranking
        N: Number of agents
        schedule: Persistence schedule, constant kappa by default
        eps: Ranking floor
        random_ranking: Keep the ranking at ``r1``

    Returns:
        TrajectoryRecord of rankings and expected choices
    """
    _check_horizon(N)
    r1 = check_ranking(r1, real.M, interior=True)
    schedule = _schedule(params, schedule)

    runs = [
        _mean_recursion(
            params,
            expected_value_table(branch, params.gamma, params.sophisticated),
            r1,
            N,
            schedule,
            eps,
            random_ranking,
        )
        for branch in _branches(real, params)
    ]
    rankings, choices, final, terminal = (
        sum(parts) / len(runs) for parts in zip(*runs)
    )
    return TrajectoryRecord(
        rankings=rankings,
        choices=choices,
        final_ranking=final,
        terminal_choice=terminal,
    )


def _projected_flow(x, rho, eps):
    g = rho - x
    pinned = (x <= eps * (1 + 1e-6)) & (g < 0)
    g[pinned] = 0.0
    return g


def _integrate(params, table, x0, h, tol, max_steps, eps):
    def flow(x):
        return expected_choice(x, table, params) - x

    x = project_to_floor(x0, eps)
    residual = np.inf
    for step in range(max_steps):
        residual = np.abs(
            _projected_flow(x, expected_choice(x, table, params), eps)
        ).max()
        if residual < tol:
            logger.debug("ODE converged after %s steps", step)
            return x
        k1 = flow(x)
        k2 = flow(project_to_floor(x + 0.5 * h * k1, eps))
        k3 = flow(project_to_floor(x + 0.5 * h * k2, eps))
        k4 = flow(project_to_floor(x + h * k3, eps))
        x = project_to_floor(x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), eps)

    msg = "ODE integration did not reach a rest point"
    raise ConvergenceError(msg, residual, max_steps)


def integrate_ode(
    params: ModelParams,
    real: InterimRealization,
    x0: np.ndarray,
    h: float = ODE_STEP,
    tol: float = ODE_TOLERANCE,
    max_steps: int = ODE_MAX_STEPS,
    eps: float = EPSILON_FLOOR,
) -> np.ndarray:
    """
    Integrate x' = rho_hat(x) - x with classical RK4 on the floored simplex
    and return the rest point reached from ``x0``.

    Args:
        params: Model parameters
        real: Interim realization
        x0: Interior starting ranking
        h: RK4 step
        tol: Stop once the flow is smaller than this
        max_steps: Step budget before ConvergenceError
        eps: Ranking floor

    Returns:
        Rest point ranking
    """
    x0 = check_ranking(x0, real.M, interior=True)
    rest_points = [
        _integrate(
            params,
            expected_value_table(branch, params.gamma, params.sophisticated),
            x0,
            h,
            tol,
            int(max_steps),
            eps,
        )
        for branch in _branches(real, params)
    ]
    return sum(rest_points) / len(rest_points)


def _personalized_weights(kappa: float, lambda_: float):
    own = 1.0 / (1.0 + kappa)
    other = (1.0 - lambda_) / (1.0 - lambda_ + kappa)
    return own, other


def simulate_personalized(
    params: ModelParams,
    group: GroupConfig,
    real: InterimRealization,
    r1A: np.ndarray,
    r1B: np.ndarray,
    N: int,
    schedule: PersistenceSchedule | None = None,
    rng_seed: RngLike = None,
) -> tuple[TrajectoryRecord, TrajectoryRecord]:
    """
    Two groups with their own rankings. Each arriving agent belongs to A
    with probability ``share_a``; the agent's choice moves its own group's
    ranking with weight 1/(1+kappa) and the other group's with
    (1-lambda)/(1-lambda+kappa).

    Returns:
        TrajectoryRecord of group A and of group B
    """
    _check_horizon(N)
    rankings = {
        "A": check_ranking(r1A, real.M, interior=True),
        "B": check_ranking(r1B, real.M, interior=True),
    }
    schedule = _schedule(params, schedule)
    rng = make_rng(rng_seed)
    if not params.sophisticated:
        real = tie_resolved(real, rng)

    vectors = {
        name: value_vectors(real, group.gamma_for(name)) for name in "AB"
    }
    arrivals = np.where(rng.random(N) < group.share_a, "A", "B")
    xs, zs = _draw_signals(real, params, N, rng)

    history = {name: np.empty((N, real.M)) for name in "AB"}
    choices = np.empty((N, real.M))
    fallbacks = 0

    for t in range(N):
        arriving = str(arrivals[t])
        other = "B" if arriving == "A" else "A"
        values, fallback = vectors[arriving][(int(xs[t]), int(zs[t]))]
        if fallback:
            rho = values
            fallbacks += 1
        else:
            rho = weighted_choice(rankings[arriving], values, params.alpha)

        for name in "AB":
            history[name][t] = rankings[name]
        choices[t] = rho

        own, cross = _personalized_weights(
            schedule.kappa_at(t + 1), group.lambda_
        )
        rankings[arriving] = rankings[arriving] + own * (
            rho - rankings[arriving]
        )
        rankings[other] = rankings[other] + cross * (rho - rankings[other])

    records = []
    for name in "AB":
        group_params = group.params_for(params, name)
        table = expected_value_table(
            real, group_params.gamma, params.sophisticated
        )
        records.append(
            TrajectoryRecord(
                rankings=history[name],
                choices=choices,
                final_ranking=rankings[name],
                groups=arrivals,
                group=name,
                terminal_choice=expected_choice(
                    rankings[name], table, group_params
                ),
                edge_fallbacks=fallbacks,
            )
        )
    return records[0], records[1]


def personalized_mean_dynamics(
    params: ModelParams,
    group: GroupConfig,
    real: InterimRealization,
    r1A: np.ndarray,
    r1B: np.ndarray,
    N: int,
    schedule: PersistenceSchedule | None = None,
    eps: float = EPSILON_FLOOR,
) -> tuple[TrajectoryRecord, TrajectoryRecord]:
    """Expected-value counterpart of :func:`simulate_personalized`."""
    _check_horizon(N)
    r1A = check_ranking(r1A, real.M, interior=True)
    r1B = check_ranking(r1B, real.M, interior=True)
    schedule = _schedule(params, schedule)
    share = {"A": group.share_a, "B": 1.0 - group.share_a}

    branch_runs = []
    for branch in _branches(real, params):
        group_params = {name: group.params_for(params, name) for name in "AB"}
        tables = {
            name: expected_value_table(
                branch, group_params[name].gamma, params.sophisticated
            )
            for name in "AB"
        }
        r = {"A": r1A.copy(), "B": r1B.copy()}
        history = {name: np.empty((N, real.M)) for name in "AB"}
        choices = {name: np.empty((N, real.M)) for name in "AB"}
        for t in range(N):
            rho = {
                name: expected_choice(
                    r[name], tables[name], group_params[name]
                )
                for name in "AB"
            }
            for name in "AB":
                history[name][t] = r[name]
                choices[name][t] = rho[name]
            own, cross = _personalized_weights(
                schedule.kappa_at(t + 1), group.lambda_
            )
            r = {
                name: project_to_floor(
                    r[name]
                    + share[name] * own * (rho[name] - r[name])
                    + share[other] * cross * (rho[other] - r[name]),
                    eps,
                )
                for name, other in (("A", "B"), ("B", "A"))
            }
        terminal = {
            name: expected_choice(r[name], tables[name], group_params[name])
            for name in "AB"
        }
        branch_runs.append((history, choices, r, terminal))

    records = []
    count = len(branch_runs)
    for name in "AB":
        records.append(
            TrajectoryRecord(
                rankings=sum(run[0][name] for run in branch_runs) / count,
                choices=sum(run[1][name] for run in branch_runs) / count,
                final_ranking=sum(run[2][name] for run in branch_runs) / count,
                terminal_choice=sum(run[3][name] for run in branch_runs)
                / count,
                group=name,
            )
        )
    return records[0], records[1]


def rich_get_richer_initial_ranking(M: int = 20) -> np.ndarray:
    """Linearly decreasing ranking from 0.06 to 0.04 (sums to one at M=20)."""
    r1 = np.linspace(0.06, 0.04, M)
    return r1 / r1.sum()


def rich_get_richer_ratio(
    trajA: TrajectoryRecord, m: int, m_prime: int
) -> np.ndarray:
    """Per-step ratio of the expected choice probabilities of m and m'."""
    denominators = trajA.choices[:, m_prime]
    if np.any(denominators <= 0):
        msg = f"Website {m_prime} has zero choice probability"
        raise ChoiceError(msg)
    return trajA.choices[:, m] / denominators


def _replicate_one(task):
    params, real, r1, N, schedule, mode, seed, mask = task
    record = simulate(params, real, r1, N, schedule, mode, seed)
    return record.terminal_class_mass(mask)


def replicate(
    params: ModelParams,
    real: InterimRealization,
    N: int,
    reps: int,
    mask: np.ndarray | None = None,
    r1: np.ndarray | None = None,
    schedule: PersistenceSchedule | None = None,
    mode: FeedbackMode = FeedbackMode.PROB_FEEDBACK,
    seed: int = 0,
    jobs: int = 1,
) -> tuple[float, float, np.ndarray]:
    """
    Terminal expected class mass over independent replications.

    Every replication gets its own child of one SeedSequence, so results do
    not depend on ``jobs``.

    Args:
        params: Model parameters
        real: Interim realization
        N: Agents per replication
        reps: Number of replications
        mask: Websites whose mass is recorded, the correct ones by default
        r1: Initial ranking, uniform by default
        schedule: Persistence schedule
        mode: Feedback mode of every replication
        seed: Root of the SeedSequence
        jobs: Worker processes

    Returns:
        Mean, standard error and the per-replication samples
    """
    if mask is None:
        mask = real.correct_mask
    if r1 is None:
        r1 = uniform_ranking(real.M)
    children = np.random.SeedSequence(seed).spawn(reps)
    tasks = [
        (params, real, r1, N, schedule, mode, child, mask)
        for child in children
    ]
    logger.info("Running %s replications of %s steps", reps, N)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            samples = np.fromiter(
                pool.map(_replicate_one, tasks, chunksize=8), float, reps
            )
    else:
        samples = np.fromiter(map(_replicate_one, tasks), float, reps)

    mean = float(samples.mean())
    stderr = float(samples.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0
    return mean, stderr, samples
