"""
Limit click masses of a signal class.

Under a uniform initial ranking the mean dynamics keep every website of a
class at the same ranking, so the limit reduces to a scalar fixed point
x = theta(x) of the class mass. Stable roots are those where theta crosses
the identity from above.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path

import numpy as np
from scipy import optimize

from .models import (
    Branch,
    ClosedForm,
    ConvergenceError,
    GroupConfig,
    InterimRealization,
    LimitResult,
    ModelParams,
    RegimeError,
    Root,
    RootFindingError,
    Stability,
    ThetaParams,
)

logger = logging.getLogger(__name__)

ROOT_GRID = 10_000
ROOT_TOLERANCE = 1e-12
SLOPE_STEP = 1e-7
MARGINAL_SLOPE = 1e-9
COUPLED_TOLERANCE = 1e-12
COUPLED_RESIDUAL = 1e-9


def _share(w1: float, a, w2: float, b):
    """w1*a / (w1*a + w2*b), continued by its limit where both vanish."""
    num = w1 * a
    den = num + w2 * b
    fill = 1.0 if w1 > 0 else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), fill)


def _masses(x, tp: ThetaParams):
    if tp.alpha == 0:
        return np.ones_like(x), np.ones_like(x)
    a = np.power(x / tp.L, tp.alpha)
    b = np.power((1.0 - x) / (tp.M - tp.L), tp.alpha)
    return a, b


def theta(x, tp: ThetaParams):
    """
    Expected click mass of the class when it holds ranking mass ``x``.

    Args:
        x: Class ranking mass, a scalar or an array
        tp: Class-mass map parameters

    Returns:
        Click mass in the shape of ``x``
    """
    scalar = np.ndim(x) == 0
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    p, mu, gamma = tp.p, tp.mu, tp.gamma

    if tp.L == 0:
        value = np.zeros_like(x)
    elif tp.L == tp.M:
        value = np.ones_like(x)
    else:
        a, b = _masses(x, tp)
        like = _share(gamma, a, 1.0 - gamma, b)
        unlike = _share(1.0 - gamma, a, gamma, b)
        if tp.branch is Branch.MINORITY:
            value = (
                p * (1 - mu)
                + p * mu * like
                + (1 - p) * (1 - mu) * unlike
            )
        else:
            value = p * mu + p * (1 - mu) * like + (1 - p) * mu * unlike

    return float(value) if scalar else value


def theta_prime(x: float, tp: ThetaParams, step: float = SLOPE_STEP) -> float:
    """Numerical slope of theta, one-sided at the interval ends."""
    lo = max(x - step, 0.0)
    hi = min(x + step, 1.0)
    return (theta(hi, tp) - theta(lo, tp)) / (hi - lo)


def alpha_zero_limit(tp: ThetaParams) -> float:
    """Without attention bias theta is constant, so it is its own limit."""
    if tp.branch is Branch.MINORITY:
        return (1 - tp.mu) * (1 - tp.gamma) + tp.gamma * tp.p
    return tp.mu * (1 - tp.gamma) + tp.gamma * tp.p


def theta_params_for(
    params: ModelParams, L: int, branch: Branch | None = None
) -> ThetaParams:
    """
    Class-mass map parameters for L correct websites. The branch follows
    from L unless given; sophisticated agents always use the majority form
    with their own accuracy.

    Args:
        params: Model parameters
        L: Number of correct websites
        branch: Minority or majority form, required at a tie

    Returns:
        ThetaParams
    """
    mu = params.mu
    if params.sophisticated:
        branch = Branch.MAJORITY
        mu = params.mu_hat
    elif branch is None:
        if 2 * L == params.M:
            msg = f"L={L} ties the website majority; pick a branch"
            raise RegimeError(msg)
        branch = Branch.MAJORITY if 2 * L > params.M else Branch.MINORITY
    return ThetaParams(
        L=L,
        M=params.M,
        alpha=params.alpha,
        mu=mu,
        gamma=params.gamma,
        p=params.p,
        branch=branch,
    )


def _classify(H_left: float, H_right: float, slope: float) -> Stability:
    if abs(slope - 1.0) < MARGINAL_SLOPE:
        return Stability.MARGINAL
    if H_left > 0 > H_right or (H_left >= 0 > H_right and slope < 1):
        return Stability.STABLE
    if H_left < 0 < H_right or (H_left <= 0 < H_right and slope > 1):
        return Stability.UNSTABLE
    return Stability.MARGINAL


def find_roots(
    tp: ThetaParams, grid: int = ROOT_GRID, tol: float = ROOT_TOLERANCE
) -> list[Root]:
    """
    All roots of theta(x) - x on [0, 1] found by a dense sign scan.

    Args:
        tp: Class-mass map parameters
        grid: Number of scan intervals
        tol: Root tolerance passed to brentq

    Returns:
        Roots in increasing order with their stability
    """

    def H(x):
        return theta(x, tp) - x

    xs = np.linspace(0.0, 1.0, grid + 1)
    hs = theta(xs, tp) - xs
    # theta hits the identity exactly at an end point when mu = 1
    for end in (0, grid):
        if abs(hs[end]) < 1e-14:
            hs[end] = 0.0
    roots: list[Root] = []

    for i in range(grid + 1):
        if hs[i] == 0.0:
            left = hs[i - 1] if i > 0 else None
            right = hs[i + 1] if i < grid else None
            if left is None:
                # left end: stable when the flow just inside points back down
                stability = (
                    Stability.STABLE if right < 0 else Stability.UNSTABLE
                )
            elif right is None:
                stability = (
                    Stability.STABLE if left > 0 else Stability.UNSTABLE
                )
            else:
                stability = _classify(left, right, theta_prime(xs[i], tp))
            roots.append(Root(float(xs[i]), stability))
        elif i < grid and hs[i] * hs[i + 1] < 0:
            value = optimize.brentq(
                H, xs[i], xs[i + 1], xtol=tol, rtol=4 * np.finfo(float).eps
            )
            stability = _classify(hs[i], hs[i + 1], theta_prime(value, tp))
            roots.append(Root(float(value), stability))

    return roots


def _degenerate(tp: ThetaParams, x0: float | None) -> LimitResult:
    value = 0.0 if tp.L == 0 else 1.0
    return LimitResult(
        stable_root=value,
        all_roots=(Root(value, Stability.STABLE),),
        selected_from=x0,
        residual=0.0,
    )


def solve_limit(
    tp: ThetaParams,
    x0: float | None = None,
    grid: int = ROOT_GRID,
    tol: float = ROOT_TOLERANCE,
) -> LimitResult:
    """
    Stable class mass reached from ``x0`` (default L/M, the mass under a
    uniform ranking): follow the sign of theta(x) - x to the nearest stable
    root in that direction.

    Args:
        tp: Class-mass map parameters
        x0: Starting class mass
        grid: Number of scan intervals
        tol: Root tolerance

    Returns:
        LimitResult with the selected root, every root found and any
        diagnostics
    """
    if tp.degenerate:
        return _degenerate(tp, x0)
    if x0 is None:
        x0 = tp.L / tp.M

    if tp.alpha == 0:
        value = alpha_zero_limit(tp)
        return LimitResult(
            stable_root=value,
            all_roots=(Root(value, Stability.STABLE),),
            selected_from=x0,
            residual=abs(theta(value, tp) - value),
        )

    roots = find_roots(tp, grid, tol)
    if not roots:
        msg = f"No root of theta(x) = x found for {tp}"
        raise RootFindingError(msg)

    diagnostics = []
    marginal = [root for root in roots if root.stability is Stability.MARGINAL]
    if marginal:
        diagnostics.append(
            "marginal roots excluded: "
            + ", ".join(f"{root.value:.12g}" for root in marginal)
        )
        logger.warning("Tangent root(s) for %s: %s", tp, diagnostics[-1])

    stable = [
        root.value
        for root in roots
        if root.stability is Stability.STABLE
    ]
    drift = theta(x0, tp) - x0
    if drift > 0:
        candidates = [value for value in stable if value >= x0]
        selected = min(candidates) if candidates else None
    elif drift < 0:
        candidates = [value for value in stable if value <= x0]
        selected = max(candidates) if candidates else None
    else:
        selected = x0 if any(abs(v - x0) <= tol for v in stable) else None

    if selected is None:
        selected = min(stable, key=lambda value: abs(value - x0), default=None)
        diagnostics.append("no stable root in the flow direction")
    if selected is None:
        msg = f"No stable root for {tp}: {roots}"
        raise RootFindingError(msg)

    return LimitResult(
        stable_root=selected,
        all_roots=tuple(roots),
        selected_from=x0,
        residual=abs(theta(selected, tp) - selected),
        diagnostics=tuple(diagnostics),
    )


def class_limit(
    params: ModelParams,
    L: int,
    x0: float | None = None,
    grid: int = ROOT_GRID,
    tol: float = ROOT_TOLERANCE,
) -> float:
    """
    Limit click mass on the L correct websites. A tied website majority
    averages the minority and majority branches.

    Args:
        params: Model parameters
        L: Number of correct websites
        x0: Starting class mass, L/M by default

    Returns:
        Limit click mass in [0, 1]
    """
    if L in (0, params.M):
        return 0.0 if L == 0 else 1.0
    if not params.sophisticated and 2 * L == params.M:
        return 0.5 * sum(
            solve_limit(
                theta_params_for(params, L, branch), x0, grid, tol
            ).stable_root
            for branch in Branch
        )
    return solve_limit(theta_params_for(params, L), x0, grid, tol).stable_root


def _require_mu1_alpha1(tp: ThetaParams):
    if tp.mu != 1 or tp.alpha != 1:
        msg = f"Closed form needs mu=1 and alpha=1, got {tp}"
        raise RegimeError(msg)


def _majority_mu1_alpha1(tp: ThetaParams) -> float:
    L, M, gamma, p = tp.L, tp.M, tp.gamma, tp.p
    if L <= (1 - gamma) * M / (1 - gamma * p):
        return 1.0
    return gamma * p * L / (L - (1 - gamma) * M)


def _minority_mu1_alpha1(tp: ThetaParams) -> float:
    L, M, gamma, p = tp.L, tp.M, tp.gamma, tp.p
    if L < gamma * p * M / (1 - gamma * (1 - p)):
        return (gamma * p * (M - L) - (1 - gamma) * L) / (gamma * M - L)
    return 0.0


def _minority_mu1_alpha1_alternate(tp: ThetaParams) -> float:
    """The sign convention with numerator (1-gamma)L - gamma p (M-L)."""
    L, M, gamma, p = tp.L, tp.M, tp.gamma, tp.p
    if L <= gamma * p * M / (1 - (1 - gamma) * p):
        return ((1 - gamma) * L - gamma * p * (M - L)) / (gamma * M - L)
    return 0.0


def closed_form_mu1_alpha1(tp: ThetaParams) -> ClosedForm:
    """
    Piecewise closed form of the limit at mu=1, alpha=1, checked against
    the root solver. Disagreement is logged, not raised.
    """
    _require_mu1_alpha1(tp)
    if tp.degenerate:
        value = alternate = 0.0 if tp.L == 0 else 1.0
    elif tp.branch is Branch.MAJORITY:
        value = alternate = _majority_mu1_alpha1(tp)
    else:
        value = _minority_mu1_alpha1(tp)
        alternate = _minority_mu1_alpha1_alternate(tp)

    solver = solve_limit(tp).stable_root
    discrepancy = abs(alternate - solver)
    if discrepancy > 1e-9:
        logger.warning(
            "Alternate closed form %.12g differs from solver %.12g for %s",
            alternate,
            solver,
            tp,
        )
    if abs(value - solver) > 1e-9:
        logger.warning(
            "Closed form %.12g differs from solver %.12g for %s",
            value,
            solver,
            tp,
        )
    return ClosedForm(
        value=value,
        alternate_value=alternate,
        solver_value=solver,
        discrepancy=discrepancy,
    )


def fake_news_limit(M: int, p: float, gamma: float) -> tuple[float, bool]:
    """
    Limit visit probability of a single incorrect website among M when
    agents perceive the majority perfectly, and whether it out-ranks each
    correct website.

    Args:
        M: Number of websites
        p: Private signal accuracy
        gamma: Preference for like-minded news

    Returns:
        Visit probability and whether the website out-ranks the rest
    """
    if not gamma >= 1.0 / (M * (1.0 - p) + p):
        msg = (
            f"gamma={gamma} leaves the correct websites with all clicks "
            f"(needs gamma >= {1.0 / (M * (1.0 - p) + p):.6g})"
        )
        raise RegimeError(msg)
    visit = 1.0 - gamma * p * (M - 1) / (gamma * M - 1)
    top_ranked = gamma > 1.0 / (M * (1.0 - p))
    return visit, top_ranked


def _coupled_flow(x, tpA, tpB, lambda_):
    thA = theta(x[0], tpA)
    thB = theta(x[1], tpB)
    return np.array(
        [
            thA + (1 - lambda_) * thB - (2 - lambda_) * x[0],
            thB + (1 - lambda_) * thA - (2 - lambda_) * x[1],
        ]
    )


def _solve_coupled(tpA, tpB, lambda_, x0, h, max_steps):
    x = np.array([x0, x0], dtype=float)
    residual = np.inf
    for _ in range(max_steps):
        k1 = _coupled_flow(x, tpA, tpB, lambda_)
        residual = np.abs(k1).max()
        if residual < COUPLED_TOLERANCE:
            break
        k2 = _coupled_flow(np.clip(x + 0.5 * h * k1, 0, 1), tpA, tpB, lambda_)
        k3 = _coupled_flow(np.clip(x + 0.5 * h * k2, 0, 1), tpA, tpB, lambda_)
        k4 = _coupled_flow(np.clip(x + h * k3, 0, 1), tpA, tpB, lambda_)
        x = np.clip(x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), 0, 1)
    return x, residual


def _require_equal_shares(group: GroupConfig):
    if abs(group.share_a - 0.5) > 1e-12:
        msg = f"Personalized limits need share_a = 1/2, got {group.share_a}"
        raise RegimeError(msg)


def solve_personalized_limit(
    params: ModelParams,
    group: GroupConfig,
    real: InterimRealization,
    h: float = 0.05,
    max_steps: int = 1_000_000,
) -> tuple[LimitResult, LimitResult]:
    """
    Limit ranking masses of both groups on the correct websites, solving

        (2 - lambda) r_A = theta_A(r_A) + (1 - lambda) theta_B(r_B)

    and its mirror by following the mean flow from the uniform ranking.

    Args:
        params: Model parameters shared by both groups
        group: Group gammas and personalization lambda, equal shares only
        real: Interim realization
        h: RK4 step
        max_steps: Step budget before ConvergenceError

    Returns:
        LimitResult of group A and of group B, with click masses
    """
    _require_equal_shares(group)
    L, M = real.L, real.M
    x0 = L / M
    if L in (0, M):
        value = 0.0 if L == 0 else 1.0
        result = LimitResult(value, (Root(value, Stability.STABLE),), x0)
        return result, result

    if params.sophisticated or not real.is_tie:
        branches = [None]
    else:
        branches = list(Branch)

    roots = []
    clicks = []
    residuals = []
    for branch in branches:
        tpA = theta_params_for(group.params_for(params, "A"), L, branch)
        tpB = theta_params_for(group.params_for(params, "B"), L, branch)
        x, residual = _solve_coupled(tpA, tpB, group.lambda_, x0, h, max_steps)
        if residual > COUPLED_RESIDUAL:
            msg = f"Coupled limit system did not converge for {group}"
            raise ConvergenceError(msg, residual, max_steps)
        roots.append(x)
        clicks.append(np.array([theta(x[0], tpA), theta(x[1], tpB)]))
        residuals.append(residual)

    root = sum(roots) / len(roots)
    click = sum(clicks) / len(clicks)
    residual = max(residuals)
    results = tuple(
        LimitResult(
            stable_root=float(root[i]),
            selected_from=x0,
            residual=float(residual),
            click_mass=float(click[i]),
        )
        for i in range(2)
    )
    return results


def effective_gamma(group: GroupConfig) -> tuple[float, float]:
    lam = group.lambda_
    gamma_a = (group.gamma_a + (1 - lam) * group.gamma_b) / (2 - lam)
    gamma_b = (group.gamma_b + (1 - lam) * group.gamma_a) / (2 - lam)
    return gamma_a, gamma_b


def effective_gamma_limits(
    params: ModelParams, group: GroupConfig, real: InterimRealization
) -> tuple[LimitResult, LimitResult]:
    """
    Approximate each group by a single group with its effective gamma.
    The results carry the residual of the coupled system at the
    approximate point, which is zero at lambda = 1 or equal gammas.

    Returns:
        LimitResult of group A and of group B
    """
    _require_equal_shares(group)
    L = real.L
    gammas = effective_gamma(group)
    masses = [
        class_limit(params.replace(gamma=gamma), L) for gamma in gammas
    ]
    if L in (0, params.M):
        residual = 0.0
    else:
        residual = 0.0
        branches = (
            [None]
            if params.sophisticated or not real.is_tie
            else list(Branch)
        )
        for branch in branches:
            tpA = theta_params_for(group.params_for(params, "A"), L, branch)
            tpB = theta_params_for(group.params_for(params, "B"), L, branch)
            flow = _coupled_flow(np.array(masses), tpA, tpB, group.lambda_)
            residual = max(residual, float(np.abs(flow).max()))

    diagnostics = (f"coupled residual {residual:.3e}",)
    return tuple(
        LimitResult(
            stable_root=mass,
            selected_from=L / params.M,
            residual=residual,
            diagnostics=diagnostics,
        )
        for mass in masses
    )


def limit_surface(
    params: ModelParams, L_values=None
) -> list[dict]:
    """Every root of the class-mass map across L, for export."""
    L_values = range(params.M + 1) if L_values is None else L_values
    rows = []
    for L in L_values:
        if L in (0, params.M) or params.sophisticated or 2 * L != params.M:
            branches = [None]
        else:
            branches = list(Branch)
        for branch in branches:
            tp = (
                theta_params_for(params, L, branch)
                if 0 < L < params.M
                else None
            )
            if tp is None:
                value = 0.0 if L == 0 else 1.0
                roots = [Root(value, Stability.STABLE)]
                name = "minority" if L == 0 else "majority"
            else:
                roots = (
                    [Root(alpha_zero_limit(tp), Stability.STABLE)]
                    if tp.alpha == 0
                    else find_roots(tp)
                )
                name = tp.branch.value
            rows.extend(
                {
                    "L": L,
                    "branch": name,
                    "root": repr(root.value),
                    "stability": root.stability.value,
                    "params_hash": params.hash(),
                }
                for root in roots
            )
    return rows


def limit_surface_csv(
    params: ModelParams, path: str | Path, L_values=None
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(
            handle,
            fieldnames=["L", "branch", "root", "stability", "params_hash"],
        )
        writer.writeheader()
        writer.writerows(limit_surface(params, L_values))
    return path
