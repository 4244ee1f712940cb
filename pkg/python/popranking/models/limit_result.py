from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import ParameterError


class Branch(Enum):
    MINORITY = "minority"
    MAJORITY = "majority"


class Stability(Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class ThetaParams:
    """Parameters of the scalar class-mass map for one signal class."""

    L: int
    M: int
    alpha: float
    mu: float
    gamma: float
    p: float
    branch: Branch

    def __post_init__(self):
        if isinstance(self.branch, str):
            object.__setattr__(self, "branch", Branch(self.branch))
        if not 0 <= self.L <= self.M:
            msg = f"L must lie in [0, {self.M}], got {self.L}"
            raise ParameterError(msg)

    @property
    def degenerate(self) -> bool:
        return self.L in (0, self.M)

    def __str__(self):
        return (
            f"<ThetaParams {self.branch.value} L={self.L} M={self.M} "
            f"alpha={self.alpha} mu={self.mu} gamma={self.gamma} p={self.p}>"
        )


@dataclass(frozen=True)
class Root:
    value: float
    stability: Stability

    def as_dict(self) -> dict:
        return {"root": self.value, "stability": self.stability.value}


@dataclass(frozen=True)
class LimitResult:
    """
    Outcome of a limit computation.

    ``stable_root`` is the limit ranking mass of the class. For a single
    group it coincides with the limit click mass; with personalized
    rankings the group's click mass is stored separately in ``click_mass``.
    """

    stable_root: float
    all_roots: tuple[Root, ...] = ()
    selected_from: float | None = None
    residual: float = 0.0
    click_mass: float | None = None
    diagnostics: tuple[str, ...] = field(default_factory=tuple)

    @property
    def mass(self) -> float:
        if self.click_mass is None:
            return self.stable_root
        return self.click_mass

    def as_dict(self) -> dict:
        return {
            "stable_root": self.stable_root,
            "click_mass": self.mass,
            "selected_from": self.selected_from,
            "residual": self.residual,
            "all_roots": [root.as_dict() for root in self.all_roots],
            "diagnostics": list(self.diagnostics),
        }

    def __str__(self):
        return (
            f"<LimitResult root={self.stable_root:.12g} "
            f"residual={self.residual:.1e} roots={len(self.all_roots)}>"
        )


@dataclass(frozen=True)
class ClosedForm:
    """
    A closed-form limit value next to the value produced by the alternate
    sign convention for the minority branch, and their gap to the solver.
    """

    value: float
    alternate_value: float
    solver_value: float
    discrepancy: float

    @property
    def agrees(self) -> bool:
        return abs(self.value - self.solver_value) <= 1e-9
