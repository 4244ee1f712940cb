from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ParameterError


class FeedbackMode(Enum):
    PROB_FEEDBACK = "prob_feedback"
    REALIZED_CLICK = "realized_click"


class ScheduleKind(Enum):
    CONSTANT = "constant"
    GROWING = "growing"


@dataclass(frozen=True)
class PersistenceSchedule:
    """
    Ranking persistence over time. ``Constant`` keeps kappa fixed,
    ``Growing`` uses kappa_t = kappa0 + c * t so update gains vanish.
    """

    kind: ScheduleKind = ScheduleKind.CONSTANT
    kappa: float = 100
    c: float = 0.0

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", ScheduleKind(self.kind))
        if self.kappa < 1:
            msg = f"kappa must be at least 1, got {self.kappa}"
            raise ParameterError(msg)
        if self.c < 0:
            msg = f"growth rate must be nonnegative, got {self.c}"
            raise ParameterError(msg)

    @staticmethod
    def constant(kappa: float) -> PersistenceSchedule:
        return PersistenceSchedule(ScheduleKind.CONSTANT, kappa, 0.0)

    @staticmethod
    def growing(kappa0: float = 100, c: float = 1.0) -> PersistenceSchedule:
        return PersistenceSchedule(ScheduleKind.GROWING, kappa0, c)

    def kappa_at(self, t: int) -> float:
        if self.kind is ScheduleKind.GROWING:
            return self.kappa + self.c * t
        return self.kappa

    def as_dict(self) -> dict:
        return {"kind": self.kind.value, "kappa": self.kappa, "c": self.c}

    def __str__(self):
        if self.kind is ScheduleKind.GROWING:
            return f"<PersistenceSchedule growing kappa0={self.kappa} c={self.c}>"
        return f"<PersistenceSchedule constant kappa={self.kappa}>"


@dataclass
class TrajectoryRecord:
    """
    One run of the ranking dynamics.

    Row t of ``rankings`` is the ranking the (t+1)-th agent faces and row t
    of ``choices`` the choice distribution that agent produced from it.
    ``final_ranking`` is the ranking after the last agent.
    """

    rankings: np.ndarray
    choices: np.ndarray
    final_ranking: np.ndarray
    clicks: np.ndarray | None = None
    groups: np.ndarray | None = None
    positions: np.ndarray | None = None
    group: str = ""
    terminal_choice: np.ndarray | None = None
    edge_fallbacks: int = 0

    @property
    def N(self) -> int:
        return len(self.rankings)

    @property
    def M(self) -> int:
        return self.rankings.shape[1]

    @property
    def steps(self) -> np.ndarray:
        return np.arange(1, self.N + 1)

    def class_mass(self, mask: np.ndarray, of: str = "choices") -> np.ndarray:
        """Per-step total mass of ``of`` on the websites selected by mask."""
        return getattr(self, of)[:, np.asarray(mask, dtype=bool)].sum(axis=1)

    def terminal_class_mass(self, mask: np.ndarray) -> float:
        """Expected click mass on ``mask`` after the last agent."""
        source = (
            self.terminal_choice
            if self.terminal_choice is not None
            else self.choices[-1]
        )
        return float(source[np.asarray(mask, dtype=bool)].sum())

    def iter_rows(self):
        for t in range(self.N):
            group = self.group
            if self.groups is not None:
                group = str(self.groups[t])
            for m in range(self.M):
                row = {
                    "step": t + 1,
                    "group": group,
                    "m": m,
                    "r": repr(float(self.rankings[t, m])),
                    "rho": repr(float(self.choices[t, m])),
                }
                if self.positions is not None:
                    row["positions"] = int(self.positions[t, m])
                yield row

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fieldnames = ["step", "group", "m", "r", "rho"]
        if self.positions is not None:
            fieldnames.append("positions")
        with path.open("w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=fieldnames)
            writer.writeheader()
            writer.writerows(self.iter_rows())
        return path

    def __str__(self):
        return (
            f"<TrajectoryRecord N={self.N} M={self.M} group={self.group!r} "
            f"edge_fallbacks={self.edge_fallbacks}>"
        )
