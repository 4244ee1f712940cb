from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class OrdinalState:
    """
    Click counts and the ranked list they induce. ``positions[m]`` is the
    rank of website m, 1 being the top.
    """

    click_counts: tuple[int, ...]
    positions: tuple[int, ...]
    beta: float

    def __post_init__(self):
        if self.beta < 1:
            msg = f"beta must be at least 1, got {self.beta}"
            raise ParameterError(msg)
        if sorted(self.positions) != list(range(1, len(self.positions) + 1)):
            msg = f"positions must be a permutation of 1..M: {self.positions}"
            raise ParameterError(msg)

    @staticmethod
    def initial(positions, beta: float) -> OrdinalState:
        positions = tuple(int(rank) for rank in positions)
        return OrdinalState((0,) * len(positions), positions, beta)

    @property
    def M(self) -> int:
        return len(self.positions)

    @property
    def steps(self) -> int:
        return sum(self.click_counts)

    def position_weights(self) -> np.ndarray:
        return self.beta ** (self.M - np.asarray(self.positions, dtype=float))

    def record_click(self, m: int) -> OrdinalState:
        """
        Add one click to website m and re-rank. Ties in click counts keep
        the better previous rank first, then the lower index.
        """
        counts = list(self.click_counts)
        counts[m] += 1
        order = sorted(
            range(self.M),
            key=lambda k: (-counts[k], self.positions[k], k),
        )
        positions = [0] * self.M
        for rank, k in enumerate(order, start=1):
            positions[k] = rank
        return OrdinalState(tuple(counts), tuple(positions), self.beta)

    def __str__(self):
        return (
            f"<OrdinalState steps={self.steps} beta={self.beta} "
            f"positions={self.positions}>"
        )
