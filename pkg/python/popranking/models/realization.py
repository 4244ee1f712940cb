from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, TieError


@dataclass(frozen=True)
class InterimRealization:
    """
    True state and website signals, fixed for the whole run.

    ``majority_signal`` is ``None`` when exactly half of the websites carry
    each bit (even M only).
    """

    omega: int
    website_signals: tuple[int, ...]
    majority_signal: int | None

    def __post_init__(self):
        if self.omega not in (0, 1):
            msg = f"omega must be a bit, got {self.omega}"
            raise ParameterError(msg)
        signals = tuple(int(y) for y in self.website_signals)
        if any(y not in (0, 1) for y in signals):
            msg = "website signals must be bits"
            raise ParameterError(msg)
        object.__setattr__(self, "website_signals", signals)

    @staticmethod
    def from_signals(omega: int, website_signals) -> InterimRealization:
        signals = tuple(int(y) for y in website_signals)
        ones = sum(signals)
        zeros = len(signals) - ones
        if ones > zeros:
            majority = 1
        elif zeros > ones:
            majority = 0
        else:
            majority = None
        return InterimRealization(omega, signals, majority)

    @property
    def M(self) -> int:
        return len(self.website_signals)

    @property
    def signals(self) -> np.ndarray:
        return np.asarray(self.website_signals, dtype=int)

    @property
    def correct_mask(self) -> np.ndarray:
        return self.signals == self.omega

    @property
    def L_set(self) -> tuple[int, ...]:
        return tuple(int(m) for m in np.flatnonzero(self.correct_mask))

    @property
    def L(self) -> int:
        return int(self.correct_mask.sum())

    @property
    def is_tie(self) -> bool:
        return self.majority_signal is None

    @property
    def majority_correct(self) -> bool:
        self.require_majority()
        return self.majority_signal == self.omega

    def require_majority(self):
        if self.is_tie:
            msg = (
                f"Tied website majority (L={self.L}, M={self.M}) "
                "without a tie rule"
            )
            raise TieError(msg)

    def with_majority(self, bit: int) -> InterimRealization:
        """Copy with the tie broken towards ``bit``."""
        if not self.is_tie:
            msg = "Only a tied realization can have its majority replaced"
            raise ParameterError(msg)
        return dataclasses.replace(self, majority_signal=int(bit))

    def class_sizes(self) -> np.ndarray:
        """Size of each website's signal class, per website."""
        signals = self.signals
        ones = int(signals.sum())
        return np.where(signals == 1, ones, self.M - ones)

    def __str__(self):
        majority = "tie" if self.is_tie else self.majority_signal
        return (
            f"<InterimRealization omega={self.omega} M={self.M} "
            f"L={self.L} majority={majority}>"
        )


@dataclass(frozen=True)
class AgentSignals:
    x: int
    z: int

    def __str__(self):
        return f"<AgentSignals x={self.x} z={self.z}>"
