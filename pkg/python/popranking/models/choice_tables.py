from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CELLS = ("00", "01", "10", "11")


@dataclass(frozen=True)
class ExpectedValueTable:
    """
    Expected ranking-free values per website for the four agent signal
    cells. The first digit says whether x is wrong about the true state,
    the second whether z is wrong about its target (the website majority,
    or the true state in sophisticated mode).
    """

    v00: np.ndarray
    v01: np.ndarray
    v10: np.ndarray
    v11: np.ndarray

    @property
    def M(self) -> int:
        return len(self.v00)

    def cell(self, name: str) -> np.ndarray:
        return getattr(self, f"v{name}")

    def row(self, m: int) -> tuple[float, float, float, float]:
        return tuple(float(self.cell(name)[m]) for name in CELLS)

    def as_matrix(self) -> np.ndarray:
        return np.vstack([self.cell(name) for name in CELLS])

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["m", "v00", "v01", "v10", "v11"])
            for m in range(self.M):
                writer.writerow([m, *(repr(v) for v in self.row(m))])
        return path

    def __eq__(self, other):
        if not isinstance(other, ExpectedValueTable):
            return NotImplemented

        return all(
            np.array_equal(self.cell(name), other.cell(name))
            for name in CELLS
        )

    def __str__(self):
        return f"<ExpectedValueTable M={self.M}>"
