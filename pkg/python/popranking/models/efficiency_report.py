from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

LONG_FORMAT_COLUMNS = ["sweep_var", "sweep_value", "metric", "value", "regime"]


class RankingRegime(Enum):
    POPULARITY = "popularity"
    RANDOM = "random"
    PERSONALIZED = "personalized"


@dataclass
class EfficiencyReport:
    interim: np.ndarray
    ex_ante: float
    ex_ante_net: float
    regime: RankingRegime
    q: float
    params_hash: str
    lambda_: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def regime_tag(self) -> str:
        if self.regime is RankingRegime.PERSONALIZED:
            return f"personalized({self.lambda_})"
        return self.regime.value

    def as_dict(self) -> dict:
        return {
            "regime": self.regime_tag,
            "q": self.q,
            "params_hash": self.params_hash,
            "interim": [float(value) for value in self.interim],
            "ex_ante": self.ex_ante,
            "ex_ante_net": self.ex_ante_net,
            **self.extra,
        }

    def to_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.as_dict(), indent=2) + "\n")
        return path

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(LONG_FORMAT_COLUMNS)
            for L, value in enumerate(self.interim):
                writer.writerow(
                    ["L", L, "P_L", repr(float(value)), self.regime_tag]
                )
            writer.writerow(
                ["q", self.q, "P", repr(self.ex_ante), self.regime_tag]
            )
            writer.writerow(
                ["q", self.q, "P_net", repr(self.ex_ante_net), self.regime_tag]
            )
        return path

    def __str__(self):
        return (
            f"<EfficiencyReport {self.regime_tag} q={self.q} "
            f"P={self.ex_ante:.6f} P_net={self.ex_ante_net:.6f}>"
        )
