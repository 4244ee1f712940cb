from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .efficiency_report import RankingRegime
from .errors import ConfigError, ParameterError
from .params import GroupConfig, ModelParams
from .settings import read_config_file

METRICS = (
    "P",
    "P_net",
    "PoR",
    "PeR",
    "BP",
    "P_L",
)

# Parameter domains for sweep grids, as (low, high, low inclusive, high inclusive)
DOMAINS = {
    "p": (0.5, 1.0, True, True),
    "q": (0.5, 1.0, True, True),
    "mu": (0.5, 1.0, True, True),
    "mu_hat": (0.5, 1.0, True, True),
    "gamma": (0.0, 1.0, True, True),
    "alpha": (0.0, np.inf, True, False),
    "M": (2, np.inf, True, False),
    "kappa": (1, np.inf, True, False),
    "lambda": (0.0, 1.0, True, True),
    "gamma_a": (0.0, 1.0, True, True),
    "gamma_b": (0.0, 1.0, True, True),
    "share_a": (0.0, 1.0, False, False),
    "L": (0, np.inf, True, False),
}


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple

    @staticmethod
    def from_dict(data: dict) -> SweepAxis:
        if "values" in data:
            values = tuple(data["values"])
        else:
            grid = np.linspace(data["start"], data["stop"], int(data["num"]))
            values = tuple(float(v) for v in grid)
        return SweepAxis(data["name"], values)

    def as_dict(self) -> dict:
        return {"name": self.name, "values": list(self.values)}


@dataclass
class ExperimentConfig:
    """
    A parameter sweep: base parameters, the axes to vary, the metrics to
    record at every grid point and where to write them.
    """

    params: ModelParams = field(default_factory=ModelParams)
    group: GroupConfig | None = None
    axes: list[SweepAxis] = field(default_factory=list)
    metrics: list[str] = field(default_factory=lambda: ["P"])
    regime: RankingRegime = RankingRegime.POPULARITY
    reps: int = 0
    horizon: int = 20_000
    seed: int = 0
    out: Path = Path("out")
    name: str = "sweep"

    def validate(self) -> list[str]:
        """All problems with this config, empty when it is runnable."""
        problems = []
        for axis in self.axes:
            if axis.name not in DOMAINS:
                problems.append(f"axis {axis.name!r} does not name a parameter")
                continue
            if not axis.values:
                problems.append(f"axis {axis.name!r} has an empty grid")
                continue
            low, high, low_in, high_in = DOMAINS[axis.name]
            for value in axis.values:
                above = value >= low if low_in else value > low
                below = value <= high if high_in else value < high
                if not (above and below):
                    problems.append(
                        f"axis {axis.name!r} value {value} is outside its domain"
                    )
            if axis.name in ("lambda", "gamma_a", "gamma_b", "share_a") and (
                self.group is None
            ):
                problems.append(f"axis {axis.name!r} requires a group block")

        names = [axis.name for axis in self.axes]
        for name in set(names):
            if names.count(name) > 1:
                problems.append(f"axis {name!r} is listed more than once")

        for metric in self.metrics:
            if metric not in METRICS:
                problems.append(f"unknown metric {metric!r}")
            if metric in ("PeR", "BP") and self.group is None:
                problems.append(f"metric {metric!r} requires a group block")
            if metric == "P_L" and "L" not in [a.name for a in self.axes]:
                problems.append("metric 'P_L' requires an 'L' axis")
        if not self.metrics:
            problems.append("no metrics requested")
        if self.regime is RankingRegime.PERSONALIZED and self.group is None:
            problems.append("regime 'personalized' requires a group block")
        if self.reps < 0:
            problems.append("reps must be nonnegative")
        if self.reps > 0 and self.horizon < 1:
            problems.append("horizon must be at least 1")
        return problems

    def raise_for_problems(self):
        problems = self.validate()
        if not problems:
            return

        msg = f"Experiment config {self.name!r} is invalid:"
        for problem in problems:
            msg += f"\n    {problem}"

        raise ConfigError(msg)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params.as_dict(),
            "group": self.group.as_dict() if self.group else None,
            "axes": [axis.as_dict() for axis in self.axes],
            "metrics": list(self.metrics),
            "regime": self.regime.value,
            "reps": self.reps,
            "horizon": self.horizon,
            "seed": self.seed,
            "out": str(self.out),
        }

    @staticmethod
    def from_dict(data: dict) -> ExperimentConfig:
        params = dict(data.get("params", {}))
        if "q" in data:
            params["q"] = data["q"]
        try:
            return ExperimentConfig(
                params=ModelParams.from_dict(params),
                group=(
                    GroupConfig.from_dict(data["group"])
                    if data.get("group")
                    else None
                ),
                axes=[SweepAxis.from_dict(axis) for axis in data.get("axes", [])],
                metrics=list(data.get("metrics", ["P"])),
                regime=RankingRegime(data.get("regime", "popularity")),
                reps=int(data.get("reps", 0)),
                horizon=int(data.get("horizon", 20_000)),
                seed=int(data.get("seed", 0)),
                out=Path(data.get("out", "out")),
                name=data.get("name", "sweep"),
            )
        except (KeyError, TypeError, ValueError, ParameterError) as err:
            msg = f"Invalid experiment config: {err}"
            raise ConfigError(msg) from err

    @staticmethod
    def load(path: str | Path) -> ExperimentConfig:
        data = read_config_file(path)
        data.setdefault("name", Path(path).stem)
        return ExperimentConfig.from_dict(data)

    def __str__(self):
        axes = ", ".join(f"{a.name}[{len(a.values)}]" for a in self.axes)
        return (
            f"<ExperimentConfig {self.name} axes=({axes}) "
            f"metrics={self.metrics}>"
        )
