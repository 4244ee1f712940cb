from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import yaml

from .errors import ConfigError
from .params import GROUP_KEYS, PARAMETER_KEYS, GroupConfig, ModelParams
from .trajectory import PersistenceSchedule

logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).parent.parent / "info.yml"

_TYPES = {
    "float": (int, float),
    "int": (int,),
    "str": (str,),
    "bool": (bool,),
    "dict": (dict,),
    "list": (list,),
}


def read_config_file(path: str | Path) -> dict:
    """Read a TOML, JSON or YAML mapping, chosen by file suffix."""
    path = Path(path)
    if not path.is_file():
        msg = f"Config file does not exist: {path}"
        raise ConfigError(msg)

    suffix = path.suffix.lower()
    try:
        if suffix == ".toml":
            with path.open("rb") as handle:
                data = tomllib.load(handle)
        elif suffix == ".json":
            data = json.loads(path.read_text())
        elif suffix in (".yml", ".yaml"):
            data = yaml.safe_load(path.read_text()) or {}
        else:
            msg = f"Unsupported config format {suffix!r} for {path}"
            raise ConfigError(msg)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, yaml.YAMLError) as err:
        msg = f"Could not parse {path}: {err}"
        raise ConfigError(msg) from err

    if not isinstance(data, dict):
        msg = f"Config file {path} must contain a mapping"
        raise ConfigError(msg)
    return data


def load_parameter_file(
    path: str | Path,
) -> tuple[ModelParams, GroupConfig | None]:
    """
    Load a flat parameter file. Group keys are optional; when
    ``gamma_a`` and ``gamma_b`` are both present a GroupConfig is returned.
    """
    data = read_config_file(path)
    unknown = sorted(set(data) - set(PARAMETER_KEYS))
    if unknown:
        msg = f"Unknown parameter keys in {path}: {', '.join(unknown)}"
        raise ConfigError(msg)

    try:
        params = ModelParams.from_dict(data)
        group = None
        if "gamma_a" in data and "gamma_b" in data:
            group = GroupConfig.from_dict(
                {key: data[key] for key in GROUP_KEYS if key in data}
            )
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from err
    return params, group


class Settings:
    """
    App configuration
    """

    p: float
    q: float
    mu: float
    gamma: float
    M: int
    alpha: float
    kappa: int
    signal_model: str
    mu_hat: float | None

    epsilon_floor: float
    ode_step: float
    ode_tolerance: float
    ode_max_steps: int
    root_grid: int
    root_tolerance: float
    growing_kappa0: float
    growing_c: float

    seed: int
    reps: int
    jobs: int
    output_dir: str
    format: str
    log_level: str
    sentry_dsn: str

    def __init__(
        self,
        user_file: str | Path | None = None,
        overrides: dict | None = None,
        schema_path: str | Path = SCHEMA_PATH,
    ):
        logger.info("========= Loading Settings ========")

        self.schema = yaml.safe_load(Path(schema_path).read_text())[
            "configuration"
        ]
        values = {
            key: entry.get("default_value")
            for key, entry in self.schema.items()
        }

        if user_file is not None:
            logger.info("Reading user settings from %s", user_file)
            values.update(read_config_file(user_file))
        if overrides:
            values.update(
                {
                    key: value
                    for key, value in overrides.items()
                    if value is not None
                }
            )

        self.validate(values)

        for key, value in values.items():
            logger.debug("  %s: %s", key, value)
            setattr(self, key, value)

        logger.info("=" * 35)

    def validate(self, values: dict):
        """
        Check every value against the schema. All problems are collected
        before raising.
        """
        problems = []
        for key, value in values.items():
            entry = self.schema.get(key)
            if entry is None:
                problems.append(f"{key}: unknown setting")
                continue
            if value is None or value == "":
                if not entry.get("allows_empty", False):
                    problems.append(f"{key}: may not be empty")
                continue
            expected = _TYPES.get(entry["type"], (object,))
            if isinstance(value, bool) and bool not in expected:
                problems.append(f"{key}: expected {entry['type']}, got bool")
            elif not isinstance(value, expected):
                problems.append(
                    f"{key}: expected {entry['type']}, "
                    f"got {type(value).__name__}"
                )

        if not problems:
            return

        msg = "Some settings are invalid:"
        for problem in problems:
            msg += f"\n    {problem}"

        raise ConfigError(msg)

    @property
    def model_params(self) -> ModelParams:
        return ModelParams.from_dict(
            {
                "p": self.p,
                "q": self.q,
                "mu": self.mu,
                "gamma": self.gamma,
                "M": self.M,
                "alpha": self.alpha,
                "kappa": self.kappa,
                "signal_model": self.signal_model,
                "mu_hat": self.mu_hat,
            }
        )

    @property
    def growing_schedule(self) -> PersistenceSchedule:
        return PersistenceSchedule.growing(self.growing_kappa0, self.growing_c)

    @property
    def ode_options(self) -> dict:
        return {
            "h": self.ode_step,
            "tol": self.ode_tolerance,
            "max_steps": self.ode_max_steps,
            "eps": self.epsilon_floor,
        }
