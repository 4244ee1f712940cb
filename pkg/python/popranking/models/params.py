from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum

from .errors import ParameterError

PARAMETER_KEYS = (
    "p",
    "q",
    "mu",
    "gamma",
    "M",
    "alpha",
    "kappa",
    "lambda",
    "gamma_a",
    "gamma_b",
    "share_a",
    "signal_model",
    "mu_hat",
)
MODEL_KEYS = PARAMETER_KEYS[:7] + ("signal_model", "mu_hat")
GROUP_KEYS = ("gamma_a", "gamma_b", "share_a", "lambda")


class SignalModel(Enum):
    MAJORITY_PERCEPTION = "majority_perception"
    SOPHISTICATED = "sophisticated"


@dataclass(frozen=True)
class ModelParams:
    """
    Scalar parameters of a search environment.

    ``mu`` is the accuracy with which agents perceive the website majority
    signal. In sophisticated mode the perceived signal is about the true
    state instead, with accuracy ``mu_hat``.
    """

    p: float = 0.55
    q: float = 0.7
    mu: float = 0.9
    gamma: float = 0.33
    M: int = 20
    alpha: float = 1.0
    kappa: int = 100
    signal_model: SignalModel = SignalModel.MAJORITY_PERCEPTION
    mu_hat: float | None = None

    def __post_init__(self):
        if isinstance(self.signal_model, str):
            object.__setattr__(
                self, "signal_model", SignalModel(self.signal_model)
            )
        if self.sophisticated and self.mu_hat is None:
            msg = "Sophisticated signal model requires mu_hat."
            raise ParameterError(msg)

    @property
    def sophisticated(self) -> bool:
        return self.signal_model is SignalModel.SOPHISTICATED

    @property
    def z_accuracy(self) -> float:
        """Accuracy of the agent's second signal in the active mode."""
        return self.mu_hat if self.sophisticated else self.mu

    def replace(self, **changes) -> ModelParams:
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        data = {
            "p": self.p,
            "q": self.q,
            "mu": self.mu,
            "gamma": self.gamma,
            "M": self.M,
            "alpha": self.alpha,
            "kappa": self.kappa,
            "signal_model": self.signal_model.value,
        }
        if self.mu_hat is not None:
            data["mu_hat"] = self.mu_hat
        return data

    def hash(self) -> str:
        """Short stable digest used to tag exported artifacts."""
        payload = json.dumps(self.as_dict(), sort_keys=True)
        return hashlib.sha1(payload.encode()).hexdigest()[:12]

    @staticmethod
    def from_dict(data: dict) -> ModelParams:
        """Get ModelParams from a flat key/value mapping"""
        values = {key: data[key] for key in MODEL_KEYS if key in data}
        for key in ("M", "kappa"):
            if key in values:
                values[key] = int(values[key])
        return ModelParams(**values)

    def __str__(self):
        return (
            f"<ModelParams p={self.p} q={self.q} mu={self.mu} "
            f"gamma={self.gamma} M={self.M} alpha={self.alpha} "
            f"kappa={self.kappa} signal_model={self.signal_model.value}"
            + (f" mu_hat={self.mu_hat}>" if self.mu_hat is not None else ">")
        )


@dataclass(frozen=True)
class GroupConfig:
    """Two agent groups sharing or splitting a ranking."""

    gamma_a: float
    gamma_b: float
    share_a: float = 0.5
    lambda_: float = 0.0

    def __post_init__(self):
        if not 0 < self.share_a < 1:
            msg = f"share_a must lie in (0, 1), got {self.share_a}"
            raise ParameterError(msg)
        for name in ("gamma_a", "gamma_b", "lambda_"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                msg = f"{name.rstrip('_')} must lie in [0, 1], got {value}"
                raise ParameterError(msg)

    def gamma_for(self, group: str) -> float:
        if group == "A":
            return self.gamma_a
        if group == "B":
            return self.gamma_b
        msg = f"Unknown group {group!r}"
        raise ParameterError(msg)

    def params_for(self, params: ModelParams, group: str) -> ModelParams:
        return params.replace(gamma=self.gamma_for(group))

    def with_lambda(self, lambda_: float) -> GroupConfig:
        return dataclasses.replace(self, lambda_=lambda_)

    def as_dict(self) -> dict:
        return {
            "gamma_a": self.gamma_a,
            "gamma_b": self.gamma_b,
            "share_a": self.share_a,
            "lambda": self.lambda_,
        }

    @staticmethod
    def from_dict(data: dict) -> GroupConfig:
        return GroupConfig(
            gamma_a=data["gamma_a"],
            gamma_b=data["gamma_b"],
            share_a=data.get("share_a", 0.5),
            lambda_=data.get("lambda", 0.0),
        )

    def __str__(self):
        return (
            f"<GroupConfig gamma_a={self.gamma_a} gamma_b={self.gamma_b} "
            f"share_a={self.share_a} lambda={self.lambda_}>"
        )


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok and not self.flags:
            return "<ValidationReport ok>"
        return (
            f"<ValidationReport violations={self.violations} "
            f"flags={self.flags}>"
        )
