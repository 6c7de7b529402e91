"""Algorithm configurations: one point in the module/hyperparameter space.

A configuration selects one option for each of the eleven module dimensions
plus optional overrides for the four continuous learning rates and the
population size.  Configurations serialize to a flat JSON object whose keys
are exactly the field names below ("lambda" for the population size).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

SSA_OPTIONS = ("csa", "tpa", "msr", "psr", "xnes", "m-xnes", "p-xnes")
MIRROR_OPTIONS = ("off", "mirrored", "mirrored_pairwise")
SAMPLER_OPTIONS = ("gaussian", "sobol", "halton")
WEIGHTS_OPTIONS = ("default", "equal", "half_power_lambda")
RESTART_OPTIONS = ("off", "ipop", "bipop")
BOUND_OPTIONS = ("none", "ur", "mcs", "cotn", "scs", "tcs")

FLAG_MODULES = ("active", "elitist", "orthogonal", "sequential", "threshold_convergence")

#: categorical module name -> option tuple, in declaration order
MODULE_OPTIONS = {
    "active": (False, True),
    "elitist": (False, True),
    "orthogonal": (False, True),
    "sequential": (False, True),
    "threshold_convergence": (False, True),
    "ssa": SSA_OPTIONS,
    "mirrored": MIRROR_OPTIONS,
    "base_sampler": SAMPLER_OPTIONS,
    "weights": WEIGHTS_OPTIONS,
    "restart": RESTART_OPTIONS,
    "bound_correction": BOUND_OPTIONS,
}

#: continuous hyperparameter name -> (low, high, low_open)
CONTINUOUS_BOUNDS = {
    "c1": (0.0, 1.0, False),
    "c_mu": (0.0, 1.0, False),
    "c_c": (0.0, 1.0, True),
    "c_sigma": (0.0, 1.0, True),
}

_JSON_KEYS = (
    "active", "elitist", "orthogonal", "sequential", "threshold_convergence",
    "ssa", "mirrored", "base_sampler", "weights", "restart", "bound_correction",
    "c1", "c_mu", "c_c", "c_sigma", "lambda",
)


class ConfigurationError(ValueError):
    """Raised for configurations outside the legal module/parameter space."""


@dataclass(frozen=True)
class Configuration:
    """One algorithm variant: module options plus optional rate overrides.

    ``None`` for a learning rate or ``lambda_`` means "use the derived
    default".  The all-defaults instance is the canonical baseline algorithm.
    """

    active: bool = False
    elitist: bool = False
    orthogonal: bool = False
    sequential: bool = False
    threshold_convergence: bool = False
    ssa: str = "csa"
    mirrored: str = "off"
    base_sampler: str = "gaussian"
    weights: str = "default"
    restart: str = "off"
    bound_correction: str = "none"
    c1: float | None = None
    c_mu: float | None = None
    c_c: float | None = None
    c_sigma: float | None = None
    lambda_: int | None = None

    def validate(self) -> "Configuration":
        problems = []
        for name in FLAG_MODULES:
            if not isinstance(getattr(self, name), bool):
                problems.append(f"{name} must be a boolean")
        for name in ("ssa", "mirrored", "base_sampler", "weights", "restart",
                     "bound_correction"):
            value = getattr(self, name)
            options = MODULE_OPTIONS[name]
            if value not in options:
                problems.append(f"{name}={value!r} not in {options}")
        for name, (lo, hi, lo_open) in CONTINUOUS_BOUNDS.items():
            value = getattr(self, name)
            if value is None:
                continue
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                problems.append(f"{name} must be a number")
            elif not (lo < value <= hi if lo_open else lo <= value <= hi):
                interval = f"({lo}, {hi}]" if lo_open else f"[{lo}, {hi}]"
                problems.append(f"{name}={value} outside {interval}")
        if self.lambda_ is not None:
            if not isinstance(self.lambda_, int) or isinstance(self.lambda_, bool):
                problems.append("lambda must be an integer")
            elif self.lambda_ < 2:
                problems.append(f"lambda={self.lambda_} must be >= 2")
        if problems:
            raise ConfigurationError("; ".join(problems))
        return self

    def to_dict(self) -> dict:
        """Flat JSON-ready dict; optional fields omitted when unset."""
        out = {}
        for key in _JSON_KEYS:
            value = getattr(self, "lambda_" if key == "lambda" else key)
            if value is None:
                continue
            out[key] = value
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Configuration":
        if not isinstance(data, dict):
            raise ConfigurationError("configuration must be a JSON object")
        unknown = set(data) - set(_JSON_KEYS)
        if unknown:
            raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
        kwargs = {("lambda_" if k == "lambda" else k): v for k, v in data.items()}
        try:
            cfg = cls(**kwargs)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from exc
        return cfg.validate()

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"malformed JSON: {exc}") from exc
        return cls.from_dict(data)

    def config_id(self) -> str:
        """Stable content hash; identical configurations share an id."""
        canon = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha1(canon.encode()).hexdigest()[:12]

    def with_option(self, name: str, value) -> "Configuration":
        return replace(self, **{("lambda_" if name == "lambda" else name): value})


DEFAULT_CONFIGURATION = Configuration()
