"""
Experiment Configuration
========================
JSON experiment files validated with pydantic. Unknown keys are rejected and
every failure surfaces as a ConfigError before any episode runs.

Example:
    {
        "environment": {"kind": "oil", "survey": "laplace", "lambda": 1.0, "well_location": 0.75},
        "agent": "adaptive",
        "K": 2000,
        "H": 5,
        "seed": 7
    }
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.errors import InvalidInputError
from environments import (
    AmbulanceConfig,
    ArrivalDistribution,
    OilConfig,
    shifting_uniform_preset,
)

logger = logging.getLogger(__name__)

SWEEPABLE = ("K", "seed", "lambda", "c", "epsilon", "bonus_scale_stochastic", "bonus_scale_metric")
INTEGER_PARAMS = ("K", "seed")


class ConfigError(InvalidInputError):
    """An experiment configuration could not be read or validated."""


# =============================================================================
# Models
# =============================================================================

class ArrivalSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["uniform", "beta"]
    lo: float = 0.0
    hi: float = 1.0
    a: Optional[float] = None
    b: Optional[float] = None

    @model_validator(mode="after")
    def _check_parameters(self):
        if self.kind == "uniform" and not 0.0 <= self.lo < self.hi <= 1.0:
            raise ValueError(f"uniform arrivals need 0 <= lo < hi <= 1, got ({self.lo}, {self.hi})")
        if self.kind == "beta" and (self.a is None or self.b is None or self.a <= 0 or self.b <= 0):
            raise ValueError("beta arrivals need a > 0 and b > 0")
        return self

    def to_distribution(self) -> ArrivalDistribution:
        if self.kind == "uniform":
            return ArrivalDistribution.uniform(self.lo, self.hi)
        return ArrivalDistribution.beta(self.a, self.b)


class OilSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    kind: Literal["oil"] = "oil"
    survey: Literal["laplace", "quadratic"] = "laplace"
    lam: float = Field(1.0, alias="lambda", ge=0)
    well_location: float = Field(0.75, ge=0, le=1)
    noise_sigma: float = Field(0.0, ge=0)

    def to_config(self) -> OilConfig:
        return OilConfig(self.survey, self.lam, self.well_location, self.noise_sigma)


class AmbulanceSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["ambulance"] = "ambulance"
    cost_weight: float = Field(0.0, ge=0, le=1)
    arrivals: Optional[List[ArrivalSpec]] = None
    preset: Optional[Literal["shifting-uniform"]] = None

    @model_validator(mode="after")
    def _check_arrivals(self):
        if (self.arrivals is None) == (self.preset is None):
            raise ValueError("give exactly one of 'arrivals' or 'preset'")
        if self.arrivals is not None and not self.arrivals:
            raise ValueError("'arrivals' must not be empty")
        return self

    def to_config(self) -> AmbulanceConfig:
        if self.preset == "shifting-uniform":
            preset = shifting_uniform_preset()
            return AmbulanceConfig(cost_weight=self.cost_weight, arrivals=preset.arrivals)
        return AmbulanceConfig(
            cost_weight=self.cost_weight,
            arrivals=tuple(spec.to_distribution() for spec in self.arrivals),
        )


class ExperimentConfig(BaseModel):
    """One experiment: environment, agent, horizon, episodes, bonus tuning and seed."""
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    environment: Union[OilSpec, AmbulanceSpec] = Field(discriminator="kind")
    agent: Literal["adaptive", "net", "no-movement", "median"] = "adaptive"
    K: int = Field(2000, ge=1)
    H: int = Field(5, ge=1)
    delta: float = Field(0.05, gt=0, lt=1)
    lipschitz_L: float = Field(1.0, ge=0)
    bonus_scale_stochastic: float = Field(1.0, ge=0)
    bonus_scale_metric: float = Field(1.0, ge=0)
    bonus_form: Literal["main", "pseudocode"] = "main"
    epsilon: Optional[float] = Field(None, gt=0, le=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    snapshots: Union[Literal["none", "all"], List[int]] = "none"
    initial_state: Optional[Union[Literal["uniform"], float]] = None
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _check_consistency(self):
        env = self.environment
        if isinstance(env, AmbulanceSpec):
            count = 5 if env.preset else len(env.arrivals)
            if count not in (1, self.H):
                raise ValueError(f"{count} arrival distributions cannot serve H={self.H}")
        if isinstance(self.initial_state, float) and not 0.0 <= self.initial_state <= 1.0:
            raise ValueError(f"initial_state must lie in [0, 1], got {self.initial_state}")
        if isinstance(self.snapshots, list) and any(k < 1 for k in self.snapshots):
            raise ValueError("snapshot episodes start at 1")
        if self.epsilon is not None and self.agent != "net":
            logger.warning("epsilon=%s is ignored by the %s agent", self.epsilon, self.agent)
        return self

    @property
    def env_kind(self) -> str:
        return self.environment.kind


# =============================================================================
# Loading, hashing, overrides
# =============================================================================

def _describe(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        where = ".".join(str(p) for p in err["loc"]) or "config"
        parts.append(f"{where}: {err['msg']}")
    return "; ".join(parts)


def parse_config(data: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid experiment config: {_describe(e)}") from e


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return parse_config(data)


def config_dict(cfg: ExperimentConfig) -> Dict[str, Any]:
    return cfg.model_dump(mode="json", by_alias=True)


def canonical_json(cfg: ExperimentConfig) -> str:
    """Sorted-key JSON of the config without its output location."""
    data = config_dict(cfg)
    data.pop("output_dir", None)
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: ExperimentConfig) -> str:
    """Git blob hash of the canonical config JSON."""
    payload = canonical_json(cfg).encode("utf-8")
    header = f"blob {len(payload)}\0".encode("utf-8")
    return hashlib.sha1(header + payload).hexdigest()


def with_overrides(cfg: ExperimentConfig, **updates) -> ExperimentConfig:
    """Copy with top-level fields replaced, re-validated."""
    data = config_dict(cfg)
    data.update({k: v for k, v in updates.items() if v is not None})
    return parse_config(data)


def with_parameter(cfg: ExperimentConfig, param: str, value) -> ExperimentConfig:
    """
    Copy with one sweep parameter set. ``lambda`` targets the oil survey;
    ``c`` is the ambulance cost weight or the oil well location.
    """
    if param not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {param!r}; choose from {', '.join(SWEEPABLE)}")
    data = config_dict(cfg)
    env = data["environment"]
    if param == "lambda":
        if env["kind"] != "oil":
            raise ConfigError("'lambda' is only defined for the oil environment")
        env["lambda"] = value
    elif param == "c":
        env["cost_weight" if env["kind"] == "ambulance" else "well_location"] = value
    else:
        data[param] = value
    return parse_config(data)


def parse_sweep_values(param: str, raw: str) -> List[Union[int, float]]:
    """'v1,v2,...' to numbers; an empty string gives an empty list."""
    values = []
    for token in (t.strip() for t in raw.split(",")):
        if not token:
            continue
        try:
            values.append(int(token) if param in INTEGER_PARAMS else float(token))
        except ValueError as e:
            raise ConfigError(f"sweep value {token!r} is not a number") from e
    return values
