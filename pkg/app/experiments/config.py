"""
Experiment configuration: flat `key = value` files parsed with python-dotenv
and validated into a pydantic model.
"""
import hashlib
import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.core.carrier import DELTA_FRACTION, CarrierParams
from app.core.nls import AnsatzOrder
from app.lab_config import DEFAULT_DT, DEFAULT_SEED, OUTPUT_DIR, WORKERS

# keys that do not change the numbers and stay out of the hash
_UNHASHED = {"output_dir", "workers"}


class ExperimentName(str, Enum):
    SIMULATE = "simulate"
    EXISTENCE = "existence"
    NLS_VALIDITY = "nls_validity"
    RESIDUAL_SCALING = "residual_scaling"
    ENERGY_DRIFT = "energy_drift"
    PROPERTY_SUITE = "property_suite"


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    experiment: ExperimentName
    eps_list: List[float] = [0.2, 0.1, 0.05, 0.025]
    k0: float = 1.0
    delta: Optional[float] = None
    T0: float = 1.0
    s: int = 7
    order: AnsatzOrder = AnsatzOrder.CORRECTED2
    packet_cutoff: bool = False
    strict_eps_guard: bool = False

    # grids
    length_factor: float = 32.0
    k_resolve: float = 10.0
    grid_n: Optional[int] = None
    slow_points: int = 256
    domain_periods: int = 16

    # time stepping
    dt: float = DEFAULT_DT
    dt_rule: Literal["fixed", "self_convergence"] = "fixed"
    max_halvings: int = 3
    observer_interval: float = 0.5
    time_samples: int = 9
    nonlinear: bool = True
    linear_part: Literal["tanh", "hilbert"] = "tanh"

    # initial data
    envelope: Literal["gaussian", "file"] = "gaussian"
    envelope_amplitude: float = 1.0
    envelope_width: float = 1.0
    envelope_file: Optional[str] = None
    a_factor: float = 1.0
    growth_threshold: float = 2.0
    random_modes: int = 2
    samples: int = 50
    direction: Literal["right", "left"] = "right"

    output_dir: str = OUTPUT_DIR
    seed: int = DEFAULT_SEED
    workers: int = WORKERS

    @field_validator("eps_list", mode="before")
    @classmethod
    def _split_eps(cls, value):
        if isinstance(value, str):
            return [float(v) for v in value.replace(";", ",").split(",") if v.strip()]
        if isinstance(value, (int, float)):
            return [float(value)]
        return value

    @field_validator("eps_list")
    @classmethod
    def _check_eps(cls, value: List[float]):
        if not value:
            raise ValueError("eps_list must not be empty")
        if any(not 0.0 < e < 1.0 for e in value):
            raise ValueError(f"every eps must lie in (0, 1), got {value}")
        if any(b >= a for a, b in zip(value, value[1:])):
            raise ValueError(f"eps_list must be strictly decreasing, got {value}")
        return value

    @field_validator("k0", "T0", "dt", "observer_interval", "length_factor", "k_resolve", "a_factor",
                     "envelope_width", "growth_threshold")
    @classmethod
    def _positive(cls, value: float):
        if not value > 0.0:
            raise ValueError(f"must be positive, got {value}")
        return value

    @field_validator("s")
    @classmethod
    def _check_s(cls, value: int):
        if value < 2:
            raise ValueError(f"s must be >= 2, got {value}")
        return value

    @field_validator("direction")
    @classmethod
    def _right_only(cls, value: str):
        if value != "right":
            raise ValueError("left-moving packets are reserved and not implemented")
        return value

    @model_validator(mode="before")
    @classmethod
    def _default_delta(cls, data):
        if isinstance(data, dict) and data.get("delta") in (None, ""):
            try:
                k0 = float(data.get("k0", 1.0))
            except (TypeError, ValueError):
                return data  # the k0 field reports the problem
            data = {**data, "delta": DELTA_FRACTION * k0 / 20.0}
        return data

    @model_validator(mode="after")
    def _check_carrier(self):
        if not 0.0 < self.delta < self.k0 / 20.0:
            raise ValueError(f"delta must lie in (0, k0/20), got {self.delta}")
        if self.strict_eps_guard and self.preasymptotic_eps():
            raise ValueError(f"eps values {self.preasymptotic_eps()} are not below delta={self.delta:g}")
        if self.envelope == "file" and not self.envelope_file:
            raise ValueError("envelope = file needs envelope_file")
        if self.workers < 1 or self.samples < 1 or self.time_samples < 1:
            raise ValueError("workers, samples and time_samples must be >= 1")
        return self

    def preasymptotic_eps(self) -> List[float]:
        """eps values that violate eps < delta."""
        return [e for e in self.eps_list if e >= self.delta]

    def carrier(self) -> CarrierParams:
        return CarrierParams(k0=self.k0, delta=self.delta)

    @property
    def hilbert(self) -> bool:
        return self.linear_part == "hilbert"

    def config_hash(self) -> str:
        payload = self.model_dump(mode="json", exclude=_UNHASHED)
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()


def load_config(path: Optional[Union[str, Path]] = None, experiment: Optional[str] = None,
                overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Read a flat config file (if given), apply overrides, validate.

    Keys without a value are ignored; overrides that are None are skipped so
    CLI options left unset never shadow the file.
    """
    raw: Dict[str, Any] = {}
    if path is not None:
        if not Path(path).is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        raw = {k: v for k, v in dotenv_values(path).items() if v is not None and v != ""}
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    if experiment is not None:
        raw["experiment"] = experiment
    return ExperimentConfig.model_validate(raw)
