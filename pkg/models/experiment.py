"""
Data models for model parameters and declarative experiment configuration.
"""

import json
import math
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.settings import DEFAULT_OUTPUT_DIR, DEFAULT_PERIOD, DEFAULT_TYPE2_T2, DEFAULT_WORKERS
from models.lattice import MultiBandSpec
from utils.errors import ConfigError

OBSERVABLES = ("spectrum", "p_com", "bandwidth")


class ModelParameters(BaseModel):
    """Physical parameters shared by all shipped models (unused ones are ignored)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    t: float = 1.0
    t1: float = 0.5
    t2: float = DEFAULT_TYPE2_T2
    lam: Optional[float] = None  # minimal model: overrides t through t = 2 lam / T
    T: float = Field(default=DEFAULT_PERIOD, gt=0.0)
    N: int = Field(default=60, ge=2)
    eta: float = Field(default=0.0, ge=0.0, le=1.0)
    scale: float = 1.0  # general ansatz: multiplies every block

    @field_validator("t", "t1", "t2", "lam", "scale")
    @classmethod
    def _finite(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not math.isfinite(value):
            raise ValueError("parameter must be finite")
        return value

    def updated(self, **changes) -> "ModelParameters":
        return self.model_copy(update=changes)


class SweepAxis(BaseModel):
    """A uniform grid over one model parameter."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    parameter: str
    start: float
    stop: float
    steps: int = Field(ge=2)

    @model_validator(mode="after")
    def _check_range(self) -> "SweepAxis":
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("sweep range must be finite")
        if self.start == self.stop:
            raise ValueError("sweep range has zero width")
        return self

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.steps - 1)


class ExperimentConfig(BaseModel):
    """
    Declarative description of one experiment run.

    Loaded from a JSON document; unknown keys are rejected so typos surface
    as configuration errors.
    """

    model_config = ConfigDict(extra="forbid")

    model: str = "minimal"
    params: ModelParameters = ModelParameters()
    ansatz: Optional[MultiBandSpec] = None
    parity: Optional[Literal["reflection", "identity"]] = None
    sweep: Optional[SweepAxis] = None
    sizes: List[int] = []
    observables: List[Literal["spectrum", "p_com", "bandwidth"]] = Field(default=list(OBSERVABLES), min_length=1)
    output_dir: str = DEFAULT_OUTPUT_DIR
    workers: int = Field(default=DEFAULT_WORKERS, ge=1)
    eps_im: Optional[float] = Field(default=None, gt=0.0)
    bracket: Optional[Tuple[float, float]] = None
    compare_pbc: bool = True
    detect_eps: bool = True
    cutoff_fraction: float = Field(default=0.25, gt=0.0, lt=0.5)
    k_samples: Optional[int] = Field(default=None, ge=1)
    pair: Optional[Tuple[int, int]] = None
    envelope_states: int = Field(default=4, ge=0)

    @field_validator("sizes")
    @classmethod
    def _check_sizes(cls, sizes: List[int]) -> List[int]:
        if any(n < 2 for n in sizes):
            raise ValueError("all sizes must be >= 2")
        return sorted(set(sizes))

    @field_validator("observables")
    @classmethod
    def _check_observables(cls, observables: List[str]) -> List[str]:
        return [name for name in OBSERVABLES if name in observables]

    @field_validator("bracket")
    @classmethod
    def _check_bracket(cls, bracket: Optional[Tuple[float, float]]) -> Optional[Tuple[float, float]]:
        if bracket is None:
            return None
        low, high = bracket
        if not (math.isfinite(low) and math.isfinite(high)) or low >= high:
            raise ValueError("bracket must be a finite (low, high) pair with low < high")
        return bracket

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        """
        Load and validate a config document.

        Raises:
            ConfigError: if the file is missing or not valid JSON
            pydantic.ValidationError: if the document violates the schema
        """
        try:
            with open(path, "r", encoding="utf-8") as f:
                document = json.load(f)
        except FileNotFoundError as e:
            raise ConfigError(f"config file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file is not valid JSON: {path}: {str(e)}") from e
        if not isinstance(document, dict):
            raise ConfigError("config document must be a JSON object")
        return cls.model_validate(document)

    def output_path(self) -> Path:
        return Path(self.output_dir)

    def to_dict(self) -> dict:
        """Validated configuration, JSON-ready and in stable key order."""
        data = self.model_dump(exclude={"ansatz"})
        data["ansatz"] = self.ansatz.to_dict() if self.ansatz is not None else None
        return data
