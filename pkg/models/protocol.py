"""
Data model for piecewise-constant driving protocols.
"""

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.settings import TOLERANCES
from models.lattice import LatticeSpec


class ProtocolStep(BaseModel):
    """One step of the drive: constant Hamiltonian applied for ``duration``."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    hamiltonian: np.ndarray
    duration: float = Field(gt=0.0)

    @field_validator("hamiltonian", mode="before")
    @classmethod
    def _as_complex(cls, value) -> np.ndarray:
        matrix = np.asarray(value, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"step Hamiltonian must be square, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("step Hamiltonian has non-finite entries")
        return matrix


class DrivingProtocol(BaseModel):
    """
    Ordered list of (Hamiltonian, duration) steps spanning one period.

    The Floquet operator multiplies later steps on the left:
    U_F = exp(-i H_n dt_n) ... exp(-i H_1 dt_1).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    steps: List[ProtocolStep] = Field(min_length=1)
    period: float = Field(gt=0.0)
    lam: Optional[float] = None  # dimensionless lambda = tT/2 when the model defines one
    lattice: Optional[LatticeSpec] = None

    @model_validator(mode="after")
    def _check_steps(self) -> "DrivingProtocol":
        total = sum(step.duration for step in self.steps)
        if abs(total - self.period) > TOLERANCES.period_sum * max(1.0, self.period):
            raise ValueError(f"step durations sum to {total}, expected period {self.period}")
        dims = {step.hamiltonian.shape[0] for step in self.steps}
        if len(dims) != 1:
            raise ValueError(f"step Hamiltonians have mixed dimensions {sorted(dims)}")
        if self.lattice is not None and self.lattice.dim not in dims:
            raise ValueError(f"lattice dimension {self.lattice.dim} does not match steps {dims.pop()}")
        return self

    @classmethod
    def two_step(
        cls,
        h1: np.ndarray,
        h2: np.ndarray,
        period: float,
        lam: Optional[float] = None,
        lattice: Optional[LatticeSpec] = None,
    ) -> "DrivingProtocol":
        """Two steps of equal duration T/2 (H_1 first, H_2 second)."""
        half = period / 2.0
        return cls(
            steps=[ProtocolStep(hamiltonian=h1, duration=half), ProtocolStep(hamiltonian=h2, duration=half)],
            period=period,
            lam=lam,
            lattice=lattice,
        )

    @property
    def dim(self) -> int:
        return self.steps[0].hamiltonian.shape[0]

    @property
    def hamiltonians(self) -> List[np.ndarray]:
        return [step.hamiltonian for step in self.steps]

    @property
    def durations(self) -> List[float]:
        return [step.duration for step in self.steps]

    def reversed(self) -> "DrivingProtocol":
        """Same steps applied in the opposite order."""
        return self.model_copy(update={"steps": list(reversed(self.steps))})
