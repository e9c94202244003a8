"""
Data models for lattices and multi-band driving ansatz descriptions.
"""

from typing import Any, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def parse_complex(value: Any) -> complex:
    """
    Parse a single complex entry from a config document.

    Accepts plain numbers, ``[re, im]`` pairs and strings like ``"1-2j"``.
    """
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex pair must have 2 entries, got {len(value)}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(" ", "").replace("i", "j"))
    return complex(value)


def to_complex_matrix(value: Any) -> np.ndarray:
    """Convert nested lists (or an array) into a complex128 matrix."""
    if isinstance(value, np.ndarray):
        matrix = value.astype(complex)
    else:
        rows = [[parse_complex(entry) for entry in row] for row in value]
        matrix = np.array(rows, dtype=complex)
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2D matrix, got shape {matrix.shape}")
    return matrix


class LatticeSpec(BaseModel):
    """A one-dimensional chain of unit cells with a tunable boundary."""

    model_config = ConfigDict(frozen=True)

    sites: int = Field(ge=2)
    eta: float = Field(default=0.0, ge=0.0, le=1.0)  # 1 = PBC, 0 = OBC
    band_dim: int = Field(default=1, ge=1)

    @property
    def dim(self) -> int:
        """Hilbert-space dimension N*m."""
        return self.sites * self.band_dim

    @property
    def is_open(self) -> bool:
        return self.eta == 0.0

    @property
    def is_periodic(self) -> bool:
        return self.eta == 1.0

    def with_eta(self, eta: float) -> "LatticeSpec":
        return self.model_copy(update={"eta": eta})

    def with_sites(self, sites: int) -> "LatticeSpec":
        return self.model_copy(update={"sites": sites})


class MultiBandSpec(BaseModel):
    """
    General two-step ansatz

        H_i = 1 (x) A_i + sum_r [ L^r (x) X_i^(r) + R^r (x) Y_i^(r) ],  i = 1, 2

    Hopping amplitudes (t, t1, t2, ...) are folded into the matrices.
    Lists ``x1, x2, y1, y2`` hold the distance-r blocks at index r-1.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    w: int = Field(ge=1)
    band_dim: int = Field(ge=1)
    a1: np.ndarray
    a2: np.ndarray
    x1: List[np.ndarray]
    x2: List[np.ndarray]
    y1: List[np.ndarray]
    y2: List[np.ndarray]

    @field_validator("a1", "a2", mode="before")
    @classmethod
    def _coerce_matrix(cls, value: Any) -> np.ndarray:
        return to_complex_matrix(value)

    @field_validator("x1", "x2", "y1", "y2", mode="before")
    @classmethod
    def _coerce_matrix_list(cls, value: Any) -> List[np.ndarray]:
        return [to_complex_matrix(item) for item in value]

    @model_validator(mode="after")
    def _check_shapes(self) -> "MultiBandSpec":
        m = self.band_dim
        for name in ("a1", "a2"):
            matrix = getattr(self, name)
            if matrix.shape != (m, m):
                raise ValueError(f"{name} has shape {matrix.shape}, expected {(m, m)}")
            if not np.all(np.isfinite(matrix)):
                raise ValueError(f"{name} has non-finite entries")
        for name in ("x1", "x2", "y1", "y2"):
            blocks = getattr(self, name)
            if len(blocks) != self.w:
                raise ValueError(f"{name} needs {self.w} blocks (one per distance), got {len(blocks)}")
            for r, block in enumerate(blocks, start=1):
                if block.shape != (m, m):
                    raise ValueError(f"{name}[r={r}] has shape {block.shape}, expected {(m, m)}")
                if not np.all(np.isfinite(block)):
                    raise ValueError(f"{name}[r={r}] has non-finite entries")
        return self

    @classmethod
    def from_blocks(cls, a1, a2, x1, x2, y1, y2) -> "MultiBandSpec":
        """Build from matrices (scalars allowed for m = 1)."""
        a1 = np.atleast_2d(np.asarray(a1, dtype=complex))
        return cls(
            w=len(x1),
            band_dim=a1.shape[0],
            a1=a1,
            a2=np.atleast_2d(np.asarray(a2, dtype=complex)),
            x1=[np.atleast_2d(np.asarray(b, dtype=complex)) for b in x1],
            x2=[np.atleast_2d(np.asarray(b, dtype=complex)) for b in x2],
            y1=[np.atleast_2d(np.asarray(b, dtype=complex)) for b in y1],
            y2=[np.atleast_2d(np.asarray(b, dtype=complex)) for b in y2],
        )

    def intracell(self, which: int) -> np.ndarray:
        return self.a1 if which == 1 else self.a2

    def left_hops(self, which: int) -> List[np.ndarray]:
        return self.x1 if which == 1 else self.x2

    def right_hops(self, which: int) -> List[np.ndarray]:
        return self.y1 if which == 1 else self.y2

    def hopping_scale(self) -> float:
        """Largest Frobenius norm among all blocks (sets relative tolerances)."""
        blocks = [self.a1, self.a2, *self.x1, *self.x2, *self.y1, *self.y2]
        return max(float(np.linalg.norm(b)) for b in blocks)

    def scaled(self, factor: float) -> "MultiBandSpec":
        """Multiply every block by ``factor``."""
        return MultiBandSpec(
            w=self.w,
            band_dim=self.band_dim,
            a1=self.a1 * factor,
            a2=self.a2 * factor,
            x1=[b * factor for b in self.x1],
            x2=[b * factor for b in self.x2],
            y1=[b * factor for b in self.y1],
            y2=[b * factor for b in self.y2],
        )

    def to_dict(self) -> dict:
        """Declarative description with complex entries as [re, im] pairs."""

        def encode(matrix: np.ndarray) -> list:
            return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]

        return {
            "w": self.w,
            "band_dim": self.band_dim,
            "a1": encode(self.a1),
            "a2": encode(self.a2),
            "x1": [encode(b) for b in self.x1],
            "x2": [encode(b) for b in self.x2],
            "y1": [encode(b) for b in self.y1],
            "y2": [encode(b) for b in self.y2],
        }
