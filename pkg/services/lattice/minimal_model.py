"""
Minimal model: H_1 = t L, H_2 = t R, each applied for T/2.
"""

import logging

import numpy as np

from models.experiment import ModelParameters
from models.lattice import LatticeSpec, MultiBandSpec
from models.protocol import DrivingProtocol
from services.lattice.base_model import LatticeModel
from services.lattice.operators import build_shift

logger = logging.getLogger(__name__)


def build_minimal(spec: LatticeSpec, t: float, T: float) -> DrivingProtocol:
    """
    Two steps of non-unitary evolution with one-site shifts.

    Args:
        spec: Lattice (band_dim must be 1)
        t: Hopping amplitude
        T: Drive period

    Returns:
        DrivingProtocol with lam = tT/2
    """
    if spec.band_dim != 1:
        raise ValueError(f"minimal model is single-band, got band_dim={spec.band_dim}")
    if not np.isfinite(t):
        raise ValueError("hopping amplitude must be finite")
    h1 = t * build_shift(spec, "left")
    h2 = t * build_shift(spec, "right")
    return DrivingProtocol.two_step(h1, h2, period=T, lam=t * T / 2.0, lattice=spec)


def minimal_ansatz(t: float) -> MultiBandSpec:
    """Scalar ansatz: X_1 = Y_2 = t, everything else zero."""
    return MultiBandSpec.from_blocks(a1=0.0, a2=0.0, x1=[t], x2=[0.0], y1=[0.0], y2=[t])


class MinimalModel(LatticeModel):
    """Single-band chain swept in the dimensionless lambda = tT/2."""

    def hopping(self, params: ModelParameters) -> float:
        """t, derived from lam when lam is given."""
        if params.lam is not None:
            return 2.0 * params.lam / params.T
        return params.t

    def resolve(self, params: ModelParameters) -> ModelParameters:
        resolved = super().resolve(params)
        # an explicit t wins over the preset lam
        if 't' in params.model_fields_set and 'lam' not in params.model_fields_set:
            resolved = resolved.updated(lam=None)
        return resolved

    @staticmethod
    def with_parameter(params: ModelParameters, name: str, value: float) -> ModelParameters:
        params = LatticeModel.with_parameter(params, name, value)
        if name == 't':
            params = params.updated(lam=None)
        return params

    def ansatz(self, params: ModelParameters) -> MultiBandSpec:
        return minimal_ansatz(self.hopping(params))

    def protocol(self, params: ModelParameters) -> DrivingProtocol:
        return build_minimal(self.lattice(params), self.hopping(params), params.T)

    def scan_value(self, params: ModelParameters) -> float:
        return self.hopping(params) * params.T / 2.0
