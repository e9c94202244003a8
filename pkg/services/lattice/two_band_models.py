"""
Two-band models built from Pauli matrices.

Type-I: intracell and intercell couplings share one matrix structure, so the
bands decouple. Type-II: hopping matrices do not commute and the boundary
terms mix the bands.
"""

import numpy as np

from models.experiment import ModelParameters
from models.lattice import LatticeSpec, MultiBandSpec
from models.protocol import DrivingProtocol
from services.lattice.base_model import LatticeModel
from services.lattice.builders import build_general
from services.lattice.operators import SIGMA_0, SIGMA_X, SIGMA_Z

ZERO_2 = np.zeros((2, 2), dtype=complex)


def type1_ansatz(t: float) -> MultiBandSpec:
    """H_1(2) = 1 (x) 3/2 (t sx + sz) + L(R) (x) (t sx + sz)"""
    block = t * SIGMA_X + SIGMA_Z
    return MultiBandSpec.from_blocks(
        a1=1.5 * block,
        a2=1.5 * block,
        x1=[block],
        x2=[ZERO_2],
        y1=[ZERO_2],
        y2=[block],
    )


def type2_ansatz(t1: float, t2: float) -> MultiBandSpec:
    """
    H_1(2) = t1 (L + R) (x) [s0 + (1 +- i) sx] + t2 (L^2 + R^2) (x) [s0 + (1 +- i) sz]
    """
    near_1 = t1 * (SIGMA_0 + (1 + 1j) * SIGMA_X)
    near_2 = t1 * (SIGMA_0 + (1 - 1j) * SIGMA_X)
    far_1 = t2 * (SIGMA_0 + (1 + 1j) * SIGMA_Z)
    far_2 = t2 * (SIGMA_0 + (1 - 1j) * SIGMA_Z)
    return MultiBandSpec.from_blocks(
        a1=ZERO_2,
        a2=ZERO_2,
        x1=[near_1, far_1],
        x2=[near_2, far_2],
        y1=[near_1, far_1],
        y2=[near_2, far_2],
    )


def _require_two_bands(spec: LatticeSpec) -> None:
    if spec.band_dim != 2:
        raise ValueError(f"two-band model needs band_dim=2, got {spec.band_dim}")


def build_type1(spec: LatticeSpec, t: float, T: float) -> DrivingProtocol:
    """Type-I protocol; reflection is the parity operator."""
    _require_two_bands(spec)
    return build_general(spec, type1_ansatz(t), T)


def build_type2(spec: LatticeSpec, t1: float, t2: float, T: float) -> DrivingProtocol:
    """Type-II protocol; the identity is the parity operator."""
    _require_two_bands(spec)
    return build_general(spec, type2_ansatz(t1, t2), T)


class TypeIModel(LatticeModel):
    """Decoupled two-band model swept in t."""

    def ansatz(self, params: ModelParameters) -> MultiBandSpec:
        return type1_ansatz(params.t)

    def protocol(self, params: ModelParameters) -> DrivingProtocol:
        return build_type1(self.lattice(params), params.t, params.T)


class TypeIIModel(LatticeModel):
    """Genuinely two-band model swept in t1 at fixed t2."""

    def ansatz(self, params: ModelParameters) -> MultiBandSpec:
        return type2_ansatz(params.t1, params.t2)

    def protocol(self, params: ModelParameters) -> DrivingProtocol:
        return build_type2(self.lattice(params), params.t1, params.t2, params.T)
