"""
Protocol builder for the general multi-band ansatz.
"""

import logging

from models.lattice import LatticeSpec, MultiBandSpec
from models.protocol import DrivingProtocol
from services.lattice.operators import assemble

logger = logging.getLogger(__name__)


def check_compatible(spec: LatticeSpec, ansatz: MultiBandSpec) -> None:
    """
    Raises:
        ValueError: on band-dimension mismatch or overlapping boundary corrections
    """
    if spec.band_dim != ansatz.band_dim:
        raise ValueError(f"lattice band_dim {spec.band_dim} does not match ansatz band_dim {ansatz.band_dim}")
    if spec.sites <= 2 * ansatz.w:
        raise ValueError(f"need N > 2w so boundary corrections do not overlap (N={spec.sites}, w={ansatz.w})")


def build_general(spec: LatticeSpec, ansatz: MultiBandSpec, T: float) -> DrivingProtocol:
    """
    Two equal-duration steps with H_i = 1 (x) A_i + sum_r [L^r (x) X_i^(r) + R^r (x) Y_i^(r)].

    Args:
        spec: Lattice (sites, boundary eta, band dimension)
        ansatz: Intracell and hopping blocks
        T: Drive period

    Returns:
        DrivingProtocol with H_1 applied first
    """
    check_compatible(spec, ansatz)
    h1 = assemble(spec, ansatz, 1)
    h2 = assemble(spec, ansatz, 2)
    logger.debug(f"Built general protocol: N={spec.sites}, m={spec.band_dim}, w={ansatz.w}, eta={spec.eta}")
    return DrivingProtocol.two_step(h1, h2, period=T, lattice=spec)
