"""
Lattice operators: shift operators with a boundary knob, Pauli matrices,
Bloch Hamiltonians and parity operators.

Tensor ordering is (lattice (x) band), site-major.
"""

from typing import List, Literal, Tuple

import numpy as np

from models.lattice import LatticeSpec, MultiBandSpec
from models.results import PTOperators

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def build_shift(spec: LatticeSpec, direction: Literal["left", "right"], power: int = 1) -> np.ndarray:
    """
    L^r or R^r on N sites.

    L = sum_j |j><j+1| + eta |N><1| and R = L^T. Entries that wrap around the
    boundary carry one factor of eta, so eta = 0 gives a nilpotent matrix.

    Raises:
        ValueError: if power is not in [1, N)
    """
    n = spec.sites
    if power < 1 or power >= n:
        raise ValueError(f"shift power must satisfy 1 <= r < N={n}, got {power}")
    if direction not in ("left", "right"):
        raise ValueError(f"direction must be 'left' or 'right', got {direction!r}")

    shift = np.zeros((n, n), dtype=complex)
    rows = np.arange(n - power)
    shift[rows, rows + power] = 1.0
    wrapped = np.arange(n - power, n)
    shift[wrapped, wrapped + power - n] = spec.eta
    return shift if direction == "left" else shift.T.copy()


def displacement_operator(spec: LatticeSpec, displacement: int) -> np.ndarray:
    """L^d for d > 0, R^|d| for d < 0, identity for d = 0 (zero once |d| >= N)."""
    if displacement == 0:
        return np.eye(spec.sites, dtype=complex)
    if abs(displacement) >= spec.sites:
        return np.zeros((spec.sites, spec.sites), dtype=complex)
    direction = "left" if displacement > 0 else "right"
    return build_shift(spec, direction, abs(displacement))


def ansatz_terms(spec: LatticeSpec, ansatz: MultiBandSpec, which: int) -> List[Tuple[int, np.ndarray, np.ndarray]]:
    """
    Lattice terms of H_which as (displacement, lattice operator, band block).

    Displacement +r is L^r, -r is R^r, 0 is the identity.
    """
    terms = [(0, np.eye(spec.sites, dtype=complex), ansatz.intracell(which))]
    for r in range(1, ansatz.w + 1):
        terms.append((r, build_shift(spec, "left", r), ansatz.left_hops(which)[r - 1]))
        terms.append((-r, build_shift(spec, "right", r), ansatz.right_hops(which)[r - 1]))
    return terms


def assemble(spec: LatticeSpec, ansatz: MultiBandSpec, which: int) -> np.ndarray:
    """H_i = 1 (x) A_i + sum_r [L^r (x) X_i^(r) + R^r (x) Y_i^(r)]"""
    h = np.zeros((spec.dim, spec.dim), dtype=complex)
    for _, lattice_op, block in ansatz_terms(spec, ansatz, which):
        if block.any():
            h += np.kron(lattice_op, block)
    return h


def bloch_hamiltonian(ansatz: MultiBandSpec, which: int, k: float) -> np.ndarray:
    """
    h_i(k) = A_i + sum_r [e^{ikr} X_i^(r) + e^{-ikr} Y_i^(r)]

    k is taken modulo 2 pi.
    """
    if which not in (1, 2):
        raise ValueError(f"which must be 1 or 2, got {which}")
    h = ansatz.intracell(which).astype(complex).copy()
    for r in range(1, ansatz.w + 1):
        h += np.exp(1j * k * r) * ansatz.left_hops(which)[r - 1]
        h += np.exp(-1j * k * r) * ansatz.right_hops(which)[r - 1]
    return h


def k_grid(points: int) -> np.ndarray:
    """Uniform grid on [-pi, pi)."""
    return -np.pi + 2.0 * np.pi * np.arange(points) / points


def parity_operator(spec: LatticeSpec, kind: Literal["reflection", "identity"] = "reflection") -> PTOperators:
    """
    Parity presets: spatial reflection |j> -> |N-j+1> (acting trivially on
    bands), or the identity.
    """
    if kind == "reflection":
        lattice_part = np.fliplr(np.eye(spec.sites))
    elif kind == "identity":
        lattice_part = np.eye(spec.sites)
    else:
        raise ValueError(f"unknown parity preset {kind!r}")
    parity = np.kron(lattice_part, np.eye(spec.band_dim)).astype(complex)
    return PTOperators(parity=parity, kind=kind)
