"""
Floquet engine: one-period evolution, Floquet Hamiltonian extraction and the
analytic periodic-boundary references.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from config.settings import BLOCH_K_POINTS, TOLERANCES, Tolerances
from models.lattice import MultiBandSpec
from models.protocol import DrivingProtocol
from models.results import FloquetResult
from services.lattice.operators import bloch_hamiltonian, k_grid
from utils.errors import NumericalError
from utils.linalg import as_square_matrix, mat_exp, matrix_log

logger = logging.getLogger(__name__)


def evolve_protocol(protocol: DrivingProtocol) -> np.ndarray:
    """
    Stroboscopic Floquet operator U_F = exp(-i H_n dt_n) ... exp(-i H_1 dt_1).

    Later steps multiply on the left.

    Raises:
        NumericalError: if a step propagator or the product overflows
    """
    u_f = np.eye(protocol.dim, dtype=complex)
    for index, step in enumerate(protocol.steps):
        with np.errstate(over="ignore", invalid="ignore"):
            u_f = mat_exp(-1j * step.duration * step.hamiltonian) @ u_f
        if not np.all(np.isfinite(u_f)):
            logger.error(f"Floquet operator overflowed after step {index + 1} of {len(protocol.steps)}")
            raise NumericalError("Floquet operator has non-finite entries")
    return u_f


def sort_order(quasienergies: np.ndarray) -> np.ndarray:
    """Ascending Re E, ties (to rounding) broken by ascending Im E."""
    return np.lexsort((quasienergies.imag, np.round(quasienergies.real, 10)))


def extract_hf(u_f: np.ndarray, period: float, tolerances: Tolerances = TOLERANCES) -> FloquetResult:
    """
    H_F = (i/T) log U_F and the quasienergy spectrum on the principal branch.

    Args:
        u_f: Invertible Floquet operator
        period: Drive period T

    Returns:
        FloquetResult with quasienergies, Floquet eigenvalues and eigenvectors
        in the same sorted order

    Raises:
        NumericalError: if U_F is singular
    """
    u_f = as_square_matrix(u_f)
    log = matrix_log(u_f, period, tolerances)
    order = sort_order(log.quasienergies)

    if log.eig.max_residual > tolerances.residual and log.eig.condition_estimate < tolerances.well_conditioned:
        logger.warning(f"Eigenpair residual {log.eig.max_residual:.2e} on a well-conditioned Floquet operator")

    return FloquetResult(
        u_f=u_f,
        h_f=log.h,
        quasienergies=log.quasienergies[order],
        floquet_eigs=log.eig.eigenvalues[order],
        eigvecs=log.eig.right_eigenvectors[:, order],
        residual_max=log.eig.max_residual,
        branch_flags=log.branch_flags[order],
        condition_estimate=log.eig.condition_estimate,
        period=period,
        log_method=log.method,
    )


def floquet_spectrum(protocol: DrivingProtocol, tolerances: Tolerances = TOLERANCES) -> FloquetResult:
    """evolve_protocol followed by extract_hf."""
    return extract_hf(evolve_protocol(protocol), protocol.period, tolerances)


def fold_quasienergy(values: np.ndarray, period: float) -> np.ndarray:
    """Wrap real energies into the zone [-pi/T, pi/T)."""
    zone = 2.0 * np.pi / period
    return np.mod(np.asarray(values, dtype=float) + np.pi / period, zone) - np.pi / period


def pbc_quasienergies_minimal(sites: int, lam: float, period: float = 1.0) -> np.ndarray:
    """
    Minimal-model PBC spectrum E_k = (2 lam / T) cos k, k = 2 pi n / N, folded.

    Returned in the order n = 0..N-1.
    """
    if sites < 2:
        raise ValueError(f"need N >= 2, got {sites}")
    k = 2.0 * np.pi * np.arange(sites) / sites
    return fold_quasienergy(2.0 * lam / period * np.cos(k), period).astype(complex)


def averaged_hamiltonian(protocol: DrivingProtocol) -> np.ndarray:
    """H_0 = (1/T) sum_s H_s dt_s"""
    h0 = np.zeros((protocol.dim, protocol.dim), dtype=complex)
    for step in protocol.steps:
        h0 += step.duration * step.hamiltonian
    return h0 / protocol.period


def determinant_modulus(u: np.ndarray) -> float:
    """|det U| through the log-determinant (no overflow for large N)."""
    _, log_abs = np.linalg.slogdet(as_square_matrix(u))
    return float(np.exp(log_abs))


def pbc_bloch_bands(
    ansatz: MultiBandSpec,
    period: float,
    k_points: int = BLOCH_K_POINTS,
    durations: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """
    Unfolded bands of H_F,PBC sampled on a uniform k-grid.

    With [h_1(k), h_2(k)] = 0 the Floquet Hamiltonian at each k is the
    duration-weighted average (h_1 dt_1 + h_2 dt_2) / T.

    Returns:
        Array of shape (k_points, m), bands sorted by real part at each k
    """
    if durations is None:
        durations = (period / 2.0, period / 2.0)
    if len(durations) != 2:
        raise ValueError(f"two-step ansatz needs 2 durations, got {len(durations)}")

    bands = np.empty((k_points, ansatz.band_dim))
    for row, k in enumerate(k_grid(k_points)):
        h_k = (durations[0] * bloch_hamiltonian(ansatz, 1, k) + durations[1] * bloch_hamiltonian(ansatz, 2, k)) / period
        energies = np.linalg.eigvals(h_k)
        if np.max(np.abs(energies.imag)) > 1e-9 * max(1.0, float(np.max(np.abs(energies)))):
            raise NumericalError(f"averaged Bloch Hamiltonian is not Hermitian at k={k:.4f}")
        bands[row] = np.sort(energies.real)
    return bands
