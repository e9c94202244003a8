"""
Dense complex linear algebra: general eigendecomposition, matrix exponential
and the Floquet matrix logarithm with a fixed quasienergy branch.

Matrices are plain complex128 numpy arrays. Everything here is a pure function
of its inputs.
"""

import logging
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as la
import scipy.sparse as ssp

from config.settings import TOLERANCES, Tolerances
from models.results import EigDecomposition, MatrixLog
from utils.errors import NumericalError

logger = logging.getLogger(__name__)


def as_square_matrix(m) -> np.ndarray:
    """
    Validate and convert input to a square complex matrix.

    Raises:
        ValueError: if the input is not square or has NaN/Inf entries
    """
    matrix = np.asarray(m, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix has non-finite entries")
    return matrix


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def non_hermitian_part(m: np.ndarray) -> np.ndarray:
    """(M - M^dagger) / 2"""
    return (m - m.conj().T) / 2.0


def is_nilpotent_shape(m: np.ndarray) -> bool:
    """True for strictly upper or strictly lower triangular matrices."""
    return not np.tril(m).any() or not np.triu(m).any()


def eig_general(m, tolerances: Tolerances = TOLERANCES) -> EigDecomposition:
    """
    Right eigenpairs of a general (non-Hermitian) complex matrix.

    LAPACK zgeev: Hessenberg reduction, shifted QR to complex Schur form,
    eigenvector back-substitution. Near exceptional points the eigenvector
    matrix becomes ill-conditioned; that is reported through
    ``condition_estimate`` rather than raised.

    Args:
        m: Square complex matrix

    Returns:
        EigDecomposition with unit-norm eigenvectors and relative residuals
    """
    matrix = as_square_matrix(m)
    try:
        eigenvalues, vectors = la.eig(matrix, check_finite=False)
    except la.LinAlgError as e:
        logger.error(f"Eigendecomposition failed for a {matrix.shape[0]}x{matrix.shape[0]} matrix: {str(e)}")
        raise NumericalError(f"QR iteration did not converge: {str(e)}") from e

    norms = np.linalg.norm(vectors, axis=0)
    norms[norms == 0.0] = 1.0
    vectors = vectors / norms

    scale = np.linalg.norm(matrix)
    if scale == 0.0:
        scale = 1.0
    residuals = np.linalg.norm(matrix @ vectors - vectors * eigenvalues, axis=0) / scale

    with np.errstate(divide="ignore", invalid="ignore"):
        condition = float(np.linalg.cond(vectors))
    if not np.isfinite(condition):
        condition = np.inf
    if condition > tolerances.well_conditioned:
        logger.debug(f"Eigenbasis condition estimate {condition:.2e} (near-defective matrix)")

    return EigDecomposition(
        eigenvalues=eigenvalues,
        right_eigenvectors=vectors,
        residuals=residuals,
        condition_estimate=condition,
    )


def _nilpotent_exp(m: np.ndarray) -> np.ndarray:
    """
    Terminating Taylor series for strictly triangular (nilpotent) matrices.

    Raises:
        NumericalError: if a term overflows
    """
    n = m.shape[0]
    generator = ssp.csr_array(m)
    result = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    eps = np.finfo(float).eps
    for k in range(1, n):
        with np.errstate(over="ignore", invalid="ignore"):
            term = np.asarray(term @ generator) / k
        if not np.all(np.isfinite(term)):
            logger.error(f"Taylor term {k} overflowed (||m||_F = {np.linalg.norm(m):.3e})")
            raise NumericalError("matrix exponential overflowed")
        if not term.any():
            break
        result += term
        # remaining terms are below rounding of the accumulated sum
        if np.linalg.norm(term) <= eps * np.linalg.norm(result):
            break
    return result


def mat_exp(m) -> np.ndarray:
    """
    Matrix exponential e^m.

    Nilpotent (strictly triangular) inputs, such as OBC shift operators, use the
    terminating series; everything else goes through scipy's Pade scaling and
    squaring.

    Raises:
        NumericalError: if the result overflows
    """
    matrix = as_square_matrix(m)
    if not matrix.any():
        return np.eye(matrix.shape[0], dtype=complex)

    if is_nilpotent_shape(matrix):
        result = _nilpotent_exp(matrix)
    else:
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                result = la.expm(matrix)
        except (ValueError, OverflowError) as e:
            raise NumericalError(f"matrix exponential failed: {str(e)}") from e

    if not np.all(np.isfinite(result)):
        logger.error(f"Matrix exponential overflowed (||m||_F = {np.linalg.norm(matrix):.3e})")
        raise NumericalError("matrix exponential overflowed")
    return result


def _principal_phase(xi: np.ndarray, guard: float) -> np.ndarray:
    """arg(xi) on [-pi + guard, pi + guard)."""
    phase = np.angle(xi)  # (-pi, pi]
    return np.where(phase < -np.pi + guard, phase + 2.0 * np.pi, phase)


def principal_quasienergies(
    xi: np.ndarray,
    period: float,
    tolerances: Tolerances = TOLERANCES,
    guard: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Quasienergies E = (i/T) log(xi) on the branch Re E in [-pi/T, pi/T).

    Values within ``guard`` (default ``branch_cut_guard``) of the cut are
    assigned to -pi/T exactly.

    Returns:
        Tuple of (quasienergies, branch flags for values sitting on the cut)
    """
    xi = np.asarray(xi, dtype=complex)
    moduli = np.abs(xi)
    if np.any(moduli == 0.0):
        raise NumericalError("Floquet operator is singular (zero eigenvalue)")
    if guard is None:
        guard = tolerances.branch_cut_guard

    phase = _principal_phase(xi, guard)
    on_cut = np.abs(phase - np.pi) < guard
    phase = np.where(on_cut, np.pi, phase)
    quasienergies = (-phase + 1j * np.log(moduli)) / period
    flags = on_cut | ((np.pi - np.abs(phase)) < tolerances.branch_flag)
    return quasienergies, flags


def _cut_rotation(phases: np.ndarray) -> float:
    """
    Angle theta that moves the cut of the principal log into the gap between
    the largest phase and the smallest phase + 2 pi.

    log(e^{i theta} xi) - i theta then carries exactly ``phases`` and no
    eigenvalue of e^{i theta} U lies on the negative real axis.
    """
    cut = 0.5 * (float(phases.max()) + float(phases.min()) + 2.0 * np.pi)
    return np.pi - cut


def _schur_log(matrix: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """log U on the branch fixed by ``phases`` through scipy's Schur-form logm."""
    theta = _cut_rotation(phases)
    try:
        rotated = la.logm(np.exp(1j * theta) * matrix)
    except (ValueError, la.LinAlgError) as e:
        logger.error(f"Schur-form logarithm failed (rotation {theta:.3e}): {str(e)}")
        raise NumericalError(f"matrix logarithm failed: {str(e)}") from e
    return np.asarray(rotated, dtype=complex) - 1j * theta * np.eye(matrix.shape[0])


def matrix_log(u, period: float, tolerances: Tolerances = TOLERANCES) -> MatrixLog:
    """
    H = (i/T) log U for a (possibly non-unitary) invertible U.

    The eigenbasis route is used while the eigenvector matrix is well conditioned;
    otherwise the Schur-form inverse scaling and squaring logarithm is used,
    taken on a rotated copy of U so that no eigenvalue sits on its cut. Once
    the eigenbasis is near-defective (exceptional points), eigenvalues within
    ``defective_cut_guard`` of the cut are assigned to -pi/T and flagged.

    Args:
        u: Invertible square matrix
        period: Drive period T > 0

    Raises:
        NumericalError: if U is singular or the logarithm fails
    """
    if period <= 0:
        raise ValueError(f"period must be positive, got {period}")
    matrix = as_square_matrix(u)
    decomposition = eig_general(matrix, tolerances)

    xi = decomposition.eigenvalues
    smallest = float(np.min(np.abs(xi)))
    if smallest <= np.finfo(float).eps * max(1.0, float(np.max(np.abs(xi)))):
        logger.error(f"Floquet operator is numerically singular (min |xi| = {smallest:.3e})")
        raise NumericalError("Floquet operator is singular")

    near_defective = decomposition.condition_estimate > tolerances.well_conditioned
    guard = tolerances.defective_cut_guard if near_defective else tolerances.branch_cut_guard
    quasienergies, flags = principal_quasienergies(xi, period, tolerances, guard)
    if flags.any():
        logger.warning(f"{int(flags.sum())} eigenvalue(s) on the branch cut, assigned to -pi/T")

    # H is built from the unsnapped phases
    phases = _principal_phase(xi, guard)
    if decomposition.condition_estimate < tolerances.log_condition_limit:
        vectors = decomposition.right_eigenvectors
        branch_energies = (-phases + 1j * np.log(np.abs(xi))) / period
        # V diag(E) V^-1 without forming the inverse
        h = la.solve(vectors.T, (vectors * branch_energies).T).T
        method = "eig"
    else:
        logger.warning(
            f"Eigenbasis condition {decomposition.condition_estimate:.2e} above limit, "
            f"using Schur-form logarithm"
        )
        h = (1j / period) * _schur_log(matrix, phases)
        method = "schur"

    if not np.all(np.isfinite(h)):
        raise NumericalError("matrix logarithm produced non-finite entries")

    identity = np.eye(matrix.shape[0])
    if np.linalg.norm(matrix.conj().T @ matrix - identity) <= tolerances.unitarity:
        h = (h + h.conj().T) / 2.0

    return MatrixLog(h=h, quasienergies=quasienergies, eig=decomposition, branch_flags=flags, method=method)


def mat_log_unitary(u, period: float, tolerances: Tolerances = TOLERANCES) -> np.ndarray:
    """H_F = (i/T) log U with Re of every quasienergy in [-pi/T, pi/T)."""
    return matrix_log(u, period, tolerances).h
