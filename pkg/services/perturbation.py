"""
Non-Hermitian correction V = H_F,OBC - H_0: truncated BCH series,
convergence bound, boundary/bulk split, decay profiles and the bulk
average Gamma_p.
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from models.experiment import ModelParameters
from models.protocol import DrivingProtocol
from models.results import PerturbationSplit
from services.floquet_engine import averaged_hamiltonian, floquet_spectrum
from services.lattice.base_model import LatticeModel
from services.sweep_runner import run_points
from utils.errors import NumericalError
from utils.linalg import as_square_matrix, commutator, non_hermitian_part

logger = logging.getLogger(__name__)


def _two_step_generators(protocol: DrivingProtocol) -> Tuple[np.ndarray, np.ndarray]:
    """X = -i H_1 dt_1 (applied first) and Y = -i H_2 dt_2."""
    if len(protocol.steps) != 2:
        raise ValueError(f"BCH terms are implemented for two-step protocols, got {len(protocol.steps)} steps")
    first, second = protocol.steps
    return -1j * first.duration * first.hamiltonian, -1j * second.duration * second.hamiltonian


def bch_truncated(protocol: DrivingProtocol, order: int) -> np.ndarray:
    """
    Floquet Hamiltonian from the BCH series of log(e^Y e^X), truncated at ``order``.

    With A = Y (later step) and B = X:
        Z = A + B + [A, B]/2 + ([A, [A, B]] - [B, [A, B]])/12 + ...
    and H_F = (i/T) Z.

    Args:
        protocol: Two-step protocol with equal durations
        order: 1, 2 or 3

    Returns:
        Truncated H_F
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    x, y = _two_step_generators(protocol)
    if not math.isclose(protocol.steps[0].duration, protocol.steps[1].duration, rel_tol=1e-12):
        raise ValueError("BCH terms assume two steps of equal duration")

    a, b = y, x
    z = a + b
    if order >= 2:
        ab = commutator(a, b)
        z = z + 0.5 * ab
        if order >= 3:
            z = z + (commutator(a, ab) - commutator(b, ab)) / 12.0
    return (1j / protocol.period) * z


def convergence_bound(protocol: DrivingProtocol) -> float:
    """
    Sufficient convergence bound ||X||_2 + ||Y||_2 < pi, as a critical lambda.

    Expressed in lambda units when the protocol carries lambda, otherwise as
    the factor by which the step Hamiltonians may be scaled.
    Zero protocol: +inf.
    """
    x, y = _two_step_generators(protocol)
    total = float(np.linalg.norm(x, 2) + np.linalg.norm(y, 2))
    if total == 0.0:
        return float('inf')
    unit = protocol.lam if protocol.lam else 1.0
    return abs(unit) * np.pi / total


def bulk_mask(sites: int, band_dim: int, cutoff: int) -> np.ndarray:
    """True where both row and column cells lie in the bulk window [s, N - s)."""
    cells = np.arange(sites * band_dim) // band_dim
    inside = (cells >= cutoff) & (cells < sites - cutoff)
    return np.outer(inside, inside)


def perturbation_split(h_f_obc: np.ndarray, h0: np.ndarray, cutoff: int, band_dim: int = 1) -> PerturbationSplit:
    """
    V = H_F,OBC - H_0 split into entries touching the outer ``cutoff`` cells
    and the bulk window, with Gamma_p = (N - 2s)^-2 sum_bulk |V_ij|. The same
    average over (V - V^dagger) / 2 is reported as the bulk non-Hermiticity.

    Raises:
        ValueError: if shapes differ or 2s >= N
    """
    h_f_obc = as_square_matrix(h_f_obc)
    h0 = as_square_matrix(h0)
    if h_f_obc.shape != h0.shape:
        raise ValueError(f"shape mismatch: {h_f_obc.shape} vs {h0.shape}")
    if h_f_obc.shape[0] % band_dim:
        raise ValueError(f"dimension {h_f_obc.shape[0]} is not a multiple of band_dim {band_dim}")
    sites = h_f_obc.shape[0] // band_dim
    if cutoff < 1 or 2 * cutoff >= sites:
        raise ValueError(f"cutoff must satisfy 1 <= s and 2s < N (s={cutoff}, N={sites})")

    v = h_f_obc - h0
    bulk = bulk_mask(sites, band_dim, cutoff)
    v_bulk = np.where(bulk, v, 0.0)
    v_boundary = np.where(bulk, 0.0, v)
    window = (sites - 2 * cutoff) ** 2
    gamma_p = float(np.abs(v_bulk).sum()) / window
    gamma_nh = float(np.abs(np.where(bulk, non_hermitian_part(v), 0.0)).sum()) / window
    return PerturbationSplit(
        v=v, v_boundary=v_boundary, v_bulk=v_bulk, cutoff=cutoff,
        gamma_p=gamma_p, gamma_p_nonhermitian=gamma_nh, band_dim=band_dim,
    )


def default_cutoff(sites: int, fraction: float = 0.25) -> int:
    """s = ceil(fraction * N)"""
    return max(1, math.ceil(fraction * sites))


def boundary_decay_profile(split: PerturbationSplit, which: str = "main") -> List[Tuple[int, float]]:
    """
    |V_{j,j}| (main) or |V_{j,j+1}| (secondary) against the 1-based cell index j.

    Multi-band models use the Frobenius norm of each cell block.
    """
    if which not in ("main", "secondary"):
        raise ValueError(f"which must be 'main' or 'secondary', got {which!r}")
    m = split.band_dim
    offset = 0 if which == "main" else 1
    profile = []
    for j in range(split.sites - offset):
        block = split.v[j * m:(j + 1) * m, (j + offset) * m:(j + offset + 1) * m]
        profile.append((j + 1, float(np.linalg.norm(block))))
    return profile


def decay_length(profile: List[Tuple[int, float]], cutoff: int) -> Tuple[float, float]:
    """
    Exponential fit |V_j| ~ amplitude * exp(-j / length) over sites [2, s].

    Site 1 carries the direct boundary term and is left out.

    Raises:
        NumericalError: fewer than two non-zero magnitudes in the window
    """
    window = [(site, value) for site, value in profile if 2 <= site <= cutoff and value > 0.0]
    if len(window) < 2:
        raise NumericalError(f"not enough non-zero profile values in sites [2, {cutoff}] to fit a decay")
    sites = np.array([site for site, _ in window], dtype=float)
    log_values = np.log([value for _, value in window])
    slope, intercept = np.polyfit(sites, log_values, 1)
    length = float('inf') if slope >= 0 else float(-1.0 / slope)
    return length, float(np.exp(intercept))


def obc_split(model: LatticeModel, params: ModelParameters, cutoff: Optional[int] = None,
              cutoff_fraction: float = 0.25) -> PerturbationSplit:
    """Split of V for one model at one parameter point (forced to eta = 0)."""
    params = params.updated(eta=0.0)
    protocol = model.protocol(params)
    result = floquet_spectrum(protocol)
    if cutoff is None:
        cutoff = default_cutoff(params.N, cutoff_fraction)
    return perturbation_split(result.h_f, averaged_hamiltonian(protocol), cutoff, model.band_dim)


def _gamma_point(task) -> dict:
    model, params, sites, cutoff_fraction = task
    split = obc_split(model, params.updated(N=sites), cutoff_fraction=cutoff_fraction)
    return {
        "N": sites,
        "inv_N": 1.0 / sites,
        "s": split.cutoff,
        "gamma_p": split.gamma_p,
        "gamma_p_nonhermitian": split.gamma_p_nonhermitian,
    }


def gamma_scan(
    model: LatticeModel,
    params: ModelParameters,
    sizes: List[int],
    cutoff_fraction: float = 0.25,
    workers: int = 1,
    fit_from: Optional[int] = None,
) -> Tuple[pd.DataFrame, float]:
    """
    Gamma_p(N) over system sizes and the log-log slope against N.

    Gamma_p oscillates at small N, so the slope is fitted over the asymptotic
    tail N >= ``fit_from`` (default: half the largest size, keeping at least
    the two largest sizes). Every size stays in the table with ``in_fit``
    marking the fitted rows.

    Returns:
        (DataFrame with columns N, inv_N, s, gamma_p, gamma_p_nonhermitian,
        in_fit; least-squares slope of log Gamma_p against log N)
    """
    sizes = sorted(set(sizes))
    if len(sizes) < 2:
        raise ValueError("gamma scan needs at least two sizes")
    if fit_from is None:
        fit_from = min(max(sizes) // 2, sizes[-2])
    logger.info(f"Gamma_p scan over N={sizes}, fitting N >= {fit_from}")
    rows = run_points(_gamma_point, [(model, params, n, cutoff_fraction) for n in sizes], workers)
    table = pd.DataFrame(rows, columns=["N", "inv_N", "s", "gamma_p", "gamma_p_nonhermitian"])
    table["in_fit"] = (table["N"] >= fit_from) & (table["gamma_p"] > 0)

    fitted = table[table["in_fit"]]
    if len(fitted) < 2:
        raise NumericalError(f"fewer than two sizes N >= {fit_from} with non-zero Gamma_p")
    slope, _ = np.polyfit(np.log(fitted["N"]), np.log(fitted["gamma_p"]), 1)
    return table, float(slope)
