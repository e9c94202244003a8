"""
Spectral observables: complex-fraction order parameter, PT-breaking
thresholds, exceptional-point fits, unit-circle trajectories, the bandwidth
criterion and scale-free localization metrics.
"""

import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from config.settings import BLOCH_K_POINTS, THRESHOLD_SCAN_POINTS, TOLERANCES, Tolerances
from models.experiment import ModelParameters
from models.results import (
    BandwidthReport,
    EPRecord,
    FloquetResult,
    LocalizationRecord,
    ScaleFreeFit,
    SpectrumRecord,
    TrajectoryPoint,
)
from services.floquet_engine import evolve_protocol, floquet_spectrum, pbc_bloch_bands
from services.lattice.base_model import LatticeModel
from services.sweep_runner import run_points
from utils.errors import BracketError, NumericalError
from utils.linalg import eig_general

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Order parameter
# ---------------------------------------------------------------------------

def default_eps_im(quasienergies: np.ndarray, tolerances: Tolerances = TOLERANCES) -> float:
    """im_relative * max(1, spectral radius of H_F)"""
    radius = float(np.max(np.abs(quasienergies))) if len(quasienergies) else 0.0
    return tolerances.im_relative * max(1.0, radius)


def classify_spectrum(quasienergies: Sequence[complex], eps_im: float) -> Dict[str, float]:
    """
    Count complex quasienergies.

    Returns:
        Dict with n_com, p_com and max_abs_im
    """
    if eps_im <= 0:
        raise ValueError(f"eps_im must be positive, got {eps_im}")
    energies = np.asarray(quasienergies, dtype=complex)
    if energies.size == 0:
        return {"n_com": 0, "p_com": 0.0, "max_abs_im": 0.0}
    imag = np.abs(energies.imag)
    n_com = int(np.count_nonzero(imag > eps_im))
    return {"n_com": n_com, "p_com": n_com / energies.size, "max_abs_im": float(imag.max())}


def spectrum_record(
    result: FloquetResult,
    parameter: float,
    eps_im: Optional[float] = None,
    keep_vectors: bool = False,
    bandwidth: Optional[BandwidthReport] = None,
) -> SpectrumRecord:
    """Summarize one Floquet spectrum at one parameter value."""
    if eps_im is None:
        eps_im = default_eps_im(result.quasienergies)
    counts = classify_spectrum(result.quasienergies, eps_im)
    return SpectrumRecord(
        parameter=float(parameter),
        quasienergies=result.quasienergies,
        floquet_eigs=result.floquet_eigs,
        p_com=counts["p_com"],
        n_com=counts["n_com"],
        max_abs_im=counts["max_abs_im"],
        dim=len(result.quasienergies),
        eps_im=eps_im,
        pbc_bandwidths=bandwidth.bandwidths if bandwidth else [],
        pbc_total_bandwidth=bandwidth.total_bandwidth if bandwidth else None,
        eigvecs=result.eigvecs if keep_vectors else None,
    )


def evaluate_point(task) -> SpectrumRecord:
    """
    Worker entry point: one (model, params, parameter value) spectrum.

    task = (model, params, parameter, eps_im, keep_vectors, with_bandwidth)
    """
    model, params, parameter, eps_im, keep_vectors, with_bandwidth = task
    result = floquet_spectrum(model.protocol(params))
    bandwidth = bandwidth_criterion(model, params) if with_bandwidth else None
    return spectrum_record(result, parameter, eps_im, keep_vectors, bandwidth)


def sweep_records(
    model: LatticeModel,
    params: ModelParameters,
    parameter: str,
    values: Sequence[float],
    eps_im: Optional[float] = None,
    workers: int = 1,
    keep_vectors: bool = False,
    with_bandwidth: bool = False,
) -> List[SpectrumRecord]:
    """Spectra along one parameter axis, sorted by parameter value."""
    tasks = [
        (model, model.with_parameter(params, parameter, float(value)), float(value), eps_im, keep_vectors, with_bandwidth)
        for value in values
    ]
    return run_points(evaluate_point, tasks, workers, sort_key=lambda record: record.parameter)


def complex_count(model: LatticeModel, params: ModelParameters, eps_im: Optional[float] = None) -> int:
    """n_com of the model at ``params``."""
    result = floquet_spectrum(model.protocol(params))
    if eps_im is None:
        eps_im = default_eps_im(result.quasienergies)
    return classify_spectrum(result.quasienergies, eps_im)["n_com"]


def _bisect_onset(is_broken: Callable[[float], bool], low: float, high: float, width: float) -> float:
    """Shrink [low, high] (unbroken at low, broken at high) to ``width``."""
    while high - low > width:
        middle = 0.5 * (low + high)
        if is_broken(middle):
            high = middle
        else:
            low = middle
    return 0.5 * (low + high)


def threshold_lambda_c(
    model: LatticeModel,
    params: ModelParameters,
    bracket: Tuple[float, float],
    eps_im: Optional[float] = None,
    tolerances: Tolerances = TOLERANCES,
    scan_points: int = THRESHOLD_SCAN_POINTS,
) -> float:
    """
    First PT-breaking onset of the scan parameter.

    p_com > 0 can switch off again above the onset, so the bracket is first
    scanned on a uniform grid for the first broken point; only the interval
    between the last unbroken and the first broken grid point is bisected.

    Args:
        model: Lattice model (its scan parameter is bisected)
        params: Remaining parameters, including N
        bracket: (low, high) with an unbroken low end; the onset must lie inside
        scan_points: Grid points of the coarse scan, ends included

    Raises:
        BracketError: if the bracket does not straddle the transition
    """
    low, high = bracket

    def is_broken(value: float) -> bool:
        return complex_count(model, model.with_value(params, value), eps_im) > 0

    if low >= high:
        raise BracketError(f"bracket ({low}, {high}) is reversed")
    if is_broken(low):
        raise BracketError(f"bracket ({low}, {high}) does not straddle the transition: broken at the low end")

    grid = np.linspace(low, high, max(scan_points, 2))
    first = next((i for i, value in enumerate(grid[1:], start=1) if is_broken(float(value))), None)
    if first is None:
        raise BracketError(f"bracket ({low}, {high}) does not straddle the transition: unbroken throughout")
    low, high = float(grid[first - 1]), float(grid[first])
    logger.debug(f"First broken grid point {high:.6f}, bisecting from {low:.6f}")

    threshold = _bisect_onset(is_broken, low, high, tolerances.threshold_width)
    logger.info(f"{model.name}: threshold {model.scan_parameter}_c = {threshold:.6f} at N={params.N}")
    return threshold


# ---------------------------------------------------------------------------
# Exceptional points
# ---------------------------------------------------------------------------

def spectrum_along(model: LatticeModel, params: ModelParameters, parameter: str) -> Callable[[float], np.ndarray]:
    """Quasienergies as a function of one model parameter, the others held at ``params``."""
    def quasienergies(value: float) -> np.ndarray:
        return floquet_spectrum(model.protocol(model.with_parameter(params, parameter, value))).quasienergies
    return quasienergies


def _onset_pair(energies: np.ndarray, eps_im: float) -> Tuple[int, int]:
    """Indices of the complex pair with the smallest |Im E| (the newest broken pair)."""
    positive = np.flatnonzero(energies.imag > eps_im)
    if positive.size == 0:
        raise NumericalError("no complex pair in the spectrum")
    upper = positive[np.argmin(energies.imag[positive])]
    partner = int(np.argmin(np.abs(energies - np.conj(energies[upper]))))
    return tuple(sorted((int(upper), partner)))


def _follow_upper(
    spectrum: Callable[[float], np.ndarray],
    values: Sequence[float],
    seed: complex,
    eps_im: float,
) -> Tuple[List[Tuple[float, float]], Optional[str]]:
    """
    Follow the upper member of a pair through ``values`` by nearest neighbour
    in the upper half plane.

    Returns:
        (parameter, Im E) points and the reason the branch was lost, if it was
    """
    points = []
    current = seed
    for value in values:
        energies = spectrum(float(value))
        upper = energies[energies.imag > 0.0]
        if upper.size == 0:
            return points, f"no complex pair left at {value:.6f}"
        current = upper[np.argmin(np.abs(upper - current))]
        if current.imag <= eps_im:
            return points, f"pair returned to the real axis at {value:.6f}"
        points.append((float(value), float(current.imag)))
    return points, None


def _follow_records(
    records: Sequence[SpectrumRecord], start: int, seed: complex, stop_parameter: float
) -> Tuple[List[Tuple[float, float]], Optional[str]]:
    """Grid-only variant of ``_follow_upper`` over precomputed records."""
    points = []
    current = seed
    for record in records[start:]:
        if record.parameter > stop_parameter:
            break
        energies = record.quasienergies
        upper = energies[energies.imag > record.eps_im]
        if upper.size == 0:
            return points, f"pair returned to the real axis at {record.parameter:.6f}"
        current = upper[np.argmin(np.abs(upper - current))]
        points.append((record.parameter, float(current.imag)))
    return points, None


def fit_square_root(points: Sequence[Tuple[float, float]], lambda_ep: float) -> Tuple[float, float, float]:
    """
    Fit Im E = c (lambda - lambda_EP)^e on log-log axes.

    Returns:
        (exponent, prefactor, relative RMS misfit)
    """
    x = np.array([p - lambda_ep for p, _ in points])
    y = np.array([value for _, value in points])
    keep = (x > 0) & (y > 0)
    x, y = x[keep], y[keep]
    if x.size < 3:
        raise NumericalError("need at least three broken-side points to fit the branching exponent")
    exponent, log_prefactor = np.polyfit(np.log(x), np.log(y), 1)
    prefactor = float(np.exp(log_prefactor))
    misfit = float(np.sqrt(np.mean(((prefactor * x ** exponent - y) / y) ** 2)))
    return float(exponent), prefactor, misfit


def _ep_record(lambda_ep: float, pair: Tuple[int, int], window: Tuple[float, float],
               points: List[Tuple[float, float]], lost: Optional[str]) -> EPRecord:
    """Fit the followed branch; a failed fit is kept with NaN values and a note."""
    try:
        exponent, prefactor, misfit = fit_square_root(points, lambda_ep)
    except NumericalError as e:
        note = f"{lost}; {str(e)}" if lost else str(e)
        logger.warning(f"EP at {lambda_ep:.6f}: no branching fit ({note})")
        return EPRecord(
            lambda_ep=lambda_ep, pair=pair, window=window,
            fit_exponent=float("nan"), fit_prefactor=float("nan"), fit_residual=float("nan"),
            fit_ok=False, note=note,
        )
    logger.info(f"EP at {lambda_ep:.6f}: exponent {exponent:.3f}, misfit {misfit:.2e}")
    return EPRecord(
        lambda_ep=lambda_ep, pair=pair, window=window,
        fit_exponent=exponent, fit_prefactor=prefactor, fit_residual=misfit,
        note=lost,
    )


def detect_eps(
    records: Sequence[SpectrumRecord],
    spectrum: Optional[Callable[[float], np.ndarray]] = None,
    tolerances: Tolerances = TOLERANCES,
    fit_points: int = 8,
) -> List[EPRecord]:
    """
    Exceptional points along a sweep: every step where a new conjugate pair
    leaves the real axis.

    With ``spectrum`` (quasienergies as a function of the swept parameter),
    lambda_EP is bisected to w = min(threshold_width, 1e-3 d), d = sweep step.
    The newborn pair is the complex pair with the smallest |Im E| just past
    lambda_EP; its upper member is followed over ``fit_points`` geometric
    offsets in [100 w, d] and Im E is fitted to a power law. Without
    ``spectrum`` lambda_EP is the last unbroken grid point and the pair is
    followed over the grid on [lambda_EP + d, lambda_EP + 10 d].

    Onsets whose branch cannot be fitted are returned with ``fit_ok`` False.

    Returns:
        EPRecords in parameter order (empty for a sweep that never breaks)
    """
    records = sorted(records, key=lambda record: record.parameter)
    if len(records) < 2:
        return []
    step = (records[-1].parameter - records[0].parameter) / (len(records) - 1)

    found: List[EPRecord] = []
    for i in range(1, len(records)):
        before, after = records[i - 1], records[i]
        if after.n_com <= before.n_com:
            continue

        if spectrum is None:
            lambda_ep = before.parameter
            window = (lambda_ep + step, lambda_ep + 10.0 * step)
            pair = _onset_pair(after.quasienergies, after.eps_im)
            seed = after.quasienergies[pair[1]] if after.quasienergies[pair[1]].imag > 0 else after.quasienergies[pair[0]]
            points, lost = _follow_records(records, i, seed, window[1] + 1e-9 * abs(step))
            points = [p for p in points if p[0] >= window[0] - 1e-9 * abs(step)]
            found.append(_ep_record(lambda_ep, pair, window, points, lost))
            continue

        eps_im = before.eps_im

        def is_broken(value: float) -> bool:
            return classify_spectrum(spectrum(value), eps_im)["n_com"] > before.n_com

        width = min(tolerances.threshold_width, 1e-3 * step)
        lambda_ep = _bisect_onset(is_broken, before.parameter, after.parameter, width)

        onset = spectrum(min(lambda_ep + width, after.parameter))
        offsets = np.geomspace(100.0 * width, step, max(fit_points, 3))
        window = (lambda_ep + float(offsets[0]), lambda_ep + float(offsets[-1]))
        try:
            pair = _onset_pair(onset, eps_im)
        except NumericalError as e:
            found.append(_ep_record(lambda_ep, (-1, -1), window, [], str(e)))
            continue
        seed = onset[pair[1]] if onset[pair[1]].imag > 0 else onset[pair[0]]
        points, lost = _follow_upper(spectrum, lambda_ep + offsets, seed, eps_im)
        found.append(_ep_record(lambda_ep, pair, window, points, lost))
    return found


# ---------------------------------------------------------------------------
# Unit-circle trajectories
# ---------------------------------------------------------------------------

def _nearest(xi: np.ndarray, target: complex, exclude: Optional[int] = None) -> int:
    distances = np.abs(xi - target)
    if exclude is not None:
        distances[exclude] = np.inf
    return int(np.argmin(distances))


def _continue_pair(
    xi: np.ndarray,
    previous: Tuple[complex, complex],
    circle_tol: float,
    pair_tol: float,
    degeneracy: float,
) -> Tuple[int, int, bool]:
    """
    Next members of a PT pair.

    xi_1 continues by nearest neighbour. Its partner is the eigenvalue at
    1/conj(xi_1); on the unit circle, where 1/conj(xi_1) = xi_1, a partner
    that is not degenerate with xi_1 continues by nearest neighbour instead.

    Returns:
        (index of xi_1, index of xi_2, ambiguous)
    """
    first = _nearest(xi, previous[0])
    mirror = 1.0 / np.conj(xi[first])
    candidate = _nearest(xi, mirror, exclude=first)
    pairing_error = abs(xi[candidate] - mirror)
    on_circle = abs(np.log(abs(xi[first]))) <= circle_tol

    ambiguous = False
    if pairing_error <= pair_tol * max(1.0, abs(mirror)):
        second = candidate
    elif on_circle:
        second = _nearest(xi, previous[1], exclude=first)
    else:
        second = candidate
        ambiguous = True

    gaps = np.abs(xi[:, None] - xi[[first, second]][None, :])
    gaps[[first, second], :] = np.inf
    return first, second, ambiguous or bool((gaps < degeneracy).any())


def trajectory(
    model: LatticeModel,
    params: ModelParameters,
    values: Sequence[float],
    pair: Optional[Tuple[int, int]] = None,
    degeneracy: float = 1e-8,
    circle_tol: float = 1e-6,
    pair_tol: float = 1e-9,
) -> List[TrajectoryPoint]:
    """
    Follow a pair of Floquet eigenvalues xi across a grid of the scan parameter.

    Without ``pair`` the pair is chosen at its collision: the first grid point
    where an eigenvalue leaves the unit circle (|log|xi|| > ``circle_tol``),
    taking the largest |xi| there and its partner 1/conj(xi). It is followed
    backward and forward from that point; at every step the partner is
    re-paired with 1/conj(xi_1), and points where that fails, or where
    another eigenvalue is degenerate with the pair, are flagged ambiguous.
    A sweep that never breaks follows the two closest eigenvalues of the last
    grid point.

    Args:
        pair: Labels in the ascending Re E order of the first grid point
    """
    values = sorted(float(v) for v in values)
    if not values:
        raise ValueError("trajectory needs at least one grid value")

    spectra = [
        eig_general(evolve_protocol(model.protocol(model.with_value(params, value)))).eigenvalues
        for value in values
    ]

    if pair is not None:
        xi = spectra[0]
        order = np.lexsort((np.abs(xi), np.round(-np.angle(xi), 10)))
        start = 0
        seed = (complex(xi[order[pair[0]]]), complex(xi[order[pair[1]]]))
    else:
        off_circle = [float(np.max(np.abs(np.log(np.abs(xi))))) > circle_tol for xi in spectra]
        if any(off_circle):
            start = off_circle.index(True)
            xi = spectra[start]
            first = int(np.argmax(np.abs(xi)))
            seed = (complex(xi[first]), complex(xi[_nearest(xi, 1.0 / np.conj(xi[first]), exclude=first)]))
        else:
            start = len(spectra) - 1
            xi = spectra[start]
            distances = np.abs(xi[:, None] - xi[None, :])
            np.fill_diagonal(distances, np.inf)
            first, second = np.unravel_index(np.argmin(distances), distances.shape)
            seed = (complex(xi[first]), complex(xi[second]))
        logger.debug(f"Trajectory pair chosen at {values[start]:.6f}")

    points: List[Optional[TrajectoryPoint]] = [None] * len(values)
    for direction in (range(start, len(values)), range(start - 1, -1, -1)):
        previous = seed
        for index in direction:
            xi = spectra[index]
            first, second, ambiguous = _continue_pair(xi, previous, circle_tol, pair_tol, degeneracy)
            previous = (complex(xi[first]), complex(xi[second]))
            points[index] = TrajectoryPoint(parameter=values[index], xi1=previous[0], xi2=previous[1], ambiguous=ambiguous)

    if any(point.ambiguous for point in points):
        logger.info("Trajectory passes degeneracies or unpaired points; see the ambiguous flags")
    return points


# ---------------------------------------------------------------------------
# Bandwidth criterion
# ---------------------------------------------------------------------------

def bandwidth_criterion(
    model: LatticeModel,
    params: ModelParameters,
    k_points: int = BLOCH_K_POINTS,
) -> BandwidthReport:
    """
    Widths of the unfolded PBC bands; breaking is predicted once the relevant
    width (one band, or the whole spectrum for the "total" criterion)
    reaches the zone width 2 pi / T.
    """
    bands = pbc_bloch_bands(model.ansatz(params), params.T, k_points)
    widths = [float(bands[:, b].max() - bands[:, b].min()) for b in range(bands.shape[1])]
    total = float(bands.max() - bands.min())
    relevant = total if model.criterion == "total" else max(widths)
    zone = 2.0 * np.pi / params.T
    return BandwidthReport(
        parameter=model.scan_value(params),
        bandwidths=widths,
        total_bandwidth=total,
        relevant_width=relevant,
        criterion=model.criterion,
        zone_width=zone,
        predicted_critical=relevant >= zone,
    )


def critical_parameter(
    model: LatticeModel,
    params: ModelParameters,
    bracket: Tuple[float, float],
    k_points: int = BLOCH_K_POINTS,
) -> float:
    """
    Scan-parameter value where the relevant PBC width equals 2 pi / T (brentq).

    Raises:
        BracketError: if the width does not cross 2 pi / T inside the bracket
    """
    def excess(value: float) -> float:
        report = bandwidth_criterion(model, model.with_value(params, value), k_points)
        return report.relevant_width - report.zone_width

    low, high = bracket
    if np.sign(excess(low)) == np.sign(excess(high)):
        raise BracketError(f"bandwidth does not reach 2pi/T inside ({low}, {high})")
    return float(brentq(excess, low, high, xtol=1e-10))


# ---------------------------------------------------------------------------
# Localization
# ---------------------------------------------------------------------------

def cell_weights(eigvecs: np.ndarray, sites: int, band_dim: int) -> np.ndarray:
    """|psi|^2 summed over bands in each cell, normalized per state; shape (states, N)."""
    weights = np.abs(eigvecs) ** 2
    weights = weights.reshape(sites, band_dim, -1).sum(axis=1).T
    totals = weights.sum(axis=1, keepdims=True)
    totals[totals == 0.0] = 1.0
    return weights / totals


def envelope_exponent(amplitudes: np.ndarray) -> float:
    """
    alpha in |psi(x)| ~ exp(alpha x / N), fitted over the middle half of the chain.

    Standing-wave nodes are bridged by taking the maximum over short blocks.
    """
    sites = amplitudes.size
    lo, hi = sites // 4, max(sites // 4 + 2, (3 * sites) // 4)
    middle = amplitudes[lo:hi]
    block = max(1, middle.size // 25)
    blocks = middle.size // block
    if blocks < 2:
        return 0.0
    peaks = middle[:blocks * block].reshape(blocks, block).max(axis=1)
    centres = lo + 1 + block * np.arange(blocks) + (block - 1) / 2.0
    keep = peaks > 0
    if keep.sum() < 2:
        return 0.0
    slope, _ = np.polyfit(centres[keep], np.log(peaks[keep]), 1)
    return float(slope * sites)


def mean_positions(
    eigvecs: np.ndarray,
    sites: int,
    band_dim: int = 1,
    quasienergies: Optional[np.ndarray] = None,
    with_alphas: bool = False,
) -> LocalizationRecord:
    """
    <x>_n = sum_j j |psi_n(j)|^2 / sum_j |psi_n(j)|^2 with j the 1-based cell index.

    States are sorted by ascending Im E when quasienergies are given.
    """
    if eigvecs.shape[0] != sites * band_dim:
        raise ValueError(f"eigenvectors have {eigvecs.shape[0]} rows, expected {sites * band_dim}")
    weights = cell_weights(eigvecs, sites, band_dim)
    positions = weights @ np.arange(1, sites + 1)

    if quasienergies is None:
        quasienergies = np.zeros(weights.shape[0], dtype=complex)
    order = np.argsort(quasienergies.imag, kind="stable")
    alphas = None
    if with_alphas:
        alphas = np.array([envelope_exponent(np.sqrt(w)) for w in weights[order]])
    return LocalizationRecord(
        sites=sites,
        band_dim=band_dim,
        quasienergies=np.asarray(quasienergies)[order],
        mean_positions=positions[order],
        alphas=alphas,
    )


def envelope_profiles(eigvecs: np.ndarray, sites: int, band_dim: int, indices: Sequence[int]) -> np.ndarray:
    """Per-cell |psi| of the selected states, each normalized to unit norm; shape (len(indices), N)."""
    weights = cell_weights(eigvecs[:, list(indices)], sites, band_dim)
    return np.sqrt(weights)


def envelope_ranks(states: int, count: int) -> List[int]:
    """``count`` ranks spread over the upper (larger Im E) half of the spectrum."""
    if count <= 0 or states == 0:
        return []
    return sorted(set(np.linspace(states // 2, states - 1, count).round().astype(int).tolist()))


def _scale_free_point(task):
    model, params, sites, envelope_states = task
    point = params.updated(N=sites, eta=0.0)
    result = floquet_spectrum(model.protocol(point))
    eps_im = default_eps_im(result.quasienergies)
    imag = np.abs(result.quasienergies.imag)
    complex_states = imag[imag > eps_im]
    mean_abs_im = float(complex_states.mean()) if complex_states.size else 0.0
    record = mean_positions(result.eigvecs, sites, model.band_dim, result.quasienergies, with_alphas=True)

    order = np.argsort(result.quasienergies.imag, kind="stable")
    ranks = envelope_ranks(len(order), envelope_states)
    envelopes = envelope_profiles(result.eigvecs, sites, model.band_dim, order[ranks]) if ranks else np.empty((0, sites))
    return sites, mean_abs_im, record, ranks, envelopes


def scale_free_fits(
    model: LatticeModel,
    params: ModelParameters,
    sizes: Sequence[int],
    workers: int = 1,
    envelope_states: int = 0,
) -> ScaleFreeFit:
    """
    Slope of log(mean |Im E|) against log N over complex states, plus
    per-state envelope exponents at every size.

    Args:
        envelope_states: Number of |psi(x)| profiles kept per size

    Raises:
        NumericalError: if some size has no complex states (below threshold)
    """
    sizes = sorted(set(int(n) for n in sizes))
    if len(sizes) < 2:
        raise ValueError("scale-free fit needs at least two sizes")
    if len(sizes) < 4 or sizes[-1] < 8 * sizes[0]:
        logger.warning(f"Sizes {sizes} are few or narrow; the slope is loosely constrained")

    rows = run_points(_scale_free_point, [(model, params, n, envelope_states) for n in sizes], workers)
    empty = [row[0] for row in rows if row[1] == 0.0]
    if empty:
        raise NumericalError(f"no complex states at {model.scan_parameter}={model.scan_value(params)} for N={empty}")

    ns = np.array([row[0] for row in rows], dtype=float)
    means = np.array([row[1] for row in rows])
    slope, intercept = np.polyfit(np.log(ns), np.log(means), 1)
    logger.info(f"Scale-free fit: slope {slope:.3f} over N={sizes}")
    return ScaleFreeFit(
        lam=model.scan_value(params),
        sizes=sizes,
        mean_abs_im=[float(m) for m in means],
        slope=float(slope),
        intercept=float(intercept),
        localization={row[0]: row[2] for row in rows},
        envelope_ranks={row[0]: row[3] for row in rows},
        envelopes={row[0]: row[4] for row in rows},
    )


def scale_invariance(records: Dict[int, LocalizationRecord], threshold: float = 0.05) -> Dict[int, float]:
    """Fraction of off-centre states (|<x>/N - 0.5| > threshold) per size."""
    return {n: record.off_centre_fraction(threshold) for n, record in sorted(records.items())}


def rank_matched_deviation(small: LocalizationRecord, large: LocalizationRecord) -> float:
    """
    Max |<x>/N| difference between states of two sizes matched by their rank in Im E.
    """
    ratios_small = small.mean_position_ratio
    ratios_large = large.mean_position_ratio
    ranks = np.round(np.arange(ratios_small.size) * (ratios_large.size - 1) / max(1, ratios_small.size - 1)).astype(int)
    return float(np.max(np.abs(ratios_small - ratios_large[ranks])))
