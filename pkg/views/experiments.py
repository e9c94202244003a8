"""
Experiment runners: one per figure subcommand.
Each runner validates what it needs from the config, computes, and writes
CSV (authoritative), JSON, HTML and SVG outputs into the configured directory.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from config.settings import MAX_PROFILE_SIZE, MAX_SWEEP_SIZE
from models.experiment import ExperimentConfig, ModelParameters, SweepAxis
from models.results import AuditReport, SpectrumRecord
from services.floquet_engine import averaged_hamiltonian, floquet_spectrum
from services.lattice.base_model import LatticeModel
from services.lattice.model_factory import get_model_factory
from services.perturbation import (
    bch_truncated,
    boundary_decay_profile,
    convergence_bound,
    decay_length,
    default_cutoff,
    gamma_scan,
    perturbation_split,
)
from services.spectral_analytics import (
    bandwidth_criterion,
    critical_parameter,
    detect_eps,
    rank_matched_deviation,
    scale_free_fits,
    scale_invariance,
    spectrum_along,
    sweep_records,
    threshold_lambda_c,
    trajectory,
)
from services.symmetry_audit import audit_model
from utils.errors import BracketError, ConfigError, NumericalError
from utils.linalg import non_hermitian_part
from utils.output_writer import ensure_output_dir, write_csv, write_figure, write_json
from views.components.visualizations import (
    create_bandwidth_chart,
    create_perturbation_chart,
    create_phase_diagram_chart,
    create_scale_free_chart,
    create_spectrum_chart,
    create_trajectory_chart,
)

logger = logging.getLogger(__name__)


def _prepare(cfg: ExperimentConfig) -> Tuple[LatticeModel, ModelParameters, Path]:
    """
    Resolve the model and its parameters, create the output directory, record the config.

    Raises:
        ConfigError: if the model cannot be built on the configured lattice
    """
    model = get_model_factory().get_model(cfg.model, ansatz=cfg.ansatz, parity=cfg.parity)
    params = model.resolve(cfg.params)
    try:
        model.protocol(params)
        model.parity(model.lattice(params))
    except ValueError as e:
        raise ConfigError(f"model {cfg.model!r} is not valid for these parameters: {str(e)}") from e
    out = ensure_output_dir(cfg.output_path())
    write_json(cfg.to_dict(), out / "run_config.json")
    logger.info(f"Model: {model.name} ({model.scan_parameter} = {model.scan_value(params)}), output: {out}")
    return model, params, out


def _require_sweep(cfg: ExperimentConfig) -> SweepAxis:
    if cfg.sweep is None:
        raise ConfigError("this experiment needs a 'sweep' section")
    if cfg.sweep.parameter not in ModelParameters.model_fields:
        raise ConfigError(f"unknown sweep parameter {cfg.sweep.parameter!r}")
    return cfg.sweep


def _require_scan_sweep(cfg: ExperimentConfig, model: LatticeModel) -> SweepAxis:
    sweep = _require_sweep(cfg)
    if sweep.parameter != model.scan_parameter:
        raise ConfigError(
            f"sweep parameter {sweep.parameter!r} must be the model's scan parameter {model.scan_parameter!r}"
        )
    return sweep


def _check_size(sites: int, limit: int, what: str) -> None:
    if sites > limit:
        logger.warning(f"N={sites} exceeds the desk-scale limit {limit} for {what}; expect long runtimes")


def _spectrum_rows(records: List[SpectrumRecord]) -> List[dict]:
    return [row for record in records for row in record.spectrum_rows()]


def _critical_or_none(model: LatticeModel, params: ModelParameters, bracket: Tuple[float, float]) -> Optional[float]:
    try:
        return critical_parameter(model, params, bracket)
    except BracketError as e:
        logger.info(f"No bandwidth-criterion crossing: {str(e)}")
    except NumericalError as e:
        logger.warning(f"Bandwidth criterion unavailable for {model.name}: {str(e)}")
    return None


def run_spectrum_sweep(cfg: ExperimentConfig) -> Dict:
    """
    Quasienergy spectra and P_com along a parameter sweep.

    Writes eps.json and spectrum_summary.json, plus per requested observable:
    spectrum.csv, spectrum_pbc.csv and the spectrum figure ("spectrum"),
    p_com.csv ("p_com"), bandwidth.csv and its figure ("bandwidth").
    """
    model, params, out = _prepare(cfg)
    sweep = _require_sweep(cfg)
    _check_size(params.N, MAX_SWEEP_SIZE, "dense sweeps")
    values = sweep.values()
    wanted = set(cfg.observables)

    records = sweep_records(model, params, sweep.parameter, values, cfg.eps_im, cfg.workers)
    spectrum = pd.DataFrame(_spectrum_rows(records), columns=["param", "index", "re_E", "im_E"])
    summary = pd.DataFrame([r.summary_row() for r in records], columns=["param", "p_com", "n_com", "max_abs_im"])
    files = []
    if "spectrum" in wanted:
        files.append(write_csv(spectrum, out / "spectrum.csv"))
    if "p_com" in wanted:
        files.append(write_csv(summary, out / "p_com.csv"))

    pbc_spectrum = None
    if "spectrum" in wanted and cfg.compare_pbc and sweep.parameter != "eta":
        pbc_records = sweep_records(model, params.updated(eta=1.0), sweep.parameter, values, cfg.eps_im, cfg.workers)
        pbc_spectrum = pd.DataFrame(_spectrum_rows(pbc_records), columns=["param", "index", "re_E", "im_E"])
        files.append(write_csv(pbc_spectrum, out / "spectrum_pbc.csv"))

    critical = None
    if sweep.parameter == model.scan_parameter:
        low, high = sorted((sweep.start, sweep.stop))
        critical = _critical_or_none(model, params, (low, high))
        if "bandwidth" in wanted:
            try:
                widths = _bandwidth_table(model, params, values)
                files.append(write_csv(widths, out / "bandwidth.csv"))
                files.extend(write_figure(
                    create_bandwidth_chart(widths, 2.0 * np.pi / params.T, sweep.parameter), out / "bandwidth.html"
                ))
            except NumericalError as e:
                logger.warning(f"Skipping bandwidth table: {str(e)}")

    eps = []
    if cfg.detect_eps:
        along = spectrum_along(model, params, sweep.parameter) if sweep.parameter != "N" else None
        eps = detect_eps(records, along)
        files.append(write_json({"eps": [ep.to_dict() for ep in eps]}, out / "eps.json"))

    files.append(write_json({
        "model": model.model_id,
        "parameter": sweep.parameter,
        "points": len(records),
        "critical_parameter": critical,
        "first_broken": next((r.parameter for r in records if r.n_com > 0), None),
        "ep_count": len(eps),
    }, out / "spectrum_summary.json"))
    if "spectrum" in wanted:
        files.extend(write_figure(
            create_spectrum_chart(spectrum, summary, sweep.parameter, pbc_spectrum, critical), out / "spectrum.html"
        ))
    return {"files": files, "records": records, "eps": eps, "critical": critical}


def _bandwidth_table(model: LatticeModel, params: ModelParameters, values: np.ndarray) -> pd.DataFrame:
    rows = []
    for value in values:
        report = bandwidth_criterion(model, model.with_value(params, float(value)))
        row = {"param": float(value)}
        row.update({f"band_{b + 1}": width for b, width in enumerate(report.bandwidths)})
        row.update({"total": report.total_bandwidth, "predicted_critical": report.predicted_critical})
        rows.append(row)
    return pd.DataFrame(rows)


def run_phase_diagram(cfg: ExperimentConfig) -> Dict:
    """
    P_com on a (scan parameter x N) grid with bisected thresholds per N.

    Writes phase_grid.csv, thresholds.csv, phase_diagram.json and phase_diagram.html.
    """
    model, params, out = _prepare(cfg)
    sweep = _require_scan_sweep(cfg, model)
    sizes = cfg.sizes or [params.N]
    _check_size(max(sizes), MAX_SWEEP_SIZE, "phase diagrams")
    bracket = cfg.bracket or tuple(sorted((sweep.start, sweep.stop)))

    grid_rows = []
    threshold_rows = []
    for sites in sizes:
        at_size = params.updated(N=sites)
        for record in sweep_records(model, at_size, sweep.parameter, sweep.values(), cfg.eps_im, cfg.workers):
            grid_rows.append({"param": record.parameter, "N": sites, "p_com": record.p_com})
        try:
            threshold = threshold_lambda_c(model, at_size, bracket, cfg.eps_im)
            threshold_rows.append({"N": sites, "threshold": threshold})
        except BracketError as e:
            logger.warning(f"N={sites}: {str(e)}")

    grid = pd.DataFrame(grid_rows, columns=["param", "N", "p_com"])
    thresholds = pd.DataFrame(threshold_rows, columns=["N", "threshold"])
    critical = _critical_or_none(model, params, bracket)
    files = [
        write_csv(grid, out / "phase_grid.csv"),
        write_csv(thresholds, out / "thresholds.csv"),
        write_json({
            "model": model.model_id,
            "parameter": sweep.parameter,
            "bracket": list(bracket),
            "thresholds": threshold_rows,
            "bandwidth_prediction": critical,
        }, out / "phase_diagram.json"),
        *write_figure(create_phase_diagram_chart(grid, thresholds, sweep.parameter), out / "phase_diagram.html"),
    ]
    return {"files": files, "thresholds": thresholds, "critical": critical}


def run_trajectory(cfg: ExperimentConfig) -> Dict:
    """
    Floquet eigenvalue pair across the sweep.

    Writes trajectory.csv (with |xi1 xi2|), trajectory.json and trajectory.html.
    """
    model, params, out = _prepare(cfg)
    sweep = _require_scan_sweep(cfg, model)
    points = trajectory(model, params, sweep.values(), cfg.pair)

    table = pd.DataFrame([point.to_row() for point in points])
    deviation = max(abs(point.product_modulus - 1.0) for point in points)
    exits = [point.parameter for point in points if abs(abs(point.xi1) - 1.0) > 1e-3]
    files = [
        write_csv(table, out / "trajectory.csv"),
        write_json({
            "model": model.model_id,
            "points": len(points),
            "max_product_deviation": deviation,
            "circle_exit": exits[0] if exits else None,
            "ambiguous_points": [point.parameter for point in points if point.ambiguous],
        }, out / "trajectory.json"),
        *write_figure(create_trajectory_chart(table), out / "trajectory.html"),
    ]
    return {"files": files, "points": points}


def run_scale_free(cfg: ExperimentConfig) -> Dict:
    """
    Finite-size scaling of mean |Im E| and mean positions at fixed parameter.

    Writes scaling.csv, positions.csv, envelopes.csv, scale_free.json and scale_free.html.
    """
    model, params, out = _prepare(cfg)
    if len(cfg.sizes) < 2:
        raise ConfigError("scale-free runs need at least two 'sizes'")
    _check_size(max(cfg.sizes), MAX_PROFILE_SIZE, "scale-free fits")

    fit = scale_free_fits(model, params, cfg.sizes, cfg.workers, cfg.envelope_states)

    scaling = pd.DataFrame({
        "N": fit.sizes,
        "inv_N": [1.0 / n for n in fit.sizes],
        "mean_abs_im": fit.mean_abs_im,
    })
    position_rows = []
    envelope_rows = []
    for sites in fit.sizes:
        record = fit.localization[sites]
        for n, (energy, ratio, alpha) in enumerate(zip(record.quasienergies, record.mean_position_ratio, record.alphas)):
            position_rows.append({"N": sites, "n": n, "im_E": float(energy.imag), "x_over_N": float(ratio), "alpha": float(alpha)})
        for rank, profile in zip(fit.envelope_ranks.get(sites, []), fit.envelopes.get(sites, [])):
            for cell, amplitude in enumerate(profile, start=1):
                envelope_rows.append({"N": sites, "state": rank, "site": cell, "amplitude": float(amplitude)})

    positions = pd.DataFrame(position_rows, columns=["N", "n", "im_E", "x_over_N", "alpha"])
    envelopes = pd.DataFrame(envelope_rows, columns=["N", "state", "site", "amplitude"])
    fractions = scale_invariance(fit.localization)
    deviations = {
        f"{small}->{large}": rank_matched_deviation(fit.localization[small], fit.localization[large])
        for small, large in zip(fit.sizes, fit.sizes[1:])
    }
    files = [
        write_csv(scaling, out / "scaling.csv"),
        write_csv(positions, out / "positions.csv"),
        write_csv(envelopes, out / "envelopes.csv"),
        write_json({
            "model": model.model_id,
            "parameter": fit.lam,
            "slope": fit.slope,
            "intercept": fit.intercept,
            "off_centre_fraction": fractions,
            "rank_matched_deviation": deviations,
        }, out / "scale_free.json"),
        *write_figure(create_scale_free_chart(scaling, positions, envelopes), out / "scale_free.html"),
    ]
    return {"files": files, "fit": fit}


def run_perturbation(cfg: ExperimentConfig) -> Dict:
    """
    Structure of V = H_F,OBC - H_0 at one parameter point, plus an optional
    Gamma_p(N) scan over ``sizes``.

    Writes heatmap.csv, profiles.csv, gamma.csv (with sizes),
    perturbation.json and perturbation.html.
    """
    model, params, out = _prepare(cfg)
    params = params.updated(eta=0.0)
    _check_size(params.N, MAX_PROFILE_SIZE, "perturbation profiles")

    protocol = model.protocol(params)
    result = floquet_spectrum(protocol)
    h0 = averaged_hamiltonian(protocol)
    cutoff = default_cutoff(params.N, cfg.cutoff_fraction)
    split = perturbation_split(result.h_f, h0, cutoff, model.band_dim)

    magnitudes = np.abs(split.v)
    nh_magnitudes = np.abs(non_hermitian_part(result.h_f))
    floor = 1e-14 * max(float(magnitudes.max()), float(nh_magnitudes.max()), 1e-300)
    rows, cols = np.nonzero((magnitudes > floor) | (nh_magnitudes > floor))
    heatmap = pd.DataFrame({
        "site_i": rows + 1,
        "site_j": cols + 1,
        "abs_V": magnitudes[rows, cols],
        "abs_V_nonhermitian": nh_magnitudes[rows, cols],
    })

    main = boundary_decay_profile(split, "main")
    secondary = dict(boundary_decay_profile(split, "secondary"))
    profiles = pd.DataFrame({
        "site": [site for site, _ in main],
        "main": [value for _, value in main],
        "secondary": [secondary.get(site, np.nan) for site, _ in main],
    })

    summary = {
        "model": model.model_id,
        "parameter": model.scan_value(params),
        "N": params.N,
        "cutoff": cutoff,
        "gamma_p": split.gamma_p,
        "log_method": result.log_method,
    }
    try:
        length, amplitude = decay_length(main, cutoff)
        summary.update({"decay_length": length, "decay_amplitude": amplitude})
    except NumericalError as e:
        logger.info(f"No decay fit: {str(e)}")

    if len(protocol.steps) == 2:
        summary["convergence_bound"] = convergence_bound(protocol)
        summary["bch_error"] = {
            f"order_{order}": float(np.linalg.norm(bch_truncated(protocol, order) - result.h_f))
            for order in (1, 2, 3)
        }

    files = [
        write_csv(heatmap, out / "heatmap.csv"),
        write_csv(profiles, out / "profiles.csv"),
    ]
    gamma = None
    if len(cfg.sizes) >= 2:
        _check_size(max(cfg.sizes), MAX_PROFILE_SIZE, "Gamma_p scans")
        gamma, slope = gamma_scan(model, params, cfg.sizes, cfg.cutoff_fraction, cfg.workers)
        summary["gamma_slope"] = slope
        files.append(write_csv(gamma, out / "gamma.csv"))

    files.append(write_json(summary, out / "perturbation.json"))
    files.extend(write_figure(create_perturbation_chart(nh_magnitudes, profiles, gamma), out / "perturbation.html"))
    return {"files": files, "split": split, "summary": summary}


def run_validate(cfg: ExperimentConfig) -> AuditReport:
    """Audit the configured model and write audit.json."""
    model, params, out = _prepare(cfg)
    report = audit_model(model, params, cfg.k_samples)
    write_json(report.to_dict(), out / "audit.json")
    return report


def list_models() -> List[Dict[str, str]]:
    """Available presets (id, name, description, scan parameter)."""
    return get_model_factory().get_available_models()
