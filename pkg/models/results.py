"""
Result records produced by the numerical services.
All records serialize to plain dictionaries with stable field names.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator


def complex_pair(z: complex) -> List[float]:
    """Encode a complex number as [re, im] for JSON."""
    return [float(np.real(z)), float(np.imag(z))]


class EigDecomposition(BaseModel):
    """Right eigenpairs of a general complex matrix."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eigenvalues: np.ndarray
    right_eigenvectors: np.ndarray  # column-stacked, unit 2-norm
    residuals: np.ndarray           # ||M v - xi v||_2 / ||M||_F
    condition_estimate: float       # 2-norm condition number of the eigenvector matrix

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if self.residuals.size else 0.0


class MatrixLog(BaseModel):
    """Floquet Hamiltonian H = (i/T) log U with the quasienergy branch bookkeeping."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    h: np.ndarray
    quasienergies: np.ndarray
    eig: EigDecomposition
    branch_flags: np.ndarray
    method: str  # "eig" or "schur"


class FloquetResult(BaseModel):
    """U_F, H_F and the quasienergy spectrum for one protocol."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    u_f: np.ndarray
    h_f: np.ndarray
    quasienergies: np.ndarray   # sorted: ascending Re E, ties by Im E
    floquet_eigs: np.ndarray    # xi = exp(-i E T), same order
    eigvecs: np.ndarray         # columns in the same order
    residual_max: float
    branch_flags: np.ndarray
    condition_estimate: float
    period: float
    log_method: str = "eig"


class PTOperators(BaseModel):
    """Parity matrix P; time reversal K is complex conjugation."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    parity: np.ndarray
    kind: str = "custom"

    @model_validator(mode="after")
    def _check_parity(self) -> "PTOperators":
        p = self.parity
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"parity must be square, got shape {p.shape}")
        if np.any(np.abs(np.imag(p)) > 0):
            raise ValueError("parity must be real-valued")
        if not np.allclose(p @ p, np.eye(p.shape[0]), atol=1e-14):
            raise ValueError("parity must square to the identity")
        return self

    @property
    def dim(self) -> int:
        return self.parity.shape[0]


class ConditionCheck(BaseModel):
    """Pass/fail plus the norm that decided it."""

    passed: bool
    defect: float

    def to_dict(self) -> dict:
        return {"passed": self.passed, "defect": self.defect}


class Eq13Flag(BaseModel):
    r: int
    r_prime: int
    family: str  # "x1_y2", "y1_x2" or "y2x1_minus_x2y1"
    norm: float
    holds: bool


class Eq13Flags(BaseModel):
    flags: List[Eq13Flag]
    passed: bool

    def families_holding(self) -> List[str]:
        return sorted({flag.family for flag in self.flags if flag.holds})


class AuditReport(BaseModel):
    """Outcome of checking a protocol against the three construction conditions."""

    model_name: str
    cond_pt: ConditionCheck
    cond_pt_floquet: Optional[ConditionCheck] = None
    cond_pbc_hermitian: ConditionCheck
    cond_pbc_commute: ConditionCheck
    cond_obc_noncommute: ConditionCheck
    eq13: Eq13Flags
    g1_norm: float
    g2_norm: float
    k_samples: int

    @property
    def all_passed(self) -> bool:
        checks = [self.cond_pt, self.cond_pbc_hermitian, self.cond_pbc_commute, self.cond_obc_noncommute]
        if self.cond_pt_floquet is not None:
            checks.append(self.cond_pt_floquet)
        return all(check.passed for check in checks)

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "all_passed": self.all_passed,
            "cond_pt": self.cond_pt.to_dict(),
            "cond_pt_floquet": self.cond_pt_floquet.to_dict() if self.cond_pt_floquet else None,
            "cond_pbc_hermitian": self.cond_pbc_hermitian.to_dict(),
            "cond_pbc_commute": self.cond_pbc_commute.to_dict(),
            "cond_obc_noncommute": self.cond_obc_noncommute.to_dict(),
            "eq13": {
                "passed": self.eq13.passed,
                "families": self.eq13.families_holding(),
                "flags": [flag.model_dump() for flag in self.eq13.flags],
            },
            "g1_norm": self.g1_norm,
            "g2_norm": self.g2_norm,
            "k_samples": self.k_samples,
        }

    def summary(self) -> str:
        """Human-readable report, one condition per line."""

        def line(label: str, check: Optional[ConditionCheck]) -> str:
            if check is None:
                return f"  {label:<34} skipped"
            status = "PASS" if check.passed else "FAIL"
            return f"  {label:<34} {status}  (norm {check.defect:.3e})"

        lines = [
            f"Model: {self.model_name}",
            line("(i)   PT of the protocol", self.cond_pt),
            line("(i')  PT of U_F", self.cond_pt_floquet),
            line("(ii)  h1+h2 Hermitian", self.cond_pbc_hermitian),
            line("(ii)  [h1(k), h2(k)] = 0", self.cond_pbc_commute),
            line("(iii) [H1, H2]_OBC != 0", self.cond_obc_noncommute),
            f"  {'Eq13 hopping inequalities':<34} {'PASS' if self.eq13.passed else 'FAIL'}"
            f"  ({', '.join(self.eq13.families_holding()) or 'none'})",
            f"  ||G1||_F = {self.g1_norm:.3e}   ||G2||_F = {self.g2_norm:.3e}  (G2 is authoritative)",
        ]
        return "\n".join(lines)


class PerturbationSplit(BaseModel):
    """V = H_F,OBC - H_0 split into boundary and bulk parts."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    v: np.ndarray
    v_boundary: np.ndarray
    v_bulk: np.ndarray
    cutoff: int
    gamma_p: float
    gamma_p_nonhermitian: float = 0.0  # same average over the non-Hermitian part of V
    band_dim: int = 1

    @property
    def sites(self) -> int:
        return self.v.shape[0] // self.band_dim


class SpectrumRecord(BaseModel):
    """Per-parameter spectral summary used by sweeps and figures."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    parameter: float
    quasienergies: np.ndarray
    floquet_eigs: np.ndarray
    p_com: float
    n_com: int
    max_abs_im: float
    dim: int
    eps_im: float
    pbc_bandwidths: List[float] = []
    pbc_total_bandwidth: Optional[float] = None
    eigvecs: Optional[np.ndarray] = None

    def spectrum_rows(self) -> List[dict]:
        return [
            {"param": self.parameter, "index": i, "re_E": float(e.real), "im_E": float(e.imag)}
            for i, e in enumerate(self.quasienergies)
        ]

    def summary_row(self) -> dict:
        return {
            "param": self.parameter,
            "p_com": self.p_com,
            "n_com": self.n_com,
            "max_abs_im": self.max_abs_im,
        }


class EPRecord(BaseModel):
    """An exceptional point found along a sweep, with its branching fit."""

    lambda_ep: float
    pair: Tuple[int, int]
    fit_exponent: float
    fit_prefactor: float
    fit_residual: float
    window: Tuple[float, float]
    fit_ok: bool = True
    note: Optional[str] = None  # why the branch was lost or could not be fitted

    def to_dict(self) -> dict:
        return self.model_dump()


class TrajectoryPoint(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    parameter: float
    xi1: complex
    xi2: complex
    ambiguous: bool = False

    @property
    def product_modulus(self) -> float:
        return float(abs(self.xi1 * self.xi2))

    def to_row(self) -> dict:
        return {
            "param": self.parameter,
            "re_xi1": self.xi1.real,
            "im_xi1": self.xi1.imag,
            "re_xi2": self.xi2.real,
            "im_xi2": self.xi2.imag,
            "abs_xi1": abs(self.xi1),
            "abs_xi2": abs(self.xi2),
            "abs_xi1_xi2": self.product_modulus,
        }


class BandwidthReport(BaseModel):
    """Widths of the unfolded PBC bands and the breaking prediction."""

    parameter: float
    bandwidths: List[float]
    total_bandwidth: float
    relevant_width: float
    criterion: str  # "band" or "total"
    zone_width: float
    predicted_critical: bool


class LocalizationRecord(BaseModel):
    """Mean positions (and envelope exponents) of eigenstates sorted by Im E."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sites: int
    band_dim: int
    quasienergies: np.ndarray  # ascending Im E
    mean_positions: np.ndarray
    alphas: Optional[np.ndarray] = None

    @property
    def mean_position_ratio(self) -> np.ndarray:
        return self.mean_positions / self.sites

    def off_centre_fraction(self, threshold: float = 0.05) -> float:
        """Fraction of states with |<x>/N - 0.5| > threshold."""
        return float(np.mean(np.abs(self.mean_position_ratio - 0.5) > threshold))


class ScaleFreeFit(BaseModel):
    """Finite-size scaling of mean |Im E| and per-state envelope exponents."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    lam: float
    sizes: List[int]
    mean_abs_im: List[float]
    slope: float
    intercept: float
    localization: Dict[int, LocalizationRecord] = {}
    envelopes: Dict[int, np.ndarray] = {}       # rows: selected states, columns: cells
    envelope_ranks: Dict[int, List[int]] = {}   # ranks of those states in ascending Im E
