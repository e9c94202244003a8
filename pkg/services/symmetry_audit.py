"""
Symmetry audit: checks a candidate protocol against the three construction
conditions (PT symmetry of the steps, commuting Hermitian Bloch sum, and
non-commuting open-boundary steps) and splits [H1, H2]_OBC into its bulk and
boundary parts.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from config.settings import TOLERANCES, Tolerances
from models.experiment import ModelParameters
from models.lattice import LatticeSpec, MultiBandSpec
from models.protocol import DrivingProtocol
from models.results import AuditReport, ConditionCheck, Eq13Flag, Eq13Flags, PTOperators
from services.floquet_engine import evolve_protocol
from services.lattice.base_model import LatticeModel
from services.lattice.operators import ansatz_terms, bloch_hamiltonian, displacement_operator, k_grid
from utils.errors import NumericalError
from utils.linalg import as_square_matrix, commutator

logger = logging.getLogger(__name__)


def _check_dims(dim: int, pt: PTOperators) -> None:
    if pt.dim != dim:
        raise ValueError(f"parity operator has dimension {pt.dim}, operators have {dim}")


def check_pt_protocol(
    protocol: DrivingProtocol, pt: PTOperators, tolerances: Tolerances = TOLERANCES
) -> ConditionCheck:
    """
    PK H_s K^-1 P^-1 = H_{n+1-s} for the mirrored steps (H_1 <-> H_2 for two steps).

    Args:
        protocol: Protocol to audit
        pt: Parity operator (K is complex conjugation)

    Returns:
        ConditionCheck with defect = ||P conj(H_1) P - H_2||_F (summed in quadrature
        over mirrored pairs)
    """
    _check_dims(protocol.dim, pt)
    p = pt.parity
    steps = protocol.steps
    durations = np.array(protocol.durations)
    if not np.allclose(durations, durations[::-1], rtol=0.0, atol=tolerances.period_sum * protocol.period):
        logger.info("Step durations are not mirror-symmetric; PT of the protocol fails")
        return ConditionCheck(passed=False, defect=float('inf'))

    squared = 0.0
    for s in range(len(steps) // 2 + len(steps) % 2):
        mirrored = steps[len(steps) - 1 - s].hamiltonian
        squared += float(np.linalg.norm(p @ steps[s].hamiltonian.conj() @ p - mirrored)) ** 2
    defect = float(np.sqrt(squared))
    return ConditionCheck(passed=defect <= tolerances.pt_protocol, defect=defect)


def check_pt_of_floquet(u_f: np.ndarray, pt: PTOperators, tolerances: Tolerances = TOLERANCES) -> ConditionCheck:
    """
    PK U_F K^-1 P^-1 = U_F^-1, tested as ||P conj(U_F) P U_F - I||_F.

    Raises:
        NumericalError: if U_F is singular
    """
    u_f = as_square_matrix(u_f)
    _check_dims(u_f.shape[0], pt)
    sign, _ = np.linalg.slogdet(u_f)
    if sign == 0:
        raise NumericalError("Floquet operator is singular")
    p = pt.parity
    defect = float(np.linalg.norm(p @ u_f.conj() @ p @ u_f - np.eye(u_f.shape[0])))
    return ConditionCheck(passed=defect <= tolerances.pt_floquet, defect=defect)


def bloch_grid_size(ansatz: MultiBandSpec, k_samples: int) -> int:
    """
    Grid actually evaluated for the commutator check.

    [h_1(k), h_2(k)] has Fourier components e^{ikd} with |d| <= 2w, so
    4w + 1 uniform points determine it.
    """
    return max(k_samples, 4 * ansatz.w + 1)


def check_bloch_conditions(
    ansatz: MultiBandSpec, k_samples: Optional[int] = None, tolerances: Tolerances = TOLERANCES
) -> Tuple[ConditionCheck, ConditionCheck]:
    """
    Hermiticity of h_1(k) + h_2(k) and [h_1(k), h_2(k)] = 0 on a uniform k-grid.

    Args:
        ansatz: Multi-band ansatz
        k_samples: Requested grid size, at least 2w + 1 (defaults to 2w + 1)

    Returns:
        (hermitian check, commutator check), each with the max norm over the grid
    """
    if k_samples is None:
        k_samples = 2 * ansatz.w + 1
    if k_samples < 2 * ansatz.w + 1:
        raise ValueError(f"k_samples must be >= 2w+1 = {2 * ansatz.w + 1}, got {k_samples}")

    scale = max(1.0, ansatz.hopping_scale())
    worst_hermitian = 0.0
    worst_commutator = 0.0
    for k in k_grid(bloch_grid_size(ansatz, k_samples)):
        h1 = bloch_hamiltonian(ansatz, 1, k)
        h2 = bloch_hamiltonian(ansatz, 2, k)
        total = h1 + h2
        worst_hermitian = max(worst_hermitian, float(np.linalg.norm(total - total.conj().T)))
        worst_commutator = max(worst_commutator, float(np.linalg.norm(commutator(h1, h2))))

    hermitian = ConditionCheck(passed=worst_hermitian <= tolerances.bloch * scale, defect=worst_hermitian)
    commute = ConditionCheck(passed=worst_commutator <= tolerances.bloch * scale ** 2, defect=worst_commutator)
    return hermitian, commute


def check_eq13(ansatz: MultiBandSpec, tolerances: Tolerances = TOLERANCES) -> Eq13Flags:
    """
    Hopping inequalities that make the open-boundary steps non-commuting:
    [X_1^(r), Y_2^(r')] != 0, [Y_1^(r), X_2^(r')] != 0 or Y_2^(r') X_1^(r) - X_2^(r') Y_1^(r) != 0.

    "Non-zero" means above ``eq13`` times the squared largest block norm.
    """
    threshold = tolerances.eq13 * ansatz.hopping_scale() ** 2
    flags: List[Eq13Flag] = []
    for r in range(1, ansatz.w + 1):
        x1, y1 = ansatz.x1[r - 1], ansatz.y1[r - 1]
        for r_prime in range(1, ansatz.w + 1):
            x2, y2 = ansatz.x2[r_prime - 1], ansatz.y2[r_prime - 1]
            norms = {
                'x1_y2': np.linalg.norm(commutator(x1, y2)),
                'y1_x2': np.linalg.norm(commutator(y1, x2)),
                'y2x1_minus_x2y1': np.linalg.norm(y2 @ x1 - x2 @ y1),
            }
            for family, norm in norms.items():
                flags.append(Eq13Flag(r=r, r_prime=r_prime, family=family, norm=float(norm), holds=bool(norm > threshold)))
    return Eq13Flags(flags=flags, passed=any(flag.holds for flag in flags))


def commutator_decompose(ansatz: MultiBandSpec, spec: LatticeSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    [H_1, H_2]_OBC = G_1 + G_2.

    For each pair of terms P (x) a from H_1 and Q (x) b from H_2 with net
    displacement d, S_d is the translation-covariant operator (L^d, R^|d| or 1):

        G_1 += S_d (x) [a, b]
        G_2 += (PQ - S_d) (x) ab - (QP - S_d) (x) ba

    G_1 vanishes iff the Bloch commutator does; G_2 lives within 2w cells of an edge.

    Raises:
        ValueError: if the lattice is not open or N <= 2w
    """
    if not spec.is_open:
        raise ValueError(f"decomposition needs open boundaries (eta=0), got eta={spec.eta}")
    if spec.sites <= 2 * ansatz.w:
        raise ValueError(f"boundary corrections overlap: need N > 2w (N={spec.sites}, w={ansatz.w})")
    if spec.band_dim != ansatz.band_dim:
        raise ValueError(f"lattice band_dim {spec.band_dim} does not match ansatz band_dim {ansatz.band_dim}")

    g1 = np.zeros((spec.dim, spec.dim), dtype=complex)
    g2 = np.zeros((spec.dim, spec.dim), dtype=complex)
    terms_2 = ansatz_terms(spec, ansatz, 2)
    for d1, p_op, a in ansatz_terms(spec, ansatz, 1):
        if not a.any():
            continue
        for d2, q_op, b in terms_2:
            if not b.any():
                continue
            shift = displacement_operator(spec, d1 + d2)
            ab = a @ b
            ba = b @ a
            g1 += np.kron(shift, ab - ba)
            g2 += np.kron(p_op @ q_op - shift, ab) - np.kron(q_op @ p_op - shift, ba)
    return g1, g2


def audit_model(
    model: LatticeModel,
    params: ModelParameters,
    k_samples: Optional[int] = None,
    tolerances: Tolerances = TOLERANCES,
) -> AuditReport:
    """
    Run every check for one model at one parameter point.

    PT checks use the lattice described by ``params``; the open-boundary
    checks and the decomposition always use eta = 0.
    """
    ansatz = model.ansatz(params)
    lattice = model.lattice(params)
    pt = model.parity(lattice)

    protocol = model.protocol(params)
    cond_pt = check_pt_protocol(protocol, pt, tolerances)
    cond_pt_floquet = check_pt_of_floquet(evolve_protocol(protocol), pt, tolerances)

    hermitian, commute = check_bloch_conditions(ansatz, k_samples, tolerances)

    obc = lattice.with_eta(0.0)
    obc_protocol = model.protocol(params.updated(eta=0.0))
    h1, h2 = obc_protocol.hamiltonians[0], obc_protocol.hamiltonians[1]
    obc_norm = float(np.linalg.norm(commutator(h1, h2)))
    threshold = tolerances.eq13 * max(1.0, ansatz.hopping_scale()) ** 2
    cond_obc = ConditionCheck(passed=obc_norm > threshold, defect=obc_norm)

    g1, g2 = commutator_decompose(ansatz, obc)
    report = AuditReport(
        model_name=model.name,
        cond_pt=cond_pt,
        cond_pt_floquet=cond_pt_floquet,
        cond_pbc_hermitian=hermitian,
        cond_pbc_commute=commute,
        cond_obc_noncommute=cond_obc,
        eq13=check_eq13(ansatz, tolerances),
        g1_norm=float(np.linalg.norm(g1)),
        g2_norm=float(np.linalg.norm(g2)),
        k_samples=bloch_grid_size(ansatz, k_samples if k_samples is not None else 2 * ansatz.w + 1),
    )
    logger.info(f"Audit of {model.name}: {'all conditions pass' if report.all_passed else 'some conditions fail'}")
    return report
