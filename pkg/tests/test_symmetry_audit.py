"""
Symmetry audit: PT checks, Bloch conditions, hopping inequalities and the
bulk/boundary commutator split.
"""

import numpy as np
import pytest

from models.experiment import ModelParameters
from models.lattice import LatticeSpec
from models.protocol import DrivingProtocol, ProtocolStep
from models.results import PTOperators
from services.floquet_engine import evolve_protocol
from services.lattice.builders import build_general
from services.lattice.minimal_model import build_minimal, minimal_ansatz
from services.lattice.operators import assemble, parity_operator
from services.lattice.two_band_models import type1_ansatz, type2_ansatz
from services.symmetry_audit import (
    audit_model,
    bloch_grid_size,
    check_bloch_conditions,
    check_eq13,
    check_pt_of_floquet,
    check_pt_protocol,
    commutator_decompose,
)
from tests.conftest import pt_symmetric_ansatz, random_ansatz
from utils.errors import NumericalError
from utils.linalg import commutator


class TestPTChecks:

    def test_minimal_protocol_is_pt_symmetric(self, small_obc):
        protocol = build_minimal(small_obc, t=1.3, T=1.0)
        check = check_pt_protocol(protocol, parity_operator(small_obc))
        assert check.passed and check.defect == 0.0

    def test_identity_parity_fails_for_minimal(self, small_obc):
        protocol = build_minimal(small_obc, t=1.0, T=1.0)
        check = check_pt_protocol(protocol, parity_operator(small_obc, "identity"))
        assert not check.passed
        assert check.defect == pytest.approx(np.sqrt(2 * 5))

    def test_unequal_durations_fail(self, small_obc):
        protocol = build_minimal(small_obc, t=1.0, T=1.0)
        skewed = DrivingProtocol(
            steps=[
                ProtocolStep(hamiltonian=protocol.hamiltonians[0], duration=0.3),
                ProtocolStep(hamiltonian=protocol.hamiltonians[1], duration=0.7),
            ],
            period=1.0,
        )
        check = check_pt_protocol(skewed, parity_operator(small_obc))
        assert not check.passed and check.defect == float("inf")

    def test_dimension_mismatch(self, small_obc):
        protocol = build_minimal(small_obc, t=1.0, T=1.0)
        with pytest.raises(ValueError):
            check_pt_protocol(protocol, parity_operator(LatticeSpec(sites=4)))

    @pytest.mark.parametrize("lam", [0.5, 1.8, 3.0])
    def test_floquet_operator_is_pt_symmetric(self, small_obc, lam):
        u_f = evolve_protocol(build_minimal(small_obc, t=2.0 * lam, T=1.0))
        assert check_pt_of_floquet(u_f, parity_operator(small_obc)).passed

    def test_floquet_check_with_identity_parity_is_transpose_test(self, rng):
        a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        symmetric = np.linalg.qr(a)[0]
        symmetric = symmetric @ symmetric.T
        unitary = np.linalg.qr(a)[0]
        pt = PTOperators(parity=np.eye(5), kind="identity")
        assert check_pt_of_floquet(symmetric, pt).passed
        assert not check_pt_of_floquet(unitary, pt).passed

    def test_singular_floquet_operator(self):
        with pytest.raises(NumericalError):
            check_pt_of_floquet(np.zeros((2, 2)), PTOperators(parity=np.eye(2)))


class TestBlochConditions:

    @pytest.mark.parametrize("ansatz", [minimal_ansatz(1.2), type1_ansatz(2.0), type2_ansatz(1.0, 0.5)])
    def test_shipped_models_pass(self, ansatz):
        hermitian, commute = check_bloch_conditions(ansatz)
        assert hermitian.passed and commute.passed

    def test_random_ansatz_fails(self, rng):
        hermitian, commute = check_bloch_conditions(random_ansatz(rng, 2, 1))
        assert not hermitian.passed and not commute.passed

    def test_grid_must_resolve_hopping_range(self):
        with pytest.raises(ValueError):
            check_bloch_conditions(type2_ansatz(1.0, 0.5), k_samples=4)

    def test_grid_size_covers_commutator_harmonics(self):
        assert bloch_grid_size(type2_ansatz(1.0, 0.5), 5) == 9
        assert bloch_grid_size(type2_ansatz(1.0, 0.5), 20) == 20


class TestEq13:

    def test_minimal(self):
        flags = check_eq13(minimal_ansatz(1.0))
        assert flags.passed
        assert flags.families_holding() == ["y2x1_minus_x2y1"]

    def test_type2_non_commuting_hoppings(self):
        flags = check_eq13(type2_ansatz(1.0, 0.5))
        assert flags.passed
        assert "x1_y2" in flags.families_holding()
        assert len(flags.flags) == 3 * 2 * 2

    def test_zero_hoppings_fail(self):
        assert not check_eq13(minimal_ansatz(0.0)).passed


class TestCommutatorDecomposition:

    def test_minimal_boundary_term(self, small_obc):
        t = 1.5
        g1, g2 = commutator_decompose(minimal_ansatz(t), small_obc)
        assert not g1.any()
        np.testing.assert_allclose(g2, t ** 2 * np.diag([1.0, 0, 0, 0, 0, -1.0]))

    def test_exact_for_random_ansatz(self, rng):
        for band_dim, w in [(1, 1), (2, 1), (2, 2), (3, 2)]:
            ansatz = random_ansatz(rng, band_dim, w)
            spec = LatticeSpec(sites=12, band_dim=band_dim)
            g1, g2 = commutator_decompose(ansatz, spec)
            full = commutator(assemble(spec, ansatz, 1), assemble(spec, ansatz, 2))
            assert np.linalg.norm(g1 + g2 - full) <= 1e-11 * max(1.0, np.linalg.norm(full))

    def test_boundary_term_is_localized(self, rng):
        ansatz = random_ansatz(rng, 2, 2)
        spec = LatticeSpec(sites=12, band_dim=2)
        _, g2 = commutator_decompose(ansatz, spec)
        cells = np.arange(spec.dim) // spec.band_dim
        near_edge = (cells < 2 * ansatz.w) | (cells >= spec.sites - 2 * ansatz.w)
        assert not g2[np.ix_(~near_edge, ~near_edge)].any()

    def test_bulk_term_vanishes_with_commuting_blocks(self):
        spec = LatticeSpec(sites=10, band_dim=2)
        ansatz = type2_ansatz(1.0, 0.5)
        g1, g2 = commutator_decompose(ansatz, spec)
        assert np.linalg.norm(g1) <= 1e-12
        assert np.linalg.norm(g2) > 1e-3

    def test_requires_open_boundaries(self):
        with pytest.raises(ValueError):
            commutator_decompose(minimal_ansatz(1.0), LatticeSpec(sites=6, eta=1.0))

    def test_requires_separated_boundaries(self):
        with pytest.raises(ValueError):
            commutator_decompose(type2_ansatz(1.0, 0.5), LatticeSpec(sites=4, band_dim=2))


class TestAuditModel:

    def test_minimal(self, minimal, minimal_params):
        report = audit_model(minimal, minimal_params(1.0, 10))
        assert report.all_passed
        assert report.g1_norm == 0.0
        assert report.g2_norm == pytest.approx(4.0 * np.sqrt(2.0))

    def test_type1(self, type1):
        assert audit_model(type1, type1.resolve(ModelParameters(t=2.0, N=8))).all_passed

    def test_type2(self, type2):
        report = audit_model(type2, type2.resolve(ModelParameters(t1=1.0, N=12)), k_samples=9)
        assert report.all_passed
        assert report.k_samples == 9
        assert "Type-II" in report.summary()

    def test_minimal_fails_with_identity_parity(self, factory):
        model = factory.get_model("minimal", parity="identity")
        report = audit_model(model, model.resolve(ModelParameters(lam=1.0, N=10)))
        assert not report.cond_pt.passed
        assert not report.all_passed
        assert report.cond_pbc_commute.passed

    def test_obc_check_ignores_boundary_knob(self, minimal, minimal_params):
        report = audit_model(minimal, minimal_params(1.0, 10, eta=1.0))
        assert report.cond_obc_noncommute.passed
        assert report.cond_pt.passed

    def test_general_pt_symmetric_ansatz(self, factory, rng):
        ansatz = pt_symmetric_ansatz(rng, 2, 1, scale=0.3)
        model = factory.get_model("general", ansatz=ansatz)
        report = audit_model(model, model.resolve(ModelParameters(N=8)))
        assert report.cond_pt.passed and report.cond_pt_floquet.passed
        protocol = build_general(LatticeSpec(sites=8, band_dim=2), ansatz, 1.0)
        assert check_pt_protocol(protocol, parity_operator(LatticeSpec(sites=8, band_dim=2))).passed
