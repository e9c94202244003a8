"""
Randomized property checks over seeded parameter grids.
"""

import numpy as np
import pytest

from models.lattice import LatticeSpec
from services.floquet_engine import averaged_hamiltonian, evolve_protocol, floquet_spectrum
from services.lattice.builders import build_general
from services.lattice.minimal_model import build_minimal
from services.lattice.operators import assemble
from services.lattice.two_band_models import build_type1, build_type2
from services.perturbation import bch_truncated
from services.symmetry_audit import commutator_decompose
from tests.conftest import random_ansatz
from utils.linalg import commutator, mat_exp, mat_log_unitary

SEEDS = range(25)


def trace_prediction(protocol) -> float:
    """|det U_F| from the step traces."""
    exponent = sum(step.duration * np.trace(step.hamiltonian).imag for step in protocol.steps)
    return float(np.exp(exponent))


class TestSpectralProperties:

    @pytest.mark.parametrize("seed", SEEDS)
    def test_obc_quasienergies_come_in_conjugate_pairs(self, seed):
        rng = np.random.default_rng(seed)
        lam, sites = rng.uniform(0.2, 3.0), int(rng.integers(3, 9))
        energies = floquet_spectrum(build_minimal(LatticeSpec(sites=sites), t=2.0 * lam, T=1.0)).quasienergies
        for energy in energies:
            assert np.abs(energies - energy.conjugate()).min() < 1e-5

    @pytest.mark.parametrize("seed", SEEDS)
    def test_real_part_in_principal_zone(self, seed):
        rng = np.random.default_rng(seed)
        period = float(rng.choice([0.5, 1.0, 2.0]))
        lam, sites = rng.uniform(0.1, 4.0), int(rng.integers(2, 12))
        energies = floquet_spectrum(build_minimal(LatticeSpec(sites=sites), t=2.0 * lam / period, T=period)).quasienergies
        assert (energies.real >= -np.pi / period - 1e-12).all()
        assert (energies.real < np.pi / period).all()

    @pytest.mark.parametrize("seed", SEEDS)
    def test_periodic_floquet_hamiltonian_is_hermitian(self, seed):
        rng = np.random.default_rng(seed)
        lam, sites = rng.uniform(0.1, 3.0), int(rng.integers(4, 12))
        h_f = floquet_spectrum(build_minimal(LatticeSpec(sites=sites, eta=1.0), t=2.0 * lam, T=1.0)).h_f
        assert np.abs(h_f - h_f.conj().T).max() < 1e-8

    @pytest.mark.parametrize("seed", SEEDS)
    def test_spectrum_is_deterministic(self, seed):
        rng = np.random.default_rng(seed)
        protocol = build_minimal(LatticeSpec(sites=10), t=rng.uniform(0.5, 6.0), T=1.0)
        first, second = floquet_spectrum(protocol), floquet_spectrum(protocol)
        np.testing.assert_array_equal(first.quasienergies, second.quasienergies)
        np.testing.assert_array_equal(first.h_f, second.h_f)


class TestDeterminantProperties:

    @pytest.mark.parametrize("seed", SEEDS)
    def test_shipped_models_preserve_volume(self, seed):
        rng = np.random.default_rng(seed)
        spec = LatticeSpec(sites=6, band_dim=2)
        for protocol in (build_type1(spec, t=rng.uniform(0.2, 3.0), T=1.0),
                         build_type2(spec, t1=rng.uniform(0.2, 2.0), t2=rng.uniform(0.1, 1.0), T=1.0)):
            assert abs(np.linalg.det(evolve_protocol(protocol))) == pytest.approx(trace_prediction(protocol), rel=1e-9)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_random_ansatz_determinant_follows_trace(self, seed):
        rng = np.random.default_rng(seed)
        ansatz = random_ansatz(rng, 2, 1, scale=0.3)
        protocol = build_general(LatticeSpec(sites=6, band_dim=2), ansatz, T=1.0)
        expected = np.exp(0.5 * np.trace(protocol.hamiltonians[0] + protocol.hamiltonians[1]).imag)
        assert abs(np.linalg.det(evolve_protocol(protocol))) == pytest.approx(expected, rel=1e-9)


class TestLogarithmProperties:

    @pytest.mark.parametrize("seed", SEEDS)
    def test_unitary_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 17))
        u, _ = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
        h = mat_log_unitary(u, period=1.0)
        np.testing.assert_allclose(mat_exp(-1j * h), u, atol=1e-10)
        assert np.abs(h - h.conj().T).max() < 1e-9

    @pytest.mark.parametrize("seed", SEEDS)
    def test_non_unitary_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        generator = 0.3 * (rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
        u = mat_exp(generator)
        np.testing.assert_allclose(mat_exp(-2.0j * mat_log_unitary(u, period=2.0)), u, atol=1e-10)


class TestExpansionProperties:

    @pytest.mark.parametrize("seed", SEEDS)
    def test_first_order_is_step_average(self, seed):
        rng = np.random.default_rng(seed)
        protocol = build_general(LatticeSpec(sites=5, band_dim=2), random_ansatz(rng, 2, 1), T=float(rng.uniform(0.5, 2.0)))
        np.testing.assert_allclose(bch_truncated(protocol, 1), averaged_hamiltonian(protocol), atol=1e-13)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_commutator_split_is_exact(self, seed):
        rng = np.random.default_rng(seed)
        band_dim, w = int(rng.integers(1, 4)), int(rng.integers(1, 3))
        ansatz = random_ansatz(rng, band_dim, w)
        spec = LatticeSpec(sites=12, band_dim=band_dim)
        g1, g2 = commutator_decompose(ansatz, spec)
        full = commutator(assemble(spec, ansatz, 1), assemble(spec, ansatz, 2))
        assert np.linalg.norm(g1 + g2 - full) <= 1e-11 * max(1.0, np.linalg.norm(full))
