"""
Shared fixtures: small lattices, shipped models and a seeded random ansatz generator.
"""

import json

import numpy as np
import pytest

from config.settings import TOLERANCES
from models.experiment import ModelParameters
from models.lattice import LatticeSpec, MultiBandSpec
from services.lattice.model_factory import ModelFactory


def random_ansatz(rng: np.random.Generator, band_dim: int, w: int, scale: float = 1.0) -> MultiBandSpec:
    """Arbitrary complex blocks (no symmetry conditions imposed)."""

    def block():
        return scale * (rng.standard_normal((band_dim, band_dim)) + 1j * rng.standard_normal((band_dim, band_dim)))

    return MultiBandSpec(
        w=w,
        band_dim=band_dim,
        a1=block(),
        a2=block(),
        x1=[block() for _ in range(w)],
        x2=[block() for _ in range(w)],
        y1=[block() for _ in range(w)],
        y2=[block() for _ in range(w)],
    )


def pt_symmetric_ansatz(rng: np.random.Generator, band_dim: int, w: int, scale: float = 1.0) -> MultiBandSpec:
    """
    Random ansatz that is PT-symmetric under reflection: H_2 = P conj(H_1) P,
    i.e. A_2 = conj(A_1), X_2 = conj(Y_1), Y_2 = conj(X_1).
    """
    base = random_ansatz(rng, band_dim, w, scale)
    return MultiBandSpec(
        w=w,
        band_dim=band_dim,
        a1=base.a1,
        a2=base.a1.conj(),
        x1=base.x1,
        x2=[b.conj() for b in base.y1],
        y1=base.y1,
        y2=[b.conj() for b in base.x1],
    )


@pytest.fixture
def tolerances():
    return TOLERANCES


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_obc():
    return LatticeSpec(sites=6, eta=0.0)


@pytest.fixture
def small_pbc():
    return LatticeSpec(sites=8, eta=1.0)


@pytest.fixture(scope="session")
def factory():
    return ModelFactory()


@pytest.fixture
def minimal(factory):
    return factory.get_model("minimal")


@pytest.fixture
def type1(factory):
    return factory.get_model("type1")


@pytest.fixture
def type2(factory):
    return factory.get_model("type2")


@pytest.fixture
def minimal_params(minimal):
    def make(lam: float, N: int, eta: float = 0.0) -> ModelParameters:
        return minimal.resolve(ModelParameters(lam=lam, N=N, eta=eta))

    return make


@pytest.fixture
def write_config(tmp_path):
    """Write an experiment config document and return its path."""

    def write(document: dict, name: str = "config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return str(path)

    return write
