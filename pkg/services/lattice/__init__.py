"""
Driven lattice models and their operators.
"""

from services.lattice.base_model import LatticeModel
from services.lattice.builders import build_general
from services.lattice.general_model import GeneralModel
from services.lattice.minimal_model import MinimalModel, build_minimal
from services.lattice.model_factory import ModelFactory, get_model_factory
from services.lattice.operators import bloch_hamiltonian, build_shift, parity_operator
from services.lattice.two_band_models import TypeIIModel, TypeIModel, build_type1, build_type2

__all__ = [
    'LatticeModel',
    'ModelFactory',
    'get_model_factory',
    'MinimalModel',
    'TypeIModel',
    'TypeIIModel',
    'GeneralModel',
    'build_shift',
    'build_minimal',
    'build_general',
    'build_type1',
    'build_type2',
    'bloch_hamiltonian',
    'parity_operator',
]
