"""
Base interface for preset lattice models.
All shipped models implement this interface.
"""

from abc import ABC, abstractmethod
from typing import Dict

from models.experiment import ModelParameters
from models.lattice import LatticeSpec, MultiBandSpec
from models.protocol import DrivingProtocol
from models.results import PTOperators
from services.lattice.builders import build_general
from services.lattice.operators import parity_operator


class LatticeModel(ABC):
    """Abstract base class for driven lattice models."""

    def __init__(self, config: Dict):
        """
        Initialize model with its preset configuration.

        Args:
            config: Preset dictionary from model_presets.json
        """
        self.config = config
        self.model_id = config.get('id', 'custom')
        self.name = config.get('name', 'Unnamed model')
        self.description = config.get('description', '')
        self.scan_parameter = config.get('scan_parameter', 't')
        self.parity_kind = config.get('parity', 'reflection')
        self.criterion = config.get('criterion', 'band')
        self.band_dim = int(config.get('band_dim', 1))
        self.defaults = ModelParameters(**config.get('defaults', {}))

    @abstractmethod
    def ansatz(self, params: ModelParameters) -> MultiBandSpec:
        """
        Intracell and hopping blocks for the given parameters.

        Args:
            params: Model parameters

        Returns:
            MultiBandSpec with all amplitudes folded into the blocks
        """
        pass

    def resolve(self, params: ModelParameters) -> ModelParameters:
        """Preset defaults overridden by the fields explicitly set in ``params``."""
        explicit = {name: getattr(params, name) for name in params.model_fields_set}
        return ModelParameters.model_validate({**self.defaults.model_dump(), **explicit})

    def lattice(self, params: ModelParameters) -> LatticeSpec:
        return LatticeSpec(sites=params.N, eta=params.eta, band_dim=self.band_dim)

    def protocol(self, params: ModelParameters) -> DrivingProtocol:
        """Two-step protocol on the lattice described by ``params``."""
        return build_general(self.lattice(params), self.ansatz(params), params.T)

    def parity(self, lattice: LatticeSpec) -> PTOperators:
        return parity_operator(lattice, self.parity_kind)

    def scan_value(self, params: ModelParameters) -> float:
        """Current value of the scan parameter."""
        value = getattr(params, self.scan_parameter)
        return float(value) if value is not None else float('nan')

    def with_value(self, params: ModelParameters, value: float) -> ModelParameters:
        """Copy of ``params`` with the scan parameter set to ``value``."""
        return self.with_parameter(params, self.scan_parameter, value)

    @staticmethod
    def with_parameter(params: ModelParameters, name: str, value: float) -> ModelParameters:
        """Copy of ``params`` with any named parameter (t, lam, eta, N, ...) set."""
        if name not in ModelParameters.model_fields:
            raise ValueError(f"unknown parameter {name!r}")
        if name == 'N':
            value = int(round(value))
        return ModelParameters.model_validate({**params.model_dump(), name: value})

    def info(self) -> Dict[str, str]:
        return {
            'id': self.model_id,
            'name': self.name,
            'description': self.description,
            'scan_parameter': self.scan_parameter,
        }
