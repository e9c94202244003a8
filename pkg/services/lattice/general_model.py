"""
User-defined model from a declarative ansatz in the experiment config.
"""

from typing import Dict

from models.experiment import ModelParameters
from models.lattice import MultiBandSpec
from services.lattice.base_model import LatticeModel


class GeneralModel(LatticeModel):
    """Arbitrary ansatz, swept through an overall ``scale`` factor."""

    def __init__(self, config: Dict, ansatz: MultiBandSpec):
        """
        Args:
            config: Preset dictionary (name, parity, criterion, ...)
            ansatz: Blocks at scale 1
        """
        config = {**config, 'band_dim': ansatz.band_dim}
        super().__init__(config)
        self.base_ansatz = ansatz

    def ansatz(self, params: ModelParameters) -> MultiBandSpec:
        if params.scale == 1.0:
            return self.base_ansatz
        return self.base_ansatz.scaled(params.scale)
