"""
Model factory and registry for the shipped lattice presets.
Presets are declared in config/model_presets.json.
"""

import json
import logging
import os
from typing import Dict, List, Optional

from models.lattice import MultiBandSpec
from services.lattice.base_model import LatticeModel
from services.lattice.general_model import GeneralModel
from services.lattice.minimal_model import MinimalModel
from services.lattice.two_band_models import TypeIIModel, TypeIModel
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

MODEL_CLASSES = {
    'minimal': MinimalModel,
    'type1': TypeIModel,
    'type2': TypeIIModel,
}


class ModelFactory:
    """Factory for creating and looking up driven lattice models."""

    def __init__(self, config_path: str = None):
        """
        Initialize model factory with preset configurations.

        Args:
            config_path: Path to model_presets.json configuration file
        """
        if config_path is None:
            base_dir = os.path.dirname(os.path.dirname(os.path.dirname(__file__)))
            config_path = os.path.join(base_dir, 'config', 'model_presets.json')

        self.config_path = config_path
        self.presets: Dict[str, Dict] = {}
        self.models: Dict[str, LatticeModel] = {}
        self.load_configurations()

    def load_configurations(self):
        """Load model presets from JSON file."""
        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                configs = json.load(f)

            for model_id, config in configs.items():
                if not config.get('enabled', True):
                    continue
                config = {**config, 'id': model_id}
                self.presets[model_id] = config
                model_class = MODEL_CLASSES.get(model_id)
                if model_class is not None:
                    self.models[model_id] = model_class(config)

            logger.info(f"Loaded {len(self.models)} lattice models")

        except FileNotFoundError:
            logger.warning(f"Preset file not found: {self.config_path}")
            self._create_default_minimal_model()
        except (json.JSONDecodeError, ValueError) as e:
            logger.error(f"Error loading model presets: {str(e)}")
            self._create_default_minimal_model()

    def _create_default_minimal_model(self):
        """Minimal model alone, so the toolkit still runs without presets."""
        default_config = {
            "id": "minimal",
            "name": "Minimal model (default)",
            "description": "H1 = tL, H2 = tR, each for T/2",
            "scan_parameter": "lam",
            "parity": "reflection",
            "criterion": "band",
            "band_dim": 1,
        }
        self.presets['minimal'] = default_config
        self.models['minimal'] = MinimalModel(default_config)

    def get_model(self, model_id: str, ansatz: Optional[MultiBandSpec] = None,
                  parity: Optional[str] = None) -> LatticeModel:
        """
        Look up a preset, or build a general model from a declarative ansatz.

        Args:
            model_id: Preset id ("minimal", "type1", "type2", "general")
            ansatz: Required for "general"
            parity: Optional parity preset overriding the model's own

        Raises:
            ConfigError: unknown model id or missing ansatz
        """
        if model_id == 'general':
            if ansatz is None:
                raise ConfigError("model 'general' needs an 'ansatz' section")
            config = dict(self.presets.get('general', {'id': 'general', 'name': 'General ansatz'}))
            if parity is not None:
                config['parity'] = parity
            return GeneralModel(config, ansatz)

        if model_id not in self.models:
            available = ', '.join(sorted(self.models)) or 'none'
            raise ConfigError(f"unknown model {model_id!r} (available: {available}, general)")

        model = self.models[model_id]
        if parity is not None and parity != model.parity_kind:
            model = type(model)({**model.config, 'parity': parity})
        return model

    def get_available_models(self) -> List[Dict[str, str]]:
        """
        Get list of available presets.

        Returns:
            List of dicts with model info
        """
        available = [model.info() for model in self.models.values()]
        if 'general' in self.presets:
            preset = self.presets['general']
            available.append({
                'id': 'general',
                'name': preset.get('name', 'General ansatz'),
                'description': preset.get('description', ''),
                'scan_parameter': preset.get('scan_parameter', 'scale'),
            })
        return available


# Global factory instance
_factory_instance = None


def get_model_factory() -> ModelFactory:
    """Get singleton model factory instance."""
    global _factory_instance
    if _factory_instance is None:
        _factory_instance = ModelFactory()
    return _factory_instance
