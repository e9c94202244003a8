"""
Configuration settings for the floquet-pt toolkit.
Handles environment variables, numerical tolerances and application constants.
"""

import os
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict

# Load environment variables
load_dotenv()


class Tolerances(BaseModel):
    """Every numerical threshold used by the library, in one place."""

    model_config = ConfigDict(frozen=True)

    residual: float = 1e-10            # eigenpair residual, relative to ||M||_F
    unitarity: float = 1e-10           # ||U^dagger U - I||_F; a unitary U gets a Hermitian H_F
    branch_cut_guard: float = 1e-12    # Re E this close to +pi/T goes to -pi/T
    defective_cut_guard: float = 1e-6  # same, once the eigenbasis is near-defective
    branch_flag: float = 1e-10         # eigenvalues reported as sitting on the cut
    log_condition_limit: float = 1e8   # above this, log goes through the Schur form
    well_conditioned: float = 1e6
    pt_protocol: float = 1e-12
    pt_floquet: float = 1e-9
    bloch: float = 1e-12
    eq13: float = 1e-12
    im_relative: float = 1e-8          # |Im E| threshold, times max(1, spectral radius)
    threshold_width: float = 1e-4
    period_sum: float = 1e-12


TOLERANCES = Tolerances()

# Application Settings
APP_NAME = os.getenv("APP_NAME", "floquet-pt")
LOG_LEVEL = os.getenv("FLOQUET_LOG_LEVEL", "INFO")
DEFAULT_WORKERS = int(os.getenv("FLOQUET_WORKERS", "1"))
DEFAULT_OUTPUT_DIR = os.getenv("FLOQUET_OUTPUT_DIR", "results")

# Physics defaults
DEFAULT_PERIOD = float(os.getenv("FLOQUET_PERIOD", "1.0"))
DEFAULT_TYPE2_T2 = float(os.getenv("FLOQUET_TYPE2_T2", "0.5"))

# Bloch k-grid used by the bandwidth criterion
BLOCH_K_POINTS = 512

# Coarse grid scanned for the first PT-breaking onset before bisection
THRESHOLD_SCAN_POINTS = int(os.getenv("FLOQUET_THRESHOLD_SCAN_POINTS", "201"))

# Sizes kept at desk scale (dense solves are O(N^3))
MAX_SWEEP_SIZE = 200
MAX_PROFILE_SIZE = 2000

# CSV float format
FLOAT_FORMAT = "%.12e"

# Chart Colors
THEME_COLORS = {
    "primary": "#1e40af",
    "secondary": "#64748b",
    "real": "#3b82f6",
    "real_alt": "#111827",
    "imag": "#ef4444",
    "p_com": "#10b981",
    "pbc": "#f59e0b",
    "threshold": "#000000",
}

# Chart Configuration
CHART_CONFIG = {
    "height": 500,
    "margin": {"l": 60, "r": 60, "t": 60, "b": 50},
    "font_family": "Manrope, sans-serif",
    "marker_size": 3,
}
