"""
Configuration file for the advection velocity estimation toolkit.

This file contains all tunable settings: solver stopping rules, acquisition
defaults, container formats, rendering and logging. Every value can be
overridden through an MRAI_* environment variable or a local .env file.
"""

import os
from dotenv import load_dotenv

# Load environment variables from .env file (if it exists)
load_dotenv()

# =============================================================================
# SOLVER CONFIGURATION
# =============================================================================
# Fixed number of CGNE iterations (10 gave the best images on measured data)
DEFAULT_ITMAX = int(os.getenv('MRAI_ITMAX', '10'))

# <q, q>_Y below this value means p lies in the null space of T
BREAKDOWN_THRESHOLD = float(os.getenv('MRAI_BREAKDOWN_THRESHOLD', '1e-300'))

# Optional halt when the residual grows between two iterations
EARLY_STOP_ON_GROWTH = os.getenv('MRAI_EARLY_STOP_ON_GROWTH', 'false').lower() == 'true'
RESIDUAL_GROWTH_FACTOR = float(os.getenv('MRAI_RESIDUAL_GROWTH_FACTOR', '10.0'))

# =============================================================================
# ACQUISITION DEFAULTS
# =============================================================================
DEFAULT_DELTA_MM = float(os.getenv('MRAI_DELTA_MM', '1.4'))      # voxel pitch
DEFAULT_CYCLE_SECONDS = float(os.getenv('MRAI_CYCLE_SECONDS', '2.0'))  # (K+1) * dt

# Minor recurrence values above this are treated as overflow
MINOR_OVERFLOW_LIMIT = float(os.getenv('MRAI_MINOR_OVERFLOW_LIMIT', '1e300'))

# =============================================================================
# FILE CONTAINERS
# =============================================================================
SERIES_FORMAT = 'mrai-series-v1'
VELOCITY_FORMAT = 'mrai-velocity-v1'
HEADER_SUFFIX = '.hdr'
PAYLOAD_SUFFIX = '.raw'
PAYLOAD_DTYPE = 'f64'
PAYLOAD_BYTE_ORDER = 'little'
SUPPORTED_SLICE_ORDERS = ('ascending',)

# Residual log
CSV_FLOAT_FORMAT = os.getenv('MRAI_CSV_FLOAT_FORMAT', '%.17g')

# =============================================================================
# RENDERING
# =============================================================================
MIP_MAXVAL = 255

# =============================================================================
# ADJOINT CHECK SUITE
# =============================================================================
ADJOINT_CHECK_TRIALS = int(os.getenv('MRAI_ADJOINT_CHECK_TRIALS', '100'))
ADJOINT_CHECK_TOL = float(os.getenv('MRAI_ADJOINT_CHECK_TOL', '1e-10'))
ADJOINT_CHECK_MAX_AXES = (5, 4, 3)   # largest (I, J, K) drawn
ADJOINT_CHECK_MAX_LEVELS = 6         # largest L drawn

# =============================================================================
# PHANTOM DEFAULTS
# =============================================================================
PHANTOM_DEFAULTS = {
    'nx': 16,
    'ny': 16,
    'nz': 8,
    'nt': 6,
    'sigma_voxels': 3.0,
    'amplitude': 100.0,
    'baseline': 50.0,
}

# =============================================================================
# LOGGING CONFIGURATION
# =============================================================================
LOG_LEVEL = os.getenv('MRAI_LOG_LEVEL', 'INFO')  # DEBUG, INFO, WARNING, ERROR, CRITICAL
LOG_FILE = os.getenv('MRAI_LOG_FILE', '')        # empty: stderr only
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
