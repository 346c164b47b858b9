"""
LabelMap - Configuration
Load settings from environment variables with sensible defaults.
"""

import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Annealing schedule
DEFAULT_EPOCHS = int(os.getenv('LABELMAP_EPOCHS', '200'))
DEFAULT_LAMBDA_START = float(os.getenv('LABELMAP_LAMBDA_START', '0.9'))
DEFAULT_LAMBDA_END = float(os.getenv('LABELMAP_LAMBDA_END', '0.1'))

# Stress exponent p
DEFAULT_STRESS_EXPONENT = float(os.getenv('LABELMAP_STRESS_EXPONENT', '1.0'))

# Reproducibility
DEFAULT_SEED = int(os.getenv('LABELMAP_SEED', '0'))
DEFAULT_WORKERS = int(os.getenv('LABELMAP_WORKERS', '1'))

# Evaluation
DEFAULT_NEIGHBORHOOD_SIZE = int(os.getenv('LABELMAP_DEFAULT_K', '10'))

# Logging
LOG_LEVEL = os.getenv('LABELMAP_LOG_LEVEL', 'INFO').upper()
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Plot settings (pixels)
PLOT_WIDTH = int(os.getenv('LABELMAP_PLOT_WIDTH', '640'))
PLOT_HEIGHT = int(os.getenv('LABELMAP_PLOT_HEIGHT', '480'))
PLOT_POINT_RADIUS = float(os.getenv('LABELMAP_PLOT_POINT_RADIUS', '3.0'))
PLOT_MARGIN_FRACTION = 0.05
PLOT_PALETTE = (
    '#1f77b4', '#ff7f0e', '#2ca02c', '#d62728', '#9467bd',
    '#8c564b', '#e377c2', '#7f7f7f', '#bcbd22', '#17becf',
)

# Numerical constants
# Degenerate Gaussian scale: sigma = SIGMA_EPSILON * max(mean, 1)
SIGMA_EPSILON = 1e-9

# Learning rate endpoints as fractions of mean input distance
LEARNING_RATE_START_FACTOR = 0.5
LEARNING_RATE_END_FACTOR = 0.01

# Random initialization std as a fraction of mean input distance
RANDOM_INIT_SCALE = 0.1

# Repulsive nudge for coincident map points, fraction of mean input distance
COINCIDENT_JITTER_SCALE = 1e-6

# Upper bound on |d - d*|^(p-1) when p < 1
SLOPE_CAP = 1e6

# Relative tolerances
SYMMETRY_TOLERANCE = 1e-9
EIGENVALUE_TOLERANCE = 1e-9

# Coordinate output: decimals used for |v| >= 1 and for zero
COORDINATE_DECIMALS = 8
COORDINATE_SIGNIFICANT_DIGITS = 9


# CLI exit codes
class ExitCode:
    OK = 0
    USAGE = 1
    DATA = 2
    NUMERIC = 3
