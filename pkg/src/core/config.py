"""
Configuration settings for Random Similarity Isolation Forest.
"""
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Forest hyperparameters
DEFAULT_TREES = 100
DEFAULT_SUBSAMPLE_SIZE = 256
DEFAULT_POOL_RATIO = 0.5  # Fraction of training rows eligible as reference objects
DEFAULT_STRATEGY = "two_step"  # Options: "two_step", "random", "global", "local"
DEFAULT_SEED = 0

# Tree construction
USABILITY_PAIRS = 32  # Random pairs sampled when checking whether a feature can split
USABILITY_EXHAUSTIVE_LIMIT = 8  # Check all pairs at or below this many candidates
MAX_SPLIT_RETRIES = 8
MAX_THRESHOLD_DRAWS = 64  # Uniform redraws before falling back to the lower bound
GLOBAL_TOP_PAIRS = 10

# Evaluation protocol
DEFAULT_TRAIN_FRACTION = 0.7
DEFAULT_TRIALS = 10
DEFAULT_VALIDATION_FRACTION = 0.3

# Data files
HISTOGRAM_MASS_TOLERANCE = 1e-9
MANIFEST_FILE = "manifest.json"
LABELS_FILE = "labels.txt"
MODEL_FORMAT = "rsif-model"
MODEL_FORMAT_VERSION = 1

# Runtime
DEFAULT_JOBS = int(os.getenv("RSIF_JOBS", "1"))
BENCHMARK_DIR = os.getenv("RSIF_BENCHMARK_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "benchmarks"))

# Logging
LOG_LEVEL = os.getenv("RSIF_LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("RSIF_LOG_FILE", "")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
