import os
from dotenv import load_dotenv

load_dotenv()

# Enumeration / exact arithmetic
ENUM_CAP = int(os.getenv("PJLAB_ENUM_CAP", str(2 ** 20)))
BIT_BUDGET = int(os.getenv("PJLAB_BIT_BUDGET", str(10 ** 6)))
MAX_ARITY = int(os.getenv("PJLAB_MAX_ARITY", "12"))

# Tolerances (float mode only; exact mode compares with ==)
FLOAT_WEIGHT_TOL = 1e-12
FLOAT_TOL = 1e-10

# Estimators
RUSSO_STEP = 1e-4
MC_SAMPLES = 100_000
DEFAULT_SEED = 0

# Logging / reports
LOG_LEVEL = os.getenv("PJLAB_LOG_LEVEL", "INFO")
REPORT_TIMING = os.getenv("PJLAB_REPORT_TIMING", "false").lower() in ("1", "true", "yes")
