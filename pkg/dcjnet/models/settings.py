import os
from dotenv import load_dotenv

load_dotenv()

# Parallelism
DCJ_THREADS = int(os.getenv("DCJ_THREADS", str(os.cpu_count() or 1)))

# Enumeration budgets
STATE_BUDGET = int(os.getenv("DCJ_STATE_BUDGET", "200000"))
ORACLE_BUDGET = int(os.getenv("DCJ_ORACLE_BUDGET", "20000"))
VALIDATION_BUDGET = int(os.getenv("DCJ_VALIDATION_BUDGET", "1000000"))

# Series evaluation
SERIES_WINDOW = int(os.getenv("DCJ_SERIES_WINDOW", "10000"))
SERIES_MAX_TERMS = int(os.getenv("DCJ_SERIES_MAX_TERMS", "200000"))

# Default tolerances
VALIDATION_TOLERANCE = float(os.getenv("DCJ_VALIDATION_TOLERANCE", "1e-12"))
SERIES_TOLERANCE = float(os.getenv("DCJ_SERIES_TOLERANCE", "1e-12"))
BALANCE_TOLERANCE = float(os.getenv("DCJ_BALANCE_TOLERANCE", "1e-12"))
ORACLE_TOLERANCE = float(os.getenv("DCJ_ORACLE_TOLERANCE", "1e-10"))

# Output
OUTPUT_DIR = os.getenv("DCJ_OUTPUT_DIR", "reports")
LOG_LEVEL = os.getenv("DCJ_LOG_LEVEL", "INFO")


def thread_cap() -> int:
    """Current parallelism cap, re-read so tests and callers can adjust DCJ_THREADS"""
    return max(1, int(os.getenv("DCJ_THREADS", str(DCJ_THREADS))))
