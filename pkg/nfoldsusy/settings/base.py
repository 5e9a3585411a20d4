import os

PROJECT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
BASE_DIR = os.path.dirname(PROJECT_DIR)


def _float_pair(name, default):
    raw = os.getenv(name)
    if not raw:
        return default
    low, high = (float(part) for part in raw.split(","))
    return (low, high)


INSTALLED_APPS = [
    "susy",
]

# No database is used; Django only provides settings, logging and commands.
DATABASES = {}

USE_TZ = True
TIME_ZONE = "UTC"

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Zero testing
VERIFY_SAMPLES = int(os.getenv("NFOLDSUSY_VERIFY_SAMPLES", "64"))
VERIFY_SEED = int(os.getenv("NFOLDSUSY_VERIFY_SEED", "12345"))
VERIFY_RTOL = float(os.getenv("NFOLDSUSY_VERIFY_RTOL", "1e-9"))
VERIFY_ATOL = float(os.getenv("NFOLDSUSY_VERIFY_ATOL", "1e-9"))
VERIFY_DOMAIN = _float_pair("NFOLDSUSY_VERIFY_DOMAIN", (0.3, 2.1))
REFERENCE_POINT = float(os.getenv("NFOLDSUSY_REFERENCE_POINT", "1.0"))

# Spectral lab
SPECTRAL_INTERVAL = _float_pair("NFOLDSUSY_SPECTRAL_INTERVAL", (-10.0, 10.0))
SPECTRAL_POINTS = int(os.getenv("NFOLDSUSY_SPECTRAL_POINTS", "2000"))
SPECTRAL_LEVELS = int(os.getenv("NFOLDSUSY_SPECTRAL_LEVELS", "5"))
KERNEL_TOL = float(os.getenv("NFOLDSUSY_KERNEL_TOL", "1e-6"))
PAIR_TOL = float(os.getenv("NFOLDSUSY_PAIR_TOL", "1e-2"))
MOTHER_TOL = float(os.getenv("NFOLDSUSY_MOTHER_TOL", "5e-3"))

# Batch runs
FOLD_JOBS = int(os.getenv("NFOLDSUSY_FOLD_JOBS", "1"))
REPORT_SCHEMA_VERSION = 1

from .logging import *  # noqa: E402,F401,F403
