"""Settings access that also works when Django is not configured."""
from typing import Any

from django.conf import settings

DEFAULTS = {
    'VERIFY_SAMPLES': 64,
    'VERIFY_SEED': 12345,
    'VERIFY_RTOL': 1e-9,
    'VERIFY_ATOL': 1e-9,
    'VERIFY_DOMAIN': (0.3, 2.1),
    'REFERENCE_POINT': 1.0,
    'SPECTRAL_INTERVAL': (-10.0, 10.0),
    'SPECTRAL_POINTS': 2000,
    'SPECTRAL_LEVELS': 5,
    'KERNEL_TOL': 1e-6,
    'PAIR_TOL': 1e-2,
    'MOTHER_TOL': 5e-3,
    'FOLD_JOBS': 1,
    'REPORT_SCHEMA_VERSION': 1,
    'PERFORMANCE_LOGGING_ENABLED': False,
    'SLOW_OPERATION_THRESHOLD': 5.0,
}


def setting(name: str, default: Any = None) -> Any:
    fallback = DEFAULTS.get(name, default)
    if settings.configured:
        return getattr(settings, name, fallback)
    return fallback
