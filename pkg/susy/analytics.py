# susy/analytics.py
import logging
import time
from datetime import datetime, timezone
from functools import wraps

from susy.conf import setting

logger = logging.getLogger('susy.analytics')
perf_logger = logging.getLogger('performance')


def performance_monitor(func_name=None):
    """Decorator to monitor how long expensive constructions and checks take."""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            if not setting('PERFORMANCE_LOGGING_ENABLED'):
                return func(*args, **kwargs)

            start_time = time.perf_counter()
            operation = func_name or f"{func.__module__}.{func.__name__}"

            try:
                result = func(*args, **kwargs)
            except Exception:
                duration = time.perf_counter() - start_time
                perf_logger.error(
                    "Operation failed",
                    extra={'duration': duration, 'operation': operation, 'status': 'error'}
                )
                raise

            duration = time.perf_counter() - start_time
            perf_logger.info(
                "Operation finished",
                extra={'duration': duration, 'operation': operation, 'status': 'success'}
            )

            threshold = setting('SLOW_OPERATION_THRESHOLD')
            if duration > threshold:
                perf_logger.warning(
                    "Slow operation detected",
                    extra={'duration': duration, 'operation': operation, 'threshold': threshold}
                )
            return result
        return wrapper
    return decorator


class ErrorTracker:
    """Log unexpected failures together with the run context."""

    @staticmethod
    def track_error(error, extra_context=None):
        error_data = {
            'error_type': type(error).__name__,
            'error_message': str(error),
            'timestamp': datetime.now(timezone.utc).isoformat(),
        }
        if extra_context:
            error_data['context'] = extra_context

        logger.error(
            f"Run error: {error_data['error_type']}",
            extra=error_data,
            exc_info=error
        )
        return error_data
