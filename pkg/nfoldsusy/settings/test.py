from .base import *

DEBUG = False

SECRET_KEY = "nfoldsusy-tests"

# Keep test output clean; only errors reach the console and nothing is written to disk.
LOGGING['handlers']['console']['level'] = 'ERROR'
for _handler in ('file_info', 'file_error', 'file_performance'):
    LOGGING['handlers'].pop(_handler)
for _name in ('django', 'nfoldsusy', 'susy'):
    LOGGING['loggers'][_name]['handlers'] = ['console']
LOGGING['loggers']['performance']['handlers'] = []

PERFORMANCE_LOGGING_ENABLED = False

VERIFY_SEED = 12345
