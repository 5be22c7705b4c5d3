"""
Django settings for the gridflow project.

gridflow is a batch tool: no database, no URLs, no middleware. Django provides
configuration, logging and the management-command front end.
"""
import os

from dotenv import load_dotenv

# Build paths inside the project like this: os.path.join(BASE_DIR, 'subdir').
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

load_dotenv(os.path.join(BASE_DIR, '.env'))

SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "gridflow-batch-tool-no-sessions")

DEBUG = os.getenv("DJANGO_DEBUG", "False").strip().lower() in ("1", "true", "yes", "y")

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    # Local apps
    'network',
    'analytics',
    'surrogate',
    'ppf',
]

DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# gridflow runtime defaults
GRIDFLOW = {
    'THREADS': int(os.getenv('GRIDFLOW_THREADS', '1')),
    'CASE_DIR': os.getenv('GRIDFLOW_CASE_DIR', os.path.join(BASE_DIR, 'network', 'cases')),
    'CONFIG_DIR': os.path.join(BASE_DIR, 'ppf', 'configs'),
    'NR_TOLERANCE': 1e-8,
    'NR_MAX_ITER': 20,
    'NR_GROWTH_LIMIT': 3,
    'MAX_DIVERGED_FRACTION': 0.01,
    'MAPE_EPSILON': 1e-6,
    'KDE_POINTS': 512,
    'VARIANCE_COEFFICIENT_THRESHOLD': 0.01,
    'HALTON_SKIP': 409,
}


# Logging configuration
LOG_LEVEL = os.getenv('GRIDFLOW_LOG_LEVEL', 'WARNING').upper()
LOGS_DIR = os.getenv('GRIDFLOW_LOG_DIR', os.path.join(BASE_DIR, 'logs'))
if not os.path.exists(LOGS_DIR):
    os.makedirs(LOGS_DIR)


def _app_file_handler(name):
    return {
        'level': LOG_LEVEL,
        'class': 'logging.handlers.RotatingFileHandler',
        'filename': os.path.join(LOGS_DIR, f'{name}.log'),
        'maxBytes': 1024 * 1024 * 10,  # 10 MB
        'backupCount': 5,
        'formatter': 'verbose',
    }


LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {asctime} {message}',
            'style': '{',
        },
        'detailed': {
            'format': '{levelname} {asctime} {name} {pathname}:{lineno} {funcName} {message}',
            'style': '{',
        },
    },
    'handlers': {
        # Case parsing and admittance assembly
        'file_network': _app_file_handler('network'),
        # Power flow and linear models
        'file_analytics': _app_file_handler('analytics'),
        # Residual network training
        'file_surrogate': _app_file_handler('surrogate'),
        # Scenario sampling, datasets, MCS, reports and commands
        'file_ppf': _app_file_handler('ppf'),
        # All ERROR level logs (centralized error tracking)
        'file_errors': {
            'level': 'ERROR',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': os.path.join(LOGS_DIR, 'errors.log'),
            'maxBytes': 1024 * 1024 * 10,  # 10 MB
            'backupCount': 10,
            'formatter': 'detailed',
        },
        'console': {
            'level': LOG_LEVEL,
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file_errors', 'console'],
            'level': 'WARNING',
            'propagate': False,
        },
        'network': {
            'handlers': ['file_network', 'file_errors', 'console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'analytics': {
            'handlers': ['file_analytics', 'file_errors', 'console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'surrogate': {
            'handlers': ['file_surrogate', 'file_errors', 'console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'ppf': {
            'handlers': ['file_ppf', 'file_errors', 'console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}
