"""
Django settings for the siegel project.
"""

import os
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# No HTTP surface is served; the key only satisfies Django's startup checks.
SECRET_KEY = 'siegel-local-experiments-key'

DEBUG = False

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'hedgehogs',
]

# No database: experiments are configured by files and flags only
DATABASES = {}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

# REST Framework (serializers only; JSON in and out)
REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'DEFAULT_PARSER_CLASSES': [
        'rest_framework.parsers.JSONParser',
    ],
    'COERCE_DECIMAL_TO_STRING': False,
}

# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'hedgehogs': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
    },
}

# Library defaults used by the management commands
HEDGEHOGS = {
    'THREADS': config('HEDGEHOGS_THREADS', default=1, cast=int),
    'ORDER': 20,
    'COEFF_TOL': 1e-9,
    'PRECISION_BITS': 53,
    'MAX_ITER': 10_000,
    'EXTENT_FACTOR': 1.25,
    'REFINE_DEPTH': 1000,
    'RADIUS': 0.2,
    'RESOLUTION': 512,
}
