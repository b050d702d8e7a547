"""
Django settings for the snakelab project.

The project has no web surface: Django provides the settings layer, the
management-command CLI and the test runner. Domain constants live in
``custom_settings`` and are imported at the bottom of this module.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.1/ref/settings/
"""

from pathlib import Path
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Not used for anything cryptographic; Django refuses to start without one.
SECRET_KEY = os.getenv('SNAKELAB_SECRET_KEY', 'snakelab-offline-laboratory')

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "groups",
    "graphs",
    "mixing",
    "snakes",
    "solvers",
    "adversary",
    "harness",
]

MIDDLEWARE = []


# Database
# The laboratory stores nothing; the test runner still wants a default alias.

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Logging
# Reports go through command stdout; logging is for diagnostics only, so the
# default level keeps command output byte-stable.

LOG_LEVEL = os.getenv('SNAKELAB_LOG_LEVEL', 'WARNING').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': LOG_LEVEL,
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
    },
}

from .custom_settings import *
