"""
Django settings for the shallow-network laboratory.

The project has no web surface: experiments run as management commands of
the `lab` app and record their provenance in the database.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""
import os
from pathlib import Path
from dotenv import load_dotenv


load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('SECRET_KEY', 'django-insecure-lab-only-key-for-local-experiments')

DEBUG = os.getenv('DEBUG') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',

    'rest_framework',

    'lab',
]


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.getenv('LAB_DATABASE', BASE_DIR / 'db.sqlite3'),
    }
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Laboratory
LAB_OUTPUT_DIR = os.getenv('LAB_OUTPUT_DIR', str(BASE_DIR / 'runs'))
LAB_DEFAULT_SEED = int(os.getenv('LAB_DEFAULT_SEED', 20240601))
LAB_WORKERS = int(os.getenv('LAB_WORKERS', 4))
LAB_RECORD_RUNS = os.getenv('LAB_RECORD_RUNS', 'True') == 'True'
LAB_LOG_LEVEL = os.getenv('LAB_LOG_LEVEL', 'INFO')
LAB_FOURIER_CAP = int(os.getenv('LAB_FOURIER_CAP', 65536))

# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
        'file': {
            'class': 'logging.FileHandler',
            'filename': BASE_DIR / 'lab.log',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console', 'file'],
        'level': LAB_LOG_LEVEL,
    },
    'loggers': {
        'lab': {
            'handlers': ['console', 'file'],
            'level': 'DEBUG',
            'propagate': False,
        },
    },
}
