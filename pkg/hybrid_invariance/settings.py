"""
Django settings for hybrid_invariance project.

Generated by 'django-admin startproject' using Django 5.1.4.

For more information on this file, see
https://docs.djangoproject.com/en/5.1/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.1/ref/settings/
"""

from pathlib import Path
import os

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# .env at the repo root, if present; real environment variables win
load_dotenv(BASE_DIR / '.env')


# Quick-start development settings - unsuitable for production
# See https://docs.djangoproject.com/en/5.1/howto/deployment/checklist/

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('HYBRID_INVARIANCE_SECRET_KEY', 'django-insecure-local-synthesis-runs-only')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.getenv('HYBRID_INVARIANCE_DEBUG', 'False').lower() in ('1', 'true', 'yes')

ALLOWED_HOSTS = [
    'localhost',
    '127.0.0.1',
]

# Application definition

INSTALLED_APPS = [
    # My apps
    'synthesis',
    'rest_framework',
    'django_extensions',

    # Default Django Apps
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
]

MIDDLEWARE = [
    # Default Django MiddleWare
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'hybrid_invariance.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'hybrid_invariance.wsgi.application'

# Database
# https://docs.djangoproject.com/en/5.1/ref/settings/#databases
# Only the run ledger lives here; SQLite unless the environment says otherwise

DATABASES = {
    'default': {
        'ENGINE': os.getenv('HYBRID_INVARIANCE_DB_ENGINE', 'django.db.backends.sqlite3'),
        'NAME': os.getenv('HYBRID_INVARIANCE_DB_NAME', str(BASE_DIR / 'db.sqlite3')),
    }
}

# Password validation
# https://docs.djangoproject.com/en/5.1/ref/settings/#auth-password-validators

AUTH_PASSWORD_VALIDATORS = [
    {
        'NAME': 'django.contrib.auth.password_validation.UserAttributeSimilarityValidator',
    },
    {
        'NAME': 'django.contrib.auth.password_validation.MinimumLengthValidator',
    },
    {
        'NAME': 'django.contrib.auth.password_validation.CommonPasswordValidator',
    },
    {
        'NAME': 'django.contrib.auth.password_validation.NumericPasswordValidator',
    },
]


# Internationalization
# https://docs.djangoproject.com/en/5.1/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


# Static files (CSS, JavaScript, Images)
# https://docs.djangoproject.com/en/5.1/howto/static-files/
STATIC_URL = '/static/'

# Default primary key field type
# https://docs.djangoproject.com/en/5.1/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Restframework
REST_FRAMEWORK = {
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.AllowAny'
    ],
    'DEFAULT_AUTHENTICATION_CLASSES': (
        'rest_framework.authentication.BasicAuthentication',
        'rest_framework.authentication.SessionAuthentication',
    ),
    'DEFAULT_RENDERER_CLASSES': (
        'rest_framework.renderers.JSONRenderer',
        'rest_framework.renderers.BrowsableAPIRenderer',
    ),
    'DEFAULT_PAGINATION_CLASS': 'rest_framework.pagination.PageNumberPagination',
    'PAGE_SIZE': 10,
}

# Synthesis
HYBRID_INVARIANCE = {
    'SOLVER': os.getenv('HYBRID_INVARIANCE_SOLVER', 'CLARABEL'),
    'SOLVER_OPTIONS': {
        'max_iters': 500,
        'feas_tol': 1e-8,
        'gap_tol': 1e-8,
    },
    'RANK_TOL': 1e-9,
    'VERIFY_SEED': 2021,
    'VERIFY_DIRECTIONS': 10000,
    'VERIFY_TOL': 1e-6,
    'CONVEXITY_SAMPLES': 10000,
    'GAMMA_TOL': 1e-6,
    'PLOT_DIRECTIONS': 720,
    'CERTIFICATE_FORM': 'hrep',   # or 'vrep'
    'RECORD_RUNS': True,
    'REPRODUCE_JOBS': 4,
    'OUTPUT_DIR': str(BASE_DIR / 'out'),
}

# Logging
LOG_LEVEL = os.getenv('HYBRID_INVARIANCE_LOG_LEVEL', 'INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        name: {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False}
        for name in ('hybrid', 'geometry', 'polysos', 'conic', 'synthesis', 'verify')
    },
}

# Django Extensions
SHELL_PLUS_PRE_IMPORTS = [
    'from hybrid.serializers import read_system_file',
    'from synthesis.config import load_run_config',
    'from synthesis.runner import SynthesisSolution, solve_synthesis',
    'import numpy as np',
    'from pprint import pprint',
]
