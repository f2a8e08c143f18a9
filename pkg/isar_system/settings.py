"""
Django settings for isar_system project.
"""
from pathlib import Path

from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-isar-development-key')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = config('DEBUG', default=True, cast=bool)

ALLOWED_HOSTS = ['testserver', '127.0.0.1', 'localhost']

# Application definition
INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'waveform',
    'scene',
    'frontend',
    'estimation',
    'imaging',
    'runs',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'isar_system.urls'

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

WSGI_APPLICATION = 'isar_system.wsgi.application'

# Database
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

STATIC_URL = '/static/'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

LOGIN_URL = '/admin/login/'

# Simulation output and workers
ISAR_OUTPUT_ROOT = Path(config('ISAR_OUTPUT_ROOT', default=str(BASE_DIR / 'output')))
ISAR_WORKERS = config('ISAR_WORKERS', default=4, cast=int)
ISAR_VEHICLE_FILE = Path(config(
    'ISAR_VEHICLE_FILE', default=str(BASE_DIR / 'scene' / 'data' / 'vehicle_v1.csv')))

# Logging
ISAR_LOG_LEVEL = config('ISAR_LOG_LEVEL', default='INFO')
ISAR_LOG_FILE = config('ISAR_LOG_FILE', default='')

_log_handlers = ['console']

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
            'level': ISAR_LOG_LEVEL,
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'INFO',
            'propagate': True,
        },
    },
}

if ISAR_LOG_FILE:
    LOGGING['handlers']['file'] = {
        'level': ISAR_LOG_LEVEL,
        'class': 'logging.FileHandler',
        'filename': ISAR_LOG_FILE,
        'formatter': 'verbose',
    }
    _log_handlers.append('file')
    LOGGING['loggers']['django']['handlers'] = list(_log_handlers)

for _app in ('waveform', 'scene', 'frontend', 'estimation', 'imaging', 'runs'):
    LOGGING['loggers'][_app] = {
        'handlers': list(_log_handlers),
        'level': ISAR_LOG_LEVEL,
        'propagate': False,
    }
