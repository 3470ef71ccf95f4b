import os
from pathlib import Path

# ======================
# PATHS
# ======================

BASE_DIR = Path(__file__).resolve().parent

# ======================
# SECURITY
# ======================

SECRET_KEY = "dev-secret-key"
DEBUG = True
ALLOWED_HOSTS = []

# ======================
# APPS
# ======================

INSTALLED_APPS = [
    "core",
]

# ======================
# DATABASE
# ======================

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}

# ======================
# I18N
# ======================

LANGUAGE_CODE = "pl"
TIME_ZONE = "Europe/Warsaw"
USE_I18N = True
USE_TZ = True

# ======================
# LOGGING
# ======================

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "stderr": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "plain",
        },
    },
    "loggers": {
        "core": {
            "handlers": ["stderr"],
            "level": os.environ.get("LIVES_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
    },
}

# ======================
# LIVES (symulacje)
# ======================

# klucze pominięte tutaj biorą wartości z core.conf.DEFAULTS
LIVES = {
    "ATOL": 1e-10,
    "EIG_ATOL": 1e-8,
    "SIGNAL_SPEED": 1.0,
    "SEPARATION": 10.0,
    "SINGLET_TRIALS": 10_000,
    "LIVES_EXPERIMENTS": 1000,
    "MAX_ROUNDS": 6,
    "WORKERS": int(os.environ.get("LIVES_WORKERS", "1")),
}

# ======================
# DEFAULTS
# ======================

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"
