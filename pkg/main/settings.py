import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get("PRIME_PATTERNS_SECRET_KEY", "prime-patterns-local-only")

DEBUG = False

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    "rest_framework",
    "patterns",
]

# Базы данных нет: все вычисления в памяти, результаты уходят в stdout
DATABASES = {}

USE_I18N = False

USE_TZ = True

TIME_ZONE = "UTC"

REST_FRAMEWORK = {
    "UNAUTHENTICATED_USER": None,
}


# === Параметры вычислений ===
# Значения по умолчанию - patterns.conf.DEFAULTS; здесь только переопределения.
# Каждый прогон эхом печатает итоговую конфигурацию

PRIME_PATTERNS = {
    "WORKERS": int(os.environ.get("PRIME_PATTERNS_WORKERS", 0)) or None,
}


# === Логирование ===
# Человекочитаемые логи только в stderr, stdout остаётся под JSON

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "plain",
        },
    },
    "loggers": {
        "patterns": {
            "handlers": ["console"],
            "level": os.environ.get("PRIME_PATTERNS_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
    },
}
