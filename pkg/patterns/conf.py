"""
Доступ к настройкам PRIME_PATTERNS.

Работает как api_settings у DRF: значения берутся из django.conf.settings,
а если проект не сконфигурирован (библиотека вызвана напрямую) -
из DEFAULTS.
"""
import os

from django.conf import settings

DEFAULTS = {
    'DEFAULT_SEED': 1729,
    'OP_CAP': 10**8,
    'SUPPORT_CAP': 10**8,
    'ENUMERATION_CAP': 10**8,
    'SIEVE_WINDOW': 2**20,
    'CHUNK_SIZE': 2**15,
    'MC_SAMPLES': 100_000,
    'WORKERS': None,
    'NEGATIVITY_TOLERANCE': 1e-9,
    'H_SAMPLES': 64,
}


class PatternSettings:
    """Ленивая обёртка над словарём PRIME_PATTERNS"""

    def __init__(self, defaults=None):
        self.defaults = defaults or DEFAULTS

    @property
    def user_settings(self):
        if not settings.configured:
            return {}
        return getattr(settings, 'PRIME_PATTERNS', {})

    def __getattr__(self, attr):
        if attr not in self.defaults:
            raise AttributeError(f"Invalid PRIME_PATTERNS setting: '{attr}'")
        return self.user_settings.get(attr, self.defaults[attr])

    @property
    def workers(self):
        return self.WORKERS or os.cpu_count() or 1

    def as_dict(self):
        return {key: getattr(self, key) for key in self.defaults}


pattern_settings = PatternSettings()
