from django.apps import AppConfig


class PatternsConfig(AppConfig):
    name = 'patterns'
    verbose_name = "Полиномиальные паттерны в простых числах"
