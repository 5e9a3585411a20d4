from django.apps import AppConfig


class SusyConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'susy'
    verbose_name = 'N-fold supersymmetry'
