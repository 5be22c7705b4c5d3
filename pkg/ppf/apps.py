from django.apps import AppConfig


class PpfConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'ppf'
    verbose_name = 'Probabilistic power flow'
