from django.apps import AppConfig


class HedgehogsConfig(AppConfig):
    name = 'hedgehogs'
    verbose_name = 'Hedgehogs and Siegel compacta'
