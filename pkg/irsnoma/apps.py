from django.apps import AppConfig


class IrsNomaConfig(AppConfig):
    name = 'irsnoma'
    verbose_name = 'IRS-NOMA outage simulator'
