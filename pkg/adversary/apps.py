from django.apps import AppConfig


class AdversaryConfig(AppConfig):
    name = 'adversary'
