from django.apps import AppConfig


class MixingConfig(AppConfig):
    name = 'mixing'
