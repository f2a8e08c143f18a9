from django.apps import AppConfig

class SceneConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'scene'
    verbose_name = 'Vehicle scene'
