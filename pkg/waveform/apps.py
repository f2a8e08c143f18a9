from django.apps import AppConfig

class WaveformConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'waveform'
    verbose_name = 'Golay waveform'
