"""isar_system URL Configuration"""
from django.contrib import admin
from django.urls import path, include
from django.views.generic import RedirectView

urlpatterns = [
    path('', RedirectView.as_view(url='/runs/', permanent=False), name='root'),
    path('admin/', admin.site.urls),
    path('runs/', include('runs.urls')),
]
