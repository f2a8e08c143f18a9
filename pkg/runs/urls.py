from django.urls import path
from . import views

app_name = 'runs'

urlpatterns = [
    path('', views.run_list, name='run_list'),
    path('export/', views.export_runs_csv, name='export_runs_csv'),
    path('<int:run_id>/', views.run_detail, name='run_detail'),
    path('<int:run_id>/report/', views.run_report_pdf, name='run_report_pdf'),
    path('sweeps/<int:sweep_id>/export/', views.export_sweep_csv, name='export_sweep_csv'),
]
