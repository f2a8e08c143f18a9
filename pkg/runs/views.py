import csv
import json
from pathlib import Path

from django.contrib.auth.decorators import login_required
from django.http import HttpResponse, JsonResponse
from django.shortcuts import get_object_or_404
from django.views.decorators.http import require_http_methods

from .models import RunRecord, SweepRecord
from .reports import build_run_report

METRIC_COLUMNS = ['delay_set_f1', 'doppler_rmse_hz', 'v_hat_mps', 'v_err_pct', 'image_peak_match_count']


def _run_summary(run):
    return {
        'id': run.id,
        'label': run.label,
        'seed': run.seed,
        'status': run.status,
        'n_hat_p': run.n_hat_p,
        'output_dir': run.output_dir,
        'created_at': run.created_at.isoformat(),
        'metrics': run.metrics(),
    }


def _manifest_for(run):
    """The run's manifest.json when its directory still exists, else one rebuilt from the record."""
    path = Path(run.output_dir) / 'manifest.json'
    if path.exists():
        return json.loads(path.read_text(encoding='utf-8'))
    return {'config': run.config, 'seed': run.seed, 'paths': {}, 'metrics': run.metrics()}


@login_required
@require_http_methods(["GET"])
def run_list(request):
    runs = RunRecord.objects.all()
    status = request.GET.get('status')
    if status:
        runs = runs.filter(status=status)
    return JsonResponse({'runs': [_run_summary(run) for run in runs]})


@login_required
@require_http_methods(["GET"])
def run_detail(request, run_id):
    run = get_object_or_404(RunRecord, id=run_id)
    return JsonResponse({'run': _run_summary(run), 'manifest': _manifest_for(run)})


@login_required
@require_http_methods(["GET"])
def export_runs_csv(request):
    response = HttpResponse(content_type='text/csv')
    response['Content-Disposition'] = 'attachment; filename="isar_runs.csv"'

    writer = csv.writer(response)
    writer.writerow(['Run', 'Label', 'Seed', 'Status', 'Scatterers'] + METRIC_COLUMNS)
    for run in RunRecord.objects.all():
        metrics = run.metrics()
        writer.writerow([run.id, run.label, run.seed, run.status, run.n_hat_p]
                        + [metrics[name] for name in METRIC_COLUMNS])
    return response


@login_required
@require_http_methods(["GET"])
def run_report_pdf(request, run_id):
    run = get_object_or_404(RunRecord, id=run_id)
    response = HttpResponse(build_run_report(_manifest_for(run)), content_type='application/pdf')
    response['Content-Disposition'] = f'attachment; filename="isar_run_{run.id}.pdf"'
    return response


@login_required
@require_http_methods(["GET"])
def export_sweep_csv(request, sweep_id):
    sweep = get_object_or_404(SweepRecord, id=sweep_id)
    response = HttpResponse(content_type='text/csv')
    response['Content-Disposition'] = f'attachment; filename="isar_sweep_{sweep.id}.csv"'

    writer = csv.writer(response)
    writer.writerow(['Param', 'Value', 'Trial', 'Seed', 'Status'] + METRIC_COLUMNS)
    for trial in sweep.trials.all():
        writer.writerow([sweep.param, trial.value, trial.trial, trial.seed, trial.status]
                        + [getattr(trial, name) for name in METRIC_COLUMNS])
    return response
