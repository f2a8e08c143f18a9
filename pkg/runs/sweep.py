"""
Parameter sweeps: one in-memory pipeline run per (value, trial), seeds derived
from the base seed, metrics collected into pandas tables.
"""
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import openpyxl
import pandas as pd
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured
from openpyxl.styles import Font, PatternFill
from openpyxl.utils import get_column_letter

from runs.artifacts import write_bytes, write_csv
from runs.pipeline import StageError, run_pipeline
from runs.scoring import METRIC_NAMES, failed_metrics
from scene.config import cast_value, field_names, load_config

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
SEED_MASK = (1 << 63) - 1


def splitmix64(index):
    """One SplitMix64 output for state ``index``."""
    z = (index + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(base_seed, index):
    return (base_seed ^ splitmix64(index)) & SEED_MASK


@dataclass(frozen=True)
class SweepResult:
    param: str
    values: list
    base_seed: int
    trials: pd.DataFrame
    summary: pd.DataFrame


def _run_trial(job):
    index, value, trial, cfg = job
    try:
        metrics = run_pipeline(cfg, workers=1).metrics
        status = 'ok'
    except StageError as exc:
        logger.warning("Trial %d (%s, seed %d) failed in %s: %s",
                       index, value, cfg.seed, exc.stage, exc.cause)
        metrics = failed_metrics()
        status = f'{exc.stage}: {type(exc.cause).__name__}'
    return {'index': index, 'value': value, 'trial': trial, 'seed': cfg.seed,
            'status': status, **metrics}


def summarize(trials):
    """Mean of every metric per value, in sweep order, with the failure count."""
    grouped = trials.groupby('value', sort=False)
    summary = grouped[list(METRIC_NAMES)].mean()
    summary['trials'] = grouped.size()
    summary['failures'] = grouped['status'].apply(lambda s: int((s != 'ok').sum()))
    return summary.reset_index()


def sweep(config_path=None, param=None, values=None, trials=1, cfg=None, workers=None):
    """
    Run ``trials`` seeded trials for every value of ``param``. Trial ``n``
    (counted across values) runs with seed base_seed XOR splitmix64(n).
    """
    if param not in field_names() or param == 'seed':
        raise ImproperlyConfigured(f"cannot sweep unknown setting {param!r}")
    values = list(values or [])
    if not values:
        raise ValueError("a sweep needs at least one value")
    if trials < 1:
        raise ValueError("a sweep needs at least one trial per value")

    base = cfg if cfg is not None else load_config(config_path)
    typed = [cast_value(param, v) if isinstance(v, str) else v for v in values]
    jobs = []
    for position, value in enumerate(typed):
        for trial in range(trials):
            index = position * trials + trial
            trial_cfg = base.with_overrides(**{param: value, 'seed': trial_seed(base.seed, index),
                                               'write_frames': False})
            jobs.append((index, value, trial, trial_cfg))

    workers = settings.ISAR_WORKERS if workers is None else max(1, int(workers))
    logger.info("Sweeping %s over %s, %d trial(s) each, %d worker(s)", param, typed, trials, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(_run_trial, jobs))

    table = pd.DataFrame(rows).sort_values('index').reset_index(drop=True)
    table.insert(0, 'param', param)
    return SweepResult(param=param, values=typed, base_seed=base.seed,
                       trials=table, summary=summarize(table))


def write_sweep_tables(result, out_dir):
    out_dir = Path(out_dir)
    return {
        'trials': write_csv(out_dir / 'sweep.csv', result.trials),
        'summary': write_csv(out_dir / 'sweep_summary.csv', result.summary),
    }


def _cell_value(value):
    if isinstance(value, (float, np.floating)) and not np.isfinite(value):
        return None
    if isinstance(value, np.generic):
        return value.item()
    return value


def sweep_workbook_bytes(result):
    """Summary and Trials sheets."""
    output = io.BytesIO()
    workbook = openpyxl.Workbook()

    header_font = Font(bold=True, size=12)
    header_fill = PatternFill(start_color="366092", end_color="366092", fill_type="solid")

    summary_sheet = workbook.active
    summary_sheet.title = "Summary"
    summary_sheet['A1'] = f'SWEEP OF {result.param}'
    summary_sheet['A1'].font = Font(bold=True, size=14)
    summary_sheet['A2'] = 'Base seed:'
    summary_sheet['B2'] = str(result.base_seed)

    trials_sheet = workbook.create_sheet("Trials")
    for sheet, table, first_row in ((summary_sheet, result.summary, 4), (trials_sheet, result.trials, 1)):
        for col, header in enumerate(table.columns, 1):
            cell = sheet.cell(row=first_row, column=col, value=str(header))
            cell.font = header_font
            cell.fill = header_fill
        for row, record in enumerate(table.itertuples(index=False), first_row + 1):
            for col, value in enumerate(record, 1):
                sheet.cell(row=row, column=col, value=_cell_value(value))
        for col in range(1, len(table.columns) + 1):
            sheet.column_dimensions[get_column_letter(col)].width = 18

    workbook.save(output)
    return output.getvalue()


def write_sweep_xlsx(result, out_dir):
    return write_bytes(Path(out_dir) / 'sweep.xlsx', sweep_workbook_bytes(result))
