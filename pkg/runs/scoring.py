"""
Metrics of one run against the scene truth.
"""
import logging
import math

import numpy as np
from scipy.signal import find_peaks

from imaging.formation import cross_range_bins

logger = logging.getLogger(__name__)

PEAK_FRACTION = 0.5
MATCH_TOLERANCE = 1

METRIC_NAMES = ('delay_set_f1', 'doppler_rmse_hz', 'v_hat_mps', 'v_err_pct', 'image_peak_match_count')


def delay_set_f1(estimated, truth_ells):
    estimated = set(int(v) for v in estimated)
    truth_ells = set(int(v) for v in truth_ells)
    hits = len(estimated & truth_ells)
    if hits == 0:
        return 0.0
    precision = hits / len(estimated)
    recall = hits / len(truth_ells)
    return 2 * precision * recall / (precision + recall)


def truth_doppler_by_delay(truth):
    """Mean true Doppler history of the scatterers sharing each frame-0 delay."""
    ells = truth.ell[:, 0]
    return {int(ell): truth.nu[ells == ell].mean(axis=0) for ell in np.unique(ells)}


def doppler_rmse(estimated_ells, corrected, truth):
    """RMSE over every frame of the estimated rows whose delay is a true delay; NaN if none is."""
    by_delay = truth_doppler_by_delay(truth)
    errors = [np.asarray(row) - by_delay[int(ell)]
              for ell, row in zip(estimated_ells, corrected) if int(ell) in by_delay]
    if not errors:
        return math.nan
    return float(np.sqrt(np.mean(np.square(errors))))


def image_peaks(grid):
    """(row, col) of local maxima at or above half the maximum of their row."""
    peaks = set()
    for row, values in enumerate(np.asarray(grid)):
        top = values.max()
        if top <= 0:
            continue
        cols, _ = find_peaks(values, height=PEAK_FRACTION * top)
        peaks.update((row, int(col)) for col in cols)
        peaks.add((row, int(np.argmax(values))))
    return peaks


def projected_positions(truth, image, omega, cfg):
    """Grid cell of every truth scatterer: its frame-0 delay row and its reference-frame Doppler column."""
    M = image.n_cr
    rows = truth.ell[:, 0] - image.origin_ell
    b = cross_range_bins(truth.nu[:, cfg.reference_frame], omega, M, cfg)
    cols = (M // 2 + np.rint(b).astype(np.int64)) % M
    if image.flipped:
        cols = M - 1 - cols
    return list(zip(rows.tolist(), cols.tolist()))


def image_peak_matches(truth, image, omega, cfg):
    peaks = image_peaks(image.grid)
    count = 0
    for row, col in projected_positions(truth, image, omega, cfg):
        if any((row + dr, col + dc) in peaks
               for dr in range(-MATCH_TOLERANCE, MATCH_TOLERANCE + 1)
               for dc in range(-MATCH_TOLERANCE, MATCH_TOLERANCE + 1)):
            count += 1
    return count


def score(truth, estimates, image, cfg, omega=None):
    """
    ``estimates`` is an EstimateSummary (or anything with delays,
    doppler_corrected and v_hat). The image count needs ``omega``, the
    rotational velocity the image was formed with; without an image it is 0.
    """
    v_hat = float(estimates.v_hat)
    metrics = {
        'delay_set_f1': delay_set_f1(estimates.delays, truth.ell[:, 0]),
        'doppler_rmse_hz': doppler_rmse(estimates.delays, estimates.doppler_corrected, truth),
        'v_hat_mps': v_hat,
        'v_err_pct': 100.0 * abs(v_hat - cfg.speed_mps) / cfg.speed_mps,
        'image_peak_match_count': (image_peak_matches(truth, image, omega, cfg)
                                   if image is not None and omega else 0),
    }
    logger.info("Scored run: F1=%.3f, Doppler RMSE=%.4f Hz, V error=%.2f%%, %d image matches",
                metrics['delay_set_f1'], metrics['doppler_rmse_hz'], metrics['v_err_pct'],
                metrics['image_peak_match_count'])
    return metrics


def failed_metrics():
    """Metrics recorded for a trial where nothing was detected: no delays and zero speed."""
    return {
        'delay_set_f1': 0.0,
        'doppler_rmse_hz': math.nan,
        'v_hat_mps': 0.0,
        'v_err_pct': 100.0,
        'image_peak_match_count': 0,
    }
