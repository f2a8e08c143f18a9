"""
Sampled-delay detection on the first frame.

Lags are absolute sampled delays: the correlation at lag l reads the frame
at absolute sample l + 2048 + k, so a scatterer with sampled delay ell_p
peaks at l = ell_p.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from scene.config import CLEAN_LAGS_AFTER, CLEAN_LAGS_BEFORE
from waveform.golay import S512_OFFSET, xcorr_s512

logger = logging.getLogger(__name__)

# Frame-0 Doppler leaks about 1e-4 of a peak into its clean span; a noiseless
# run must not read that as a scatterer.
RELATIVE_FLOOR = 1e-3


class NoTargetDetected(Exception):
    """No correlation lag exceeds the detection threshold."""


class SearchWindowError(ValueError):
    """The delay search window does not fit inside the frame."""


@dataclass(frozen=True)
class DelaySet:
    ells: np.ndarray
    ell_max_idx: int
    peaks: np.ndarray
    threshold: float

    def __len__(self):
        return len(self.ells)

    @property
    def first(self):
        return int(self.ells[0])

    @property
    def last(self):
        return int(self.ells[-1])

    @property
    def ell_max(self):
        return int(self.ells[self.ell_max_idx])


def detection_threshold(cfg, sigma_nc):
    """sigma_th: thresh_mult * sigma_nc, or kappa * sqrt(512) * sigma_nc when calibrated."""
    if cfg.threshold_rule == 'calibrated':
        return cfg.false_alarm_kappa * math.sqrt(512) * sigma_nc
    return cfg.thresh_mult * sigma_nc


def correlate_frame(frame, s512, lags):
    """Correlation at absolute lags, translated into the frame's sample window."""
    local = np.asarray(lags, dtype=np.int64) + S512_OFFSET - frame.k0
    return xcorr_s512(s512, frame.y, local)


def full_lag_range(frame, s512):
    first = frame.k0 - S512_OFFSET
    last = frame.k0 + len(frame.y) - len(s512) - S512_OFFSET
    return np.arange(first, last + 1, dtype=np.int64)


def detect_delays(frame0, s512, sigma_nc, search_window, thresh_mult=512.0,
                  gating=True, threshold=None):
    """
    Strongest lag over the whole frame, then every lag within ``search_window``
    of it whose correlation magnitude exceeds the threshold.

    With ``gating`` the candidates are taken strongest first and each one must
    sit inside the clean span [max accepted - 64, min accepted + 128] of the
    delays already accepted, which rejects the preamble sidelobes of strong
    returns.
    """
    lags = full_lag_range(frame0, s512)
    if lags.size == 0:
        raise SearchWindowError(f"frame {frame0.m} is shorter than the correlation segment")
    magnitude = np.abs(correlate_frame(frame0, s512, lags))

    peak_pos = int(np.argmax(magnitude))
    ell_max = int(lags[peak_pos])
    peak = float(magnitude[peak_pos])

    sigma_th = thresh_mult * sigma_nc if threshold is None else threshold
    sigma_th = max(sigma_th, RELATIVE_FLOOR * peak)
    if peak <= sigma_th:
        raise NoTargetDetected(
            f"strongest correlation {peak:.3e} does not exceed threshold {sigma_th:.3e}")

    lo, hi = ell_max - search_window, ell_max + search_window
    if lo < lags[0] or hi > lags[-1]:
        raise SearchWindowError(
            f"search window {lo}..{hi} exceeds the frame's lag range {lags[0]}..{lags[-1]}")

    in_window = (lags >= lo) & (lags <= hi) & (magnitude > sigma_th)
    candidates = lags[in_window]
    strengths = magnitude[in_window]
    order = np.lexsort((candidates, -strengths))

    accepted = []
    rejected = 0
    for idx in order:
        lag = int(candidates[idx])
        if gating and accepted:
            if not max(accepted) - CLEAN_LAGS_BEFORE <= lag <= min(accepted) + CLEAN_LAGS_AFTER:
                rejected += 1
                continue
        accepted.append(lag)

    if rejected:
        logger.debug("Rejected %d sidelobe candidate(s) outside the clean span", rejected)

    ells = np.array(sorted(accepted), dtype=np.int64)
    peaks = magnitude[np.searchsorted(lags, ells)]
    logger.info("Detected %d sampled delays in %d..%d (peak at %d, threshold %.3e)",
                len(ells), ells[0], ells[-1], ell_max, sigma_th)
    return DelaySet(ells=ells, ell_max_idx=int(np.searchsorted(ells, ell_max)),
                    peaks=peaks, threshold=sigma_th)


def detect_for_config(frame0, s512, cfg):
    sigma_nc = math.sqrt(cfg.sigma_nc2)
    return detect_delays(frame0, s512, sigma_nc, cfg.window_half_width,
                         gating=cfg.detection_gating,
                         threshold=detection_threshold(cfg, sigma_nc))
