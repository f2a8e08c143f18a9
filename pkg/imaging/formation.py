"""
Range profile, cross-range tones and the ISAR image.

Image rows are range bins, columns are FFT-shifted cross-range bins with
zero Doppler at column M // 2.
"""
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import fft
from scipy.constants import c as SPEED_OF_LIGHT

logger = logging.getLogger(__name__)


class ImagingError(ValueError):
    """Inputs that cannot be placed on the image grid."""


@dataclass(frozen=True)
class RangeProfile:
    bins: np.ndarray
    delta_r: float
    origin_ell: int
    ells: np.ndarray
    coefficients: np.ndarray

    @property
    def n_r(self):
        return len(self.bins)

    def rows(self):
        return self.ells - self.origin_ell

    def range_axis(self):
        return (self.origin_ell + np.arange(self.n_r)) * self.delta_r


@dataclass(frozen=True)
class IsarImage:
    grid: np.ndarray
    delta_r: float
    delta_cr: float
    flipped: bool = False
    origin_ell: int = 0

    @property
    def n_r(self):
        return self.grid.shape[0]

    @property
    def n_cr(self):
        return self.grid.shape[1]

    def flip(self):
        """Mirror the cross-range axis."""
        return replace(self, grid=self.grid[:, ::-1].copy(), flipped=not self.flipped)


def _ells(delays):
    return np.asarray(getattr(delays, 'ells', delays), dtype=np.int64)


def range_profile(delays, h_hat, cfg):
    """Place each coefficient in the bin of its sampled delay; the vehicle sits mid-window."""
    ells = _ells(delays)
    coefficients = np.asarray(getattr(h_hat, 'h_hat', h_hat), dtype=np.complex128)
    if len(ells) != len(coefficients):
        raise ImagingError(f"{len(ells)} delays but {len(coefficients)} coefficients")
    n_r = cfg.range_bins
    bins = np.zeros(n_r, dtype=np.complex128)
    if len(ells) == 0:
        return RangeProfile(bins=bins, delta_r=cfg.range_resolution_m, origin_ell=0,
                            ells=ells, coefficients=coefficients)

    centre = (int(ells.min()) + int(ells.max())) // 2
    origin = centre - n_r // 2
    rows = ells - origin
    if rows.min() < 0 or rows.max() >= n_r:
        raise ImagingError(f"delays {ells.min()}..{ells.max()} do not fit in {n_r} range bins")
    np.add.at(bins, rows, coefficients)
    return RangeProfile(bins=bins, delta_r=cfg.range_resolution_m, origin_ell=origin,
                        ells=ells, coefficients=coefficients)


def rotational_velocity(v_hat, cfg):
    """omega = V cos(atan(X0 / Y0)) / R0."""
    if cfg.reference_range_m <= 0:
        raise ImagingError("reference range must be positive")
    return v_hat * math.cos(math.atan(cfg.x0_m / cfg.y0_m)) / cfg.reference_range_m


def cross_range_resolution(omega, num_frames, cfg):
    """lambda W_D / (2 M omega) with W_D = 2 omega Y_size f_c / c."""
    doppler_bandwidth = 2 * omega * cfg.y_size_m * cfg.carrier_hz / SPEED_OF_LIGHT
    return cfg.wavelength_m * doppler_bandwidth / (2 * num_frames * omega)


def cross_range_bins(doppler_hz, omega, num_frames, cfg):
    """Cross-range bin coordinate nu * c / (2 f_c omega delta_cr)."""
    delta_cr = cross_range_resolution(omega, num_frames, cfg)
    return np.asarray(doppler_hz) * SPEED_OF_LIGHT / (2 * cfg.carrier_hz * omega * delta_cr)


def cross_range_signal(doppler, omega, cfg, mode=None, reference_frame=None):
    """
    CR_p[m] = exp(j 2 pi b_p m / M). In ``reference`` mode b_p is taken from
    one frame of the corrected Doppler and held; in ``per_frame`` mode each
    frame uses its own b_p^m.
    """
    if omega <= 0:
        raise ImagingError(f"rotational velocity must be positive, got {omega}")
    corrected = np.asarray(getattr(doppler, 'corrected', doppler), dtype=float)
    M = corrected.shape[1]
    mode = mode or cfg.cross_range_mode
    m = np.arange(M)
    b = cross_range_bins(corrected, omega, M, cfg)
    if mode == 'reference':
        ref = cfg.reference_frame if reference_frame is None else reference_frame
        b = np.repeat(b[:, ref:ref + 1], M, axis=1)
    elif mode != 'per_frame':
        raise ImagingError(f"unknown cross-range mode {mode!r}")
    return np.exp(2j * np.pi * b * m[None, :] / M)


def form_image(profile, delays, CR, cfg, omega=None, workers=1):
    """Rows h_hat[p] * CR_p at each scatterer's range bin, then a shifted FFT per row."""
    ells = _ells(delays)
    CR = np.asarray(CR, dtype=np.complex128)
    if CR.ndim != 2 or CR.shape[0] != len(ells):
        raise ImagingError(f"cross-range signal has shape {CR.shape} for {len(ells)} delays")
    M = CR.shape[1] if CR.shape[0] else cfg.num_frames
    delta_cr = cross_range_resolution(omega, M, cfg) if omega else cfg.y_size_m / M

    if not np.array_equal(profile.ells, ells):
        raise ImagingError("delays do not match the range profile they were placed in")
    rows = np.zeros((profile.n_r, M), dtype=np.complex128)
    # scatterers sharing a range bin add coherently
    for p, ell in enumerate(ells):
        rows[int(ell) - profile.origin_ell] += profile.coefficients[p] * CR[p]

    spectrum = fft.fftshift(fft.fft(rows, axis=1, workers=workers), axes=1)
    logger.info("Formed %d x %d image (delta_r=%.4f m, delta_cr=%.4f m)",
                profile.n_r, M, profile.delta_r, delta_cr)
    return IsarImage(grid=np.abs(spectrum), delta_r=profile.delta_r, delta_cr=delta_cr,
                     flipped=False, origin_ell=profile.origin_ell)
