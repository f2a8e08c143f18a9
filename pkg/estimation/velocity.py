import logging
from dataclasses import dataclass

import numpy as np

from estimation.doppler import lower_median

logger = logging.getLogger(__name__)


class GeometryViolation(ValueError):
    """Doppler decreases the wrong way for the small-angle receding model."""

    def __init__(self, scatterers):
        self.scatterers = tuple(scatterers)
        super().__init__(
            "geometry violates small-angle/receding assumption for scatterer(s) "
            + ', '.join(str(p) for p in self.scatterers))


@dataclass(frozen=True)
class VelocityEstimate:
    v_hat: float
    per_scatterer: np.ndarray
    excluded: tuple = ()


def speed_radicand(nu_first, nu_last, cfg):
    """lambda R0 (nu_first - nu_last) / (2 T), T the span from the first to the last frame."""
    return (cfg.wavelength_m * cfg.reference_range_m
            * (np.asarray(nu_first, dtype=float) - np.asarray(nu_last, dtype=float))
            / (2 * cfg.observation_s))


def truth_speed(truth, cfg):
    """
    Small-angle speed evaluated on the true Doppler history. Its distance
    from the configured speed is the model error alone, with no estimation
    error in it.
    """
    radicand = speed_radicand(truth.nu[:, 0], truth.nu[:, -1], cfg)
    return lower_median(np.sqrt(radicand[radicand >= 0]))


def estimate_velocity(doppler, cfg):
    """
    sqrt of the speed radicand per scatterer; the estimate is the lower
    median over scatterers with a valid radicand.
    """
    corrected = doppler.corrected
    radicand = speed_radicand(corrected[:, 0], corrected[:, -1], cfg)
    negative = np.flatnonzero(np.isfinite(radicand) & (radicand < 0))
    valid = np.isfinite(radicand) & (radicand >= 0)
    if not np.any(valid):
        raise GeometryViolation(negative.tolist() or list(range(len(radicand))))
    if negative.size:
        logger.warning("Dropped scatterer(s) %s with negative radicand", negative.tolist())

    per_scatterer = np.full(radicand.shape, np.nan)
    per_scatterer[valid] = np.sqrt(radicand[valid])
    v_hat = lower_median(per_scatterer)
    logger.info("Estimated vehicle speed %.3f m/s", v_hat)
    return VelocityEstimate(v_hat=v_hat, per_scatterer=per_scatterer,
                            excluded=tuple(int(p) for p in negative))
