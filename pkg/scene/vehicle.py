import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

logger = logging.getLogger(__name__)

VEHICLE_COLUMNS = ['x_m', 'y_m', 'z_m', 'rcs_share']


@dataclass(frozen=True)
class Scatterer:
    """A dominant point scatterer, offset in metres from the vehicle reference point."""
    offset: tuple
    rcs_m2: float


def vehicle_path(cfg=None):
    if cfg is not None and cfg.vehicle_file:
        return Path(cfg.vehicle_file)
    return Path(settings.ISAR_VEHICLE_FILE)


def load_vehicle(path, total_rcs_m2):
    """
    Read a vehicle model CSV (header ``x_m,y_m,z_m,rcs_share``). Shares are
    normalised so the scatterer RCS values add up to ``total_rcs_m2``.
    """
    path = Path(path)
    try:
        table = pd.read_csv(path, comment='#')
    except FileNotFoundError as exc:
        raise ImproperlyConfigured(f"vehicle model {path} does not exist") from exc

    missing = [c for c in VEHICLE_COLUMNS if c not in table.columns]
    if missing:
        raise ImproperlyConfigured(f"vehicle model {path} lacks column(s): {', '.join(missing)}")
    if table.empty:
        raise ImproperlyConfigured(f"vehicle model {path} has no scatterers")

    shares = table['rcs_share'].to_numpy(dtype=float)
    if np.any(shares <= 0) or not np.all(np.isfinite(shares)):
        raise ImproperlyConfigured(f"vehicle model {path}: rcs_share must be positive")
    rcs = shares / shares.sum() * total_rcs_m2

    offsets = table[['x_m', 'y_m', 'z_m']].to_numpy(dtype=float)
    scatterers = [Scatterer(offset=tuple(o), rcs_m2=float(r)) for o, r in zip(offsets, rcs)]
    logger.debug("Loaded %d scatterers from %s", len(scatterers), path)
    return scatterers


def default_vehicle(cfg=None):
    """The packaged 22-scatterer sedan, with the RCS of ``cfg`` (20 dBsm by default)."""
    total = cfg.total_rcs_m2 if cfg is not None else 100.0
    return load_vehicle(vehicle_path(cfg), total)


def offsets_array(scatterers):
    return np.array([s.offset for s in scatterers], dtype=float).reshape(-1, 3)


def rcs_array(scatterers):
    return np.array([s.rcs_m2 for s in scatterers], dtype=float)
