import io
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from PIL import Image

from runs.artifacts import write_bytes, write_csv, write_json

logger = logging.getLogger(__name__)

PGM_MAX = 65535


def to_gray16(grid):
    """Magnitudes mapped linearly onto 0..65535 by the grid maximum."""
    grid = np.asarray(grid, dtype=float)
    peak = grid.max() if grid.size else 0.0
    if peak <= 0:
        return np.zeros(grid.shape, dtype=np.int32)
    return np.rint(grid / peak * PGM_MAX).astype(np.int32)


def pgm_bytes(grid):
    """Binary 16-bit PGM (P5, maxval 65535), rows are range bins."""
    buffer = io.BytesIO()
    Image.fromarray(to_gray16(grid)).save(buffer, format='PPM')
    return buffer.getvalue()


def write_pgm(path, image):
    return write_bytes(path, pgm_bytes(image.grid))


def write_magnitudes(path, image):
    return write_csv(path, pd.DataFrame(image.grid), header=False)


def axes_payload(image):
    return {
        'delta_r': float(image.delta_r),
        'delta_cr': float(image.delta_cr),
        'n_r': int(image.n_r),
        'n_cr': int(image.n_cr),
        'flipped': bool(image.flipped),
    }


def write_range_profile(path, profile):
    table = pd.DataFrame({
        'range_m': profile.range_axis(),
        're': profile.bins.real,
        'im': profile.bins.imag,
        'magnitude': np.abs(profile.bins),
    })
    return write_csv(path, table)


def write_image_artifacts(directory, image, profile=None):
    """
    image.pgm and image_flipped.pgm, image.csv (raw magnitudes of ``image``),
    axes.json, and range_profile.csv when a profile is given.
    """
    directory = Path(directory)
    original = image.flip() if image.flipped else image
    paths = {
        'image_pgm': write_pgm(directory / 'image.pgm', original),
        'image_flipped_pgm': write_pgm(directory / 'image_flipped.pgm', original.flip()),
        'image_csv': write_magnitudes(directory / 'image.csv', image),
        'axes_json': write_json(directory / 'axes.json', axes_payload(image)),
    }
    if profile is not None:
        paths['range_profile_csv'] = write_range_profile(directory / 'range_profile.csv', profile)
    logger.info("Image artifacts written to %s", directory)
    return paths
