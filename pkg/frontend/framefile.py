"""
Frame file formats.

Binary layout, all little-endian:
    header  <4s I I I d>   magic b'GISR', version, M, K, sigma_nc2
    table   M x <Q I i>    byte offset of the frame payload, sample count, k0
    payload                interleaved f64 (re, im) per sample

The CSV fallback has one row per sample with columns m, k, re, im.
"""
import logging
import struct
from pathlib import Path

import numpy as np
import pandas as pd

from frontend.synthesis import FrameSamples
from runs.artifacts import atomic_path, write_csv

logger = logging.getLogger(__name__)

MAGIC = b'GISR'
VERSION = 1
HEADER = struct.Struct('<4sIIId')
ENTRY = struct.Struct('<QIi')


class FrameFileError(Exception):
    """Raised for unreadable or malformed frame files."""


def write_frames_bin(path, frames, training_len):
    offset = HEADER.size + ENTRY.size * len(frames)
    table = []
    for frame in frames:
        table.append(ENTRY.pack(offset, len(frame.y), frame.k0))
        offset += 16 * len(frame.y)
    sigma_nc2 = frames[0].sigma_nc2 if frames else 0.0

    with atomic_path(path) as tmp, open(tmp, 'wb') as handle:
        handle.write(HEADER.pack(MAGIC, VERSION, len(frames), training_len, sigma_nc2))
        handle.write(b''.join(table))
        for frame in frames:
            handle.write(frame.y.astype('<c16').tobytes())
    logger.info("Wrote %d frames to %s", len(frames), path)
    return Path(path)


def read_frames_bin(path):
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise FrameFileError(f"{path}: truncated header")
    magic, version, count, training_len, sigma_nc2 = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FrameFileError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FrameFileError(f"{path}: unsupported version {version}")

    frames = []
    for m in range(count):
        offset, length, k0 = ENTRY.unpack_from(data, HEADER.size + m * ENTRY.size)
        end = offset + 16 * length
        if end > len(data):
            raise FrameFileError(f"{path}: frame {m} runs past the end of the file")
        y = np.frombuffer(data, dtype='<c16', count=length, offset=offset).astype(np.complex128)
        frames.append(FrameSamples(m=m, k0=k0, y=y, sigma_nc2=sigma_nc2))
    return frames, training_len


def write_frames_csv(path, frames):
    parts = []
    for frame in frames:
        parts.append(pd.DataFrame({
            'm': frame.m,
            'k': np.arange(frame.k0, frame.k0 + len(frame.y)),
            're': frame.y.real,
            'im': frame.y.imag,
        }))
    table = pd.concat(parts, ignore_index=True) if parts else pd.DataFrame(columns=['m', 'k', 're', 'im'])
    write_csv(path, table)
    logger.info("Wrote %d frames to %s", len(frames), path)
    return Path(path)


def read_frames_csv(path, sigma_nc2):
    try:
        table = pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as exc:
        raise FrameFileError(f"{path}: {exc}") from exc
    missing = {'m', 'k', 're', 'im'} - set(table.columns)
    if missing:
        raise FrameFileError(f"{path}: missing column(s) {', '.join(sorted(missing))}")

    frames = []
    for m, rows in table.groupby('m', sort=True):
        k = rows['k'].to_numpy()
        if np.any(np.diff(k) != 1):
            raise FrameFileError(f"{path}: frame {m} samples are not contiguous")
        y = rows['re'].to_numpy(dtype=float) + 1j * rows['im'].to_numpy(dtype=float)
        frames.append(FrameSamples(m=int(m), k0=int(k[0]), y=y, sigma_nc2=sigma_nc2))
    if [f.m for f in frames] != list(range(len(frames))):
        raise FrameFileError(f"{path}: frame indices are not 0..M-1")
    return frames


def write_frames(directory, frames, training_len, fmt='bin'):
    directory = Path(directory)
    if fmt == 'csv':
        return write_frames_csv(directory / 'frames.csv', frames)
    return write_frames_bin(directory / 'frames.bin', frames, training_len)


def read_frames(path, sigma_nc2=None):
    """Load frames from either format, choosing by file suffix."""
    path = Path(path)
    if not path.exists():
        raise FrameFileError(f"{path} does not exist")
    if path.suffix == '.csv':
        return read_frames_csv(path, sigma_nc2 or 0.0)
    frames, _ = read_frames_bin(path)
    return frames
