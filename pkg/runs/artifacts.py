"""
Atomic artifact writers shared by every command.

Each writer renders into a temporary file in the destination directory and
moves it into place with os.replace, so readers never see a partial file.
"""
import io
import json
import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path

logger = logging.getLogger(__name__)


@contextmanager
def atomic_path(path):
    """Yield a temporary path next to ``path``; rename it over ``path`` on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f'.{path.name}.', suffix='.tmp', dir=path.parent)
    os.close(fd)
    try:
        yield Path(tmp_name)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.debug("Wrote %s", path)


def write_bytes(path, data):
    with atomic_path(path) as tmp:
        tmp.write_bytes(data)
    return Path(path)


def write_text(path, text):
    return write_bytes(path, text.encode('utf-8'))


def write_json(path, payload):
    """Dump with insertion key order and a trailing newline, no timestamps."""
    return write_text(path, json.dumps(payload, indent=2) + '\n')


def write_csv(path, frame, **kwargs):
    """Write a pandas DataFrame as CSV with '\n' line endings."""
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator='\n', **kwargs)
    return write_text(path, buffer.getvalue())
