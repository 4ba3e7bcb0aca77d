"""
Output plumbing: atomic file writes and stdout fallback.
"""

import logging
import os
import sys
from typing import Optional

logger = logging.getLogger(__name__)


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def write_atomic(path: str, data: bytes) -> None:
    """Write to a temporary sibling then rename over path."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)
    logger.debug("wrote %d bytes to %s", len(data), path)


def write_text(path: str, text: str) -> None:
    write_atomic(path, text.encode("utf-8"))


def emit(text: str, path: Optional[str] = None) -> None:
    """Send text to path when given, else to stdout."""
    if path:
        write_text(path, text)
        return
    sys.stdout.write(text)
    sys.stdout.flush()
