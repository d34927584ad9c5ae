from __future__ import annotations

import logging
import subprocess
from pathlib import Path
from typing import List, Optional

import numpy as np

from config import VERSION


def spawn_rngs(seed: Optional[int], count: int) -> List[np.random.Generator]:
    """Independent generator streams derived from one master seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def version_string() -> str:
    """git-describe style version, falling back to the package version."""
    root = Path(__file__).resolve().parent.parent
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=root,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except Exception as exc:
        logging.debug("git describe unavailable: %s", exc)
    return f"v{VERSION}"


def format_float(value: float) -> str:
    """Stable text form for CSV cells."""
    return format(float(value), ".12g")
