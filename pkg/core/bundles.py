"""Run bundle writer: CSV/JSON artifacts plus a manifest with hashes."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from core.utils import format_float, version_string


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as f:
        for chunk in iter(lambda: f.read(8192), b""):
            h.update(chunk)
    return h.hexdigest()


def _plain(value: Any) -> Any:
    """JSON-ready copy: numpy scalars and arrays become Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if np.isfinite(v) else None
    if isinstance(value, np.bool_):
        return bool(value)
    return value


class RunBundle:
    """Collects the artifacts of one CLI run and writes the manifest last."""

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.artifacts: List[Path] = []

    def add(self, path: Path) -> Path:
        path = Path(path)
        if path not in self.artifacts:
            self.artifacts.append(path)
        return path

    def write_json(self, name: str, data: Dict[str, Any]) -> Path:
        path = self.out_dir / name
        with path.open("w", encoding="utf-8") as f:
            json.dump(_plain(data), f, indent=2, sort_keys=True)
            f.write("\n")
        return self.add(path)

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self.out_dir / name
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(list(header))
            for row in rows:
                writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
        return self.add(path)

    def write_manifest(self, command: str, config: Dict[str, Any], seed: int) -> Path:
        """Manifest with resolved config, seed, version and every artifact's hash."""
        manifest = {
            "command": command,
            "seed": seed,
            "version": version_string(),
            "config": _plain(config),
            "artifacts": [
                {"path": p.name, "sha256": _sha256_file(p)} for p in sorted(self.artifacts, key=lambda p: p.name)
            ],
        }
        path = self.out_dir / "manifest.json"
        with path.open("w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
            f.write("\n")
        return path
