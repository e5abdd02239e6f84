"""Deterministic CSV and manifest writing.

Floats are rendered with Python's shortest round-trip repr, so identical
runs produce byte-identical files; manifests carry no timestamps for the
same reason. Infinities render as 'inf' (uncertainty divergences are data,
not errors).
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def format_value(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return repr(float(x))


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines.extend(",".join(format_value(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path: Path, manifest: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


UNITS_NOTE = {
    "angles": "degrees in CSV columns, radians internally",
    "frequencies": "MHz (ordinary frequency) in CSV columns, rad/us internally",
    "fields": "mT",
    "times": "us",
    "uncertainty": "rad (delta_phi) or MHz (delta_lambda)",
}
