"""CSV emission with a provenance line, and reading the rows back."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .. import __version__


def provenance_line(config_hash: str, seed: int) -> str:
    return f"# adaptnet {__version__} config_sha256={config_hash} seed={seed}"


def _fmt(v: Any) -> str:
    # repr of a Python float round-trips exactly; numpy scalars are unwrapped first
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]],
              provenance: str) -> Path:
    with open(path, "w", newline="") as fh:
        fh.write(provenance + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path: Path) -> tuple[str, list[dict[str, str]]]:
    """(provenance comment, rows as dicts) of a file written by :func:`write_csv`."""
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        return first, list(csv.DictReader(fh))


def write_summary(path: Path, summary: dict[str, Any]) -> Path:
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return path
