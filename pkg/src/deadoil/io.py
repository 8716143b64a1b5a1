"""Artifact writers: per-level field CSVs and the run manifest."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .mesh import Grid2D, write_field


def saved_levels(N: int, stride: int) -> range:
    return range(0, N + 1, stride)


def write_levels(outdir, grid: Grid2D, pattern: str, levels, stride: int = 1) -> list[Path]:
    """Write ``levels[n]`` for ``n = 0, stride, 2 stride, ...`` as ``pattern % n``."""
    outdir = Path(outdir)
    paths = []
    for n in range(0, len(levels), stride):
        path = outdir / (pattern % n)
        write_field(path, grid, levels[n])
        paths.append(path)
    return paths


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def write_manifest(outdir, subcommand: str, values: dict, grid: Grid2D, tg,
                   artifacts: list[Path], extra: dict | None = None) -> Path:
    """Record the resolved config, discretization metadata and artifact checksums.

    The file has no timestamps or absolute paths, so identical runs give
    identical manifests.
    """
    outdir = Path(outdir)
    body = {
        "subcommand": subcommand,
        "config": _plain(values),
        "grid": {"nx": grid.nx, "ny": grid.ny, "lx": grid.lx, "ly": grid.ly,
                 "hx": grid.hx, "hy": grid.hy, "interior_nodes": grid.size},
        "time": {"T": tg.T, "N": tg.N, "tau": tg.tau},
        "control_indexing": "f[n] drives the step from level n to n+1; "
                            "cost level n pairs with f[n-1]",
        "artifacts": {p.name: sha256(p) for p in sorted(artifacts)},
    }
    if extra:
        body.update(_plain(extra))
    path = outdir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(body, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
