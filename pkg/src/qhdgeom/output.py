"""Trajectory and report writers.

Numbers go out with 17 significant digits so every double reads back exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .dynamics import Trajectory

TRAJ_COLUMNS = ["param", "x0", "x1", "x2", "x3", "y0", "y1", "y2", "y3"]


def fmt(v) -> str:
    return format(float(v), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_trajectory(traj: Trajectory, path, format: str = "csv") -> list[Path]:
    """Write ``traj``; returns the files created.

    ``csv`` writes the sample table plus a ``.json`` sidecar holding status,
    flavor and diagnostics.  ``json`` writes everything into one file.
    """
    path = Path(path)
    meta = {"status": traj.status, "flavor": traj.flavor, "n_samples": len(traj), "info": traj.info}
    if format == "json":
        doc = dict(meta, columns=TRAJ_COLUMNS,
                   samples=np.column_stack([traj.param, traj.x, traj.y]).tolist() if len(traj) else [])
        dump_json(doc, path)
        return [path]
    if format != "csv":
        raise ValueError(f"unknown trajectory format {format!r}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJ_COLUMNS)
        for p, x, y in zip(traj.param, traj.x, traj.y):
            w.writerow([fmt(p), *map(fmt, x), *map(fmt, y)])
    sidecar = path.with_suffix(".json")
    dump_json(meta, sidecar)
    return [path, sidecar]


def read_trajectory(path) -> Trajectory:
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        data = np.array(doc["samples"], dtype=float).reshape(-1, 9)
        meta = doc
    else:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if rows[0] != TRAJ_COLUMNS:
            raise ValueError(f"{path}: unexpected header {rows[0]}")
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, 9)
        side = path.with_suffix(".json")
        meta = json.loads(side.read_text()) if side.exists() else {}
    return Trajectory(data[:, 0], data[:, 1:5], data[:, 5:9],
                      status=meta.get("status", "completed"),
                      flavor=meta.get("flavor", "kropina"),
                      info=meta.get("info", {}))
