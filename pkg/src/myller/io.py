"""Trajectory files: CSV (and a JSON mirror) with one pose per row."""
from __future__ import annotations

import csv
import json
import warnings
from pathlib import Path

import numpy as np

from .model import FRAME_KINDS, FrameTrajectory

COLUMNS = ("s", "rx", "ry", "rz", "e1x", "e1y", "e1z",
           "e2x", "e2y", "e2z", "e3x", "e3y", "e3z")

WARN_TOL = 1e-6
ERROR_TOL = 1e-3


class TrajectoryFormatError(ValueError):
    pass


class TrajectoryWarning(UserWarning):
    pass


def _rows(traj):
    flat = np.column_stack([traj.grid, traj.r, traj.frames.reshape(-1, 9)])
    return [[float(x) for x in row] for row in flat]


def export_trajectory(traj: FrameTrajectory, format: str, path) -> Path:
    """Write `traj` as CSV (header + one row per grid point) or JSON."""
    path = Path(path)
    rows = _rows(traj)
    if format == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COLUMNS)
            writer.writerows([[repr(x) for x in row] for row in rows])
    elif format == "json":
        doc = {"frame_kind": traj.frame_kind,
               "samples": [dict(zip(COLUMNS, row)) for row in rows]}
        path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown trajectory format {format!r}")
    return path


def _check_frames(frames, grid):
    gram = frames @ np.swapaxes(frames, 1, 2)
    err = np.max(np.abs(gram - np.eye(3)), axis=(1, 2))
    err = np.maximum(err, np.abs(np.linalg.det(frames) - 1.0))
    worst = int(np.argmax(err)) if len(err) else 0
    if len(err) and err[worst] > ERROR_TOL:
        raise TrajectoryFormatError(
            f"pose at s = {grid[worst]:.6g} is not orthonormal (deviation {err[worst]:.3g})")
    if len(err) and err[worst] > WARN_TOL:
        warnings.warn(f"{int(np.sum(err > WARN_TOL))} pose(s) deviate from orthonormality "
                      f"by up to {err[worst]:.3g}", TrajectoryWarning, stacklevel=3)


def ingest_trajectory(path, frame_kind: str = "darboux") -> FrameTrajectory:
    """Read a trajectory written by `export_trajectory`. Frames are not
    re-orthonormalized: deviations above 1e-6 warn, above 1e-3 raise."""
    if frame_kind not in FRAME_KINDS:
        raise ValueError(f"unknown frame kind {frame_kind!r}")
    path = Path(path)
    if path.suffix.lower() == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
        try:
            data = np.array([[rec[c] for c in COLUMNS] for rec in doc["samples"]],
                            dtype=float)
        except (KeyError, TypeError) as exc:
            raise TrajectoryFormatError(f"malformed trajectory JSON: {exc}") from exc
    else:
        rows = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != COLUMNS:
                raise TrajectoryFormatError(f"line 1: header must be {','.join(COLUMNS)}")
            for row in reader:
                if not row:
                    continue
                if len(row) != len(COLUMNS):
                    raise TrajectoryFormatError(
                        f"line {reader.line_num}: expected {len(COLUMNS)} columns, "
                        f"got {len(row)}")
                try:
                    rows.append([float(x) for x in row])
                except ValueError as exc:
                    raise TrajectoryFormatError(f"line {reader.line_num}: {exc}") from None
        data = np.array(rows, dtype=float).reshape(-1, len(COLUMNS))
    if not np.all(np.isfinite(data)):
        raise TrajectoryFormatError("non-finite values in trajectory")
    grid, r, frames = data[:, 0], data[:, 1:4], data[:, 4:].reshape(-1, 3, 3)
    _check_frames(frames, grid)
    try:
        return FrameTrajectory(grid, r, frames, frame_kind)
    except ValueError as exc:
        raise TrajectoryFormatError(str(exc)) from None
