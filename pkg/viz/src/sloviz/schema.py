"""Readers for the simulator's CSV outputs.

Each reader checks the header against the documented schema before
touching any row and reports a mismatch as an explicit column diff, so a
file produced by the wrong command (or a stale version) fails loudly
rather than plotting garbage.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

GRID_COLUMNS = (
    "alpha", "beta", "d0", "R_tilde", "Delta", "amp_slope",
    "inflection_frac", "state", "fully_drifting", "status",
)
BOUNDARY_COLUMNS = ("curve_id", "beta", "d0")
PROFILE_COLUMNS = ("K", "phi_star", "r_star", "locked")
PREDICTED_COLUMNS = ("K", "phi_star_pred", "r_star_pred", "locked_pred")
SNAPSHOT_COLUMNS = ("osc_id", "theta", "r", "K")


class SchemaError(ValueError):
    """Raised when a CSV header does not match the documented schema."""


def _check_header(found, expected, path):
    if tuple(found) == tuple(expected):
        return
    missing = [c for c in expected if c not in found]
    extra = [c for c in found if c not in expected]
    parts = [f"{path}: header does not match the documented schema"]
    if missing:
        parts.append("missing columns: " + ", ".join(missing))
    if extra:
        parts.append("unexpected columns: " + ", ".join(extra))
    if not missing and not extra:
        parts.append(
            "column order differs: expected "
            + ",".join(expected) + " got " + ",".join(found)
        )
    raise SchemaError("; ".join(parts))


def _rows(path, expected):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header "
                              + ",".join(expected)) from None
        _check_header(header, expected, path)
        for row in reader:
            if row:
                yield row


def _num(cell: str) -> float:
    return float(cell) if cell != "" else math.nan


@dataclass(frozen=True)
class GridTable:
    """One phase-plane grid, reshaped onto its (beta, d0) axes.

    Rasters are indexed [i_beta, i_d0]; text fields keep the same shape.
    Cells absent from the file hold nan / empty marks.
    """

    alpha: float
    betas: np.ndarray
    d0s: np.ndarray
    R_tilde: np.ndarray
    Delta: np.ndarray
    amp_slope: np.ndarray
    inflection_frac: np.ndarray
    state: np.ndarray
    fully_drifting: np.ndarray
    failed: np.ndarray


def read_grid(path) -> GridTable:
    """Parse a sweep grid CSV into axis-aligned rasters."""
    recs = []
    for row in _rows(path, GRID_COLUMNS):
        alpha, beta, d0 = float(row[0]), float(row[1]), float(row[2])
        recs.append((
            alpha, beta, d0, _num(row[3]), _num(row[4]), _num(row[5]),
            _num(row[6]), row[7], row[8] == "1", row[9],
        ))
    if not recs:
        raise SchemaError(f"{path}: no data rows")
    alpha = recs[0][0]
    betas = np.unique([r[1] for r in recs])
    d0s = np.unique([r[2] for r in recs])
    shape = (betas.size, d0s.size)
    R = np.full(shape, np.nan)
    D = np.full(shape, np.nan)
    S = np.full(shape, np.nan)
    I = np.full(shape, np.nan)
    state = np.full(shape, "", dtype=object)
    drift = np.zeros(shape, dtype=bool)
    failed = np.zeros(shape, dtype=bool)
    for r in recs:
        i = int(np.searchsorted(betas, r[1]))
        j = int(np.searchsorted(d0s, r[2]))
        R[i, j], D[i, j], S[i, j], I[i, j] = r[3], r[4], r[5], r[6]
        state[i, j] = r[7]
        drift[i, j] = r[8]
        failed[i, j] = r[9] != "ok"
    return GridTable(
        alpha=alpha, betas=betas, d0s=d0s, R_tilde=R, Delta=D,
        amp_slope=S, inflection_frac=I, state=state,
        fully_drifting=drift, failed=failed,
    )


def read_boundaries(path) -> dict[str, np.ndarray]:
    """Parse boundary polylines into curve_id -> (n, 2) arrays of
    (beta, d0) points, preserving file order within each curve."""
    curves: dict[str, list] = {}
    for row in _rows(path, BOUNDARY_COLUMNS):
        curves.setdefault(row[0], []).append((float(row[1]), float(row[2])))
    return {cid: np.asarray(pts, dtype=float) for cid, pts in curves.items()}


@dataclass(frozen=True)
class ProfileTable:
    """Per-oscillator stationary profile, sorted by coupling strength."""

    K: np.ndarray
    phi_star: np.ndarray
    r_star: np.ndarray
    locked: np.ndarray


def _read_profile(path, columns) -> ProfileTable:
    rows = [tuple(map(_num, row)) for row in _rows(path, columns)]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    a = np.asarray(rows, dtype=float)
    order = np.argsort(a[:, 0], kind="stable")
    a = a[order]
    return ProfileTable(
        K=a[:, 0], phi_star=a[:, 1], r_star=a[:, 2],
        locked=a[:, 3] > 0.5,
    )


def read_profiles(path) -> ProfileTable:
    """Parse a measured profile CSV (simulation output)."""
    return _read_profile(path, PROFILE_COLUMNS)


def read_predicted(path) -> ProfileTable:
    """Parse a predicted profile CSV (self-consistency output)."""
    return _read_profile(path, PREDICTED_COLUMNS)


@dataclass(frozen=True)
class Snapshot:
    """One recorded instant of the ensemble in polar form."""

    theta: np.ndarray
    r: np.ndarray
    K: np.ndarray


def read_snapshot(path) -> Snapshot:
    """Parse a single-instant ensemble snapshot CSV."""
    rows = [(float(r[1]), float(r[2]), float(r[3]))
            for r in _rows(path, SNAPSHOT_COLUMNS)]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    a = np.asarray(rows, dtype=float)
    return Snapshot(theta=a[:, 0], r=a[:, 1], K=a[:, 2])
