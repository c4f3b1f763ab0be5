"""Figure builders over the simulator's file outputs.

Everything here is read-only over its inputs and backend-independent:
figures are built with the object API (no pyplot, no global state), so
rendering the same files twice produces the same pixels.

Artists that tests or downstream tools need to find carry a gid:
"drift-mask", "failed-cells", "inflection-dots", "boundary:<curve_id>",
"drift-band", "oscillators", "centroid".
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from matplotlib.collections import PatchCollection
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle
from matplotlib.ticker import FuncFormatter

from .schema import (
    GridTable,
    ProfileTable,
    Snapshot,
    read_boundaries,
    read_grid,
    read_predicted,
    read_profiles,
    read_snapshot,
)

HEATMAP_FIELDS = (
    ("R_tilde", "order parameter"),
    ("Delta", "detuning"),
    ("amp_slope", "amplitude slope"),
)
INFLECTION_MIN_FRAC = 0.5


def _pi_formatter():
    def fmt(v, _pos):
        if v == 0:
            return "0"
        return f"{v / np.pi:.2g}π"

    return FuncFormatter(fmt)


def _edges(centers: np.ndarray) -> np.ndarray:
    # cell boundaries from cell centers, end cells mirrored
    if centers.size == 1:
        half = 0.5 if centers[0] == 0 else abs(centers[0]) * 0.5
        return np.array([centers[0] - half, centers[0] + half])
    mid = 0.5 * (centers[1:] + centers[:-1])
    first = centers[0] - (mid[0] - centers[0])
    last = centers[-1] + (centers[-1] - mid[-1])
    return np.concatenate([[first], mid, [last]])


def _cell_rects(grid: GridTable, mask: np.ndarray):
    be, de = _edges(grid.betas), _edges(grid.d0s)
    return [
        Rectangle((de[j], be[i]), de[j + 1] - de[j], be[i + 1] - be[i])
        for i, j in np.argwhere(mask)
    ]


def plot_heatmaps(
    grid_csv,
    boundaries_csv=None,
    cmap: str = "viridis",
    pi_axes: bool = True,
) -> Figure:
    """Aligned rasters of order parameter, detuning, and amplitude slope.

    Fully-drifting cells are blacked out, failed cells hatched, cells
    with a profile inflection dot-marked; boundary polylines are drawn
    over every panel when a boundaries CSV is given.
    """
    grid = read_grid(grid_csv)
    curves = read_boundaries(boundaries_csv) if boundaries_csv else {}

    fig = Figure(figsize=(12, 3.6), constrained_layout=True)
    axes = fig.subplots(1, 3, sharex=True, sharey=True)
    be, de = _edges(grid.betas), _edges(grid.d0s)
    blocked = grid.fully_drifting | grid.failed
    inflect = np.nan_to_num(grid.inflection_frac) >= INFLECTION_MIN_FRAC

    for ax, (attr, title) in zip(axes, HEATMAP_FIELDS):
        data = np.ma.masked_invalid(np.ma.masked_where(blocked, getattr(grid, attr)))
        mesh = ax.pcolormesh(de, be, data, cmap=cmap, shading="flat")
        fig.colorbar(mesh, ax=ax, shrink=0.9)

        drift = PatchCollection(
            _cell_rects(grid, grid.fully_drifting), facecolor="black", edgecolor="none"
        )
        drift.set_gid("drift-mask")
        ax.add_collection(drift)

        failed = PatchCollection(
            _cell_rects(grid, grid.failed),
            facecolor="white", edgecolor="0.4", hatch="////",
        )
        failed.set_gid("failed-cells")
        ax.add_collection(failed)

        if inflect.any():
            ii, jj = np.nonzero(inflect)
            dots = ax.scatter(
                grid.d0s[jj], grid.betas[ii], s=14, color="limegreen", zorder=3
            )
            dots.set_gid("inflection-dots")

        for cid in sorted(curves):
            pts = curves[cid]
            if pts.size == 0:
                continue
            (line,) = ax.plot(pts[:, 1], pts[:, 0], lw=1.0, color="white", alpha=0.9)
            line.set_gid(f"boundary:{cid}")

        ax.set_title(title)
        ax.set_xlabel("d0")
        if pi_axes:
            ax.yaxis.set_major_formatter(_pi_formatter())
    axes[0].set_ylabel("beta")
    alpha = grid.alpha / np.pi
    fig.suptitle(f"alpha = {alpha:.3g}π")
    return fig


def _drift_spans(profile: ProfileTable):
    """Contiguous K-intervals holding only drifting oscillators.

    Interval edges sit midway between neighboring oscillators; runs that
    touch an end of the coupling range extend to that end.
    """
    K, locked = profile.K, profile.locked
    if locked.all():
        return []
    if not locked.any():
        return [(float(K[0]), float(K[-1]))]
    spans = []
    n = K.size
    i = 0
    while i < n:
        if locked[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and not locked[j + 1]:
            j += 1
        lo = K[0] if i == 0 else 0.5 * (K[i - 1] + K[i])
        hi = K[-1] if j == n - 1 else 0.5 * (K[j] + K[j + 1])
        spans.append((float(lo), float(hi)))
        i = j + 1
    return spans


def plot_profiles(profiles_csv, predicted_csv, pi_axes: bool = True) -> Figure:
    """Measured phase and amplitude profiles with theory curves.

    Phases on the left axis (locked oscillators only), amplitudes on the
    right; the coupling ranges where the simulation drifts are shaded.
    """
    sim = read_profiles(profiles_csv)
    pred = read_predicted(predicted_csv)

    fig = Figure(figsize=(6.4, 4.2), constrained_layout=True)
    ax_phi = fig.subplots()
    ax_r = ax_phi.twinx()

    lk = sim.locked
    ax_phi.plot(
        sim.K[lk], sim.phi_star[lk], ".", ms=4, color="tab:blue", label="phase (sim)"
    )
    # nan phases on drifting rows split the theory curve into locked arcs
    phi_line = np.where(pred.locked, pred.phi_star, np.nan)
    ax_phi.plot(pred.K, phi_line, "-", color="tab:blue", lw=1.6, label="phase (theory)")

    ax_r.plot(sim.K, sim.r_star, ".", ms=4, color="tab:red", label="amplitude (sim)")
    ax_r.plot(pred.K, pred.r_star, "-", color="tab:red", lw=1.6, label="amplitude (theory)")

    for lo, hi in _drift_spans(sim):
        band = ax_phi.axvspan(lo, hi, color="0.82", zorder=0)
        band.set_gid("drift-band")

    ax_phi.set_xlabel("K")
    ax_phi.set_ylabel("stationary phase", color="tab:blue")
    ax_r.set_ylabel("stationary amplitude", color="tab:red")
    if pi_axes:
        ax_phi.yaxis.set_major_formatter(_pi_formatter())
    h1, l1 = ax_phi.get_legend_handles_labels()
    h2, l2 = ax_r.get_legend_handles_labels()
    ax_phi.legend(h1 + h2, l1 + l2, loc="best", fontsize=8)
    return fig


def plot_complex_plane(snapshot_csv, cmap: str = "YlOrRd") -> Figure:
    """Ensemble snapshot in the complex plane.

    Dot size and brightness both grow with the oscillator's coupling
    strength; the population centroid is marked with a red asterisk.
    """
    snap = read_snapshot(snapshot_csv)
    x = snap.r * np.cos(snap.theta)
    y = snap.r * np.sin(snap.theta)
    K = snap.K
    span = K.max() - K.min()
    sizes = np.full(K.size, 60.0) if span == 0 else 15.0 + 135.0 * (K - K.min()) / span

    fig = Figure(figsize=(5.2, 5.0), constrained_layout=True)
    ax = fig.subplots()
    phi = np.linspace(0, 2 * np.pi, 200)
    ax.plot(np.cos(phi), np.sin(phi), color="0.85", lw=0.8, zorder=0)
    pts = ax.scatter(x, y, s=sizes, c=K, cmap=cmap, edgecolor="0.3", lw=0.3)
    pts.set_gid("oscillators")
    fig.colorbar(pts, ax=ax, label="K", shrink=0.85)

    cx, cy = float(np.mean(x)), float(np.mean(y))
    (centroid,) = ax.plot(cx, cy, "*", ms=16, color="red", zorder=4)
    centroid.set_gid("centroid")

    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    return fig


FIGURE_KINDS = ("heatmap", "profiles", "complex_plane")


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: input files, kind, styling, output path."""

    kind: str
    inputs: tuple
    out: str | Path
    cmap: str | None = None
    pi_axes: bool = True

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"kind must be one of {FIGURE_KINDS}, got {self.kind!r}")
        want = {"heatmap": (1, 2), "profiles": (2, 2), "complex_plane": (1, 1)}[self.kind]
        if not want[0] <= len(self.inputs) <= want[1]:
            raise ValueError(f"{self.kind} takes {want[0]}..{want[1]} inputs")


def render(spec: FigureSpec) -> Path:
    """Build the requested figure and write it to spec.out."""
    if spec.kind == "heatmap":
        boundaries = spec.inputs[1] if len(spec.inputs) > 1 else None
        fig = plot_heatmaps(
            spec.inputs[0], boundaries,
            cmap=spec.cmap or "viridis", pi_axes=spec.pi_axes,
        )
    elif spec.kind == "profiles":
        fig = plot_profiles(spec.inputs[0], spec.inputs[1], pi_axes=spec.pi_axes)
    else:
        fig = plot_complex_plane(spec.inputs[0], cmap=spec.cmap or "YlOrRd")
    out = Path(spec.out)
    fig.savefig(out, dpi=150)
    return out
