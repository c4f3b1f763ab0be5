"""Figure rendering for oscillator-ensemble simulation outputs."""

from .figures import (
    FigureSpec,
    plot_complex_plane,
    plot_heatmaps,
    plot_profiles,
    render,
)
from .schema import (
    GridTable,
    ProfileTable,
    SchemaError,
    Snapshot,
    read_boundaries,
    read_grid,
    read_predicted,
    read_profiles,
    read_snapshot,
)

__all__ = [
    "FigureSpec",
    "GridTable",
    "ProfileTable",
    "SchemaError",
    "Snapshot",
    "plot_complex_plane",
    "plot_heatmaps",
    "plot_profiles",
    "read_boundaries",
    "read_grid",
    "read_predicted",
    "read_profiles",
    "read_snapshot",
    "render",
]
