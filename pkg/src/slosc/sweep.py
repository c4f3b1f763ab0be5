"""Parameter sweeps over the coupling-function plane.

A sweep walks a (beta, d0) grid at fixed alpha and produces one record
per cell, either by simulating an ensemble for several seeds or by
solving the mean-field self-consistency directly.  Cells are evaluated
independently with per-cell derived seeds, so the result is identical
under any evaluation order.  Boundary overlays for the phase diagrams
are extracted separately by root-finding fixed relations of the
self-consistent solution along grid lines.
"""

from __future__ import annotations

import json
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import CouplingSet, ModelParams, NetworkGraph
from .integrate import (
    FullNetworkSystem,
    IntegrationError,
    IntegrationPlan,
    MeanFieldSystem,
    init_state,
    integrate,
)
from .networks import degrees_to_couplings
from .observables import amplitude_slope, detect_locked, order_series, stationary_profiles
from .theory import classify_state, locking_range, predict_profiles, solve_self_consistency

__all__ = [
    "CellRecord",
    "SweepSpec",
    "SweepGrid",
    "SweepResult",
    "cell_seed",
    "run_point",
    "theory_point",
    "run_grid",
    "export_grid",
    "load_grid",
    "boundary_curves",
    "export_boundaries",
    "GRID_HEADER",
    "BOUNDARY_CURVE_IDS",
]

GRID_HEADER = "alpha,beta,d0,R_tilde,Delta,amp_slope,inflection_frac,state,fully_drifting,status"

# A cell counts as fully drifting when fewer than 1% of oscillators lock.
DRIFTING_FRACTION = 0.01

_MODES = ("simulate", "theory", "both")


def _code_version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:
        return "unknown"


@dataclass(frozen=True)
class CellRecord:
    """Aggregated outcome of one (beta, d0) cell."""

    beta: float
    d0: float
    R_tilde: float
    Delta: float
    amp_slope: float
    inflection_frac: float
    state: str
    fully_drifting: bool
    status: str  # "ok" or "failed"
    failed_seeds: tuple[int, ...] = ()


@dataclass(frozen=True)
class SweepSpec:
    """Grid description: axis ranges are (lo, hi, n_steps) inclusive."""

    alpha: float
    source: CouplingSet | NetworkGraph
    beta_range: tuple[float, float, int] = (0.0, 0.49 * math.pi, 41)
    d0_range: tuple[float, float, int] = (-2.0, 2.0, 41)
    seeds: tuple[int, ...] = (0,)
    mode: str = "both"
    plan: IntegrationPlan = field(default_factory=IntegrationPlan)
    lambda_: float = 1.0
    omega: float = math.pi
    S: float = 1.0

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        lo, hi, n = self.beta_range
        if not (0.0 <= lo <= hi < math.pi / 2):
            raise ValueError("beta range must lie inside [0, pi/2)")
        if n < 2 or self.d0_range[2] < 2:
            raise ValueError("each axis needs at least 2 steps")
        if self.d0_range[0] > self.d0_range[1]:
            raise ValueError("d0 range is reversed")
        if self.mode != "theory" and len(self.seeds) == 0:
            raise ValueError("simulation sweeps need at least one seed")
        if not isinstance(self.source, (CouplingSet, NetworkGraph)):
            raise TypeError("source must be a CouplingSet or a NetworkGraph")

    @property
    def betas(self) -> np.ndarray:
        lo, hi, n = self.beta_range
        return np.linspace(lo, hi, n)

    @property
    def d0s(self) -> np.ndarray:
        lo, hi, n = self.d0_range
        return np.linspace(lo, hi, n)

    def params_at(self, beta: float, d0: float) -> ModelParams:
        return ModelParams(
            lambda_=self.lambda_,
            omega=self.omega,
            alpha=self.alpha,
            beta=float(beta),
            d0=float(d0),
            S=self.S,
            N=_source_size(self.source),
        )


@dataclass(frozen=True)
class SweepGrid:
    """Row-major cell records over betas x d0s plus run metadata."""

    alpha: float
    betas: np.ndarray
    d0s: np.ndarray
    cells: tuple[CellRecord, ...]
    metadata: dict

    def __post_init__(self):
        if len(self.cells) != self.betas.size * self.d0s.size:
            raise ValueError("cell count does not match the grid shape")

    def cell(self, i_beta: int, i_d0: int) -> CellRecord:
        return self.cells[i_beta * self.d0s.size + i_d0]

    def raster(self, field_name: str) -> np.ndarray:
        """2-D array (n_beta, n_d0) of one numeric cell field."""
        vals = [getattr(c, field_name) for c in self.cells]
        return np.asarray(vals, dtype=float).reshape(self.betas.size, self.d0s.size)


@dataclass(frozen=True)
class SweepResult:
    sim: SweepGrid | None
    theory: SweepGrid | None


def _source_size(source) -> int:
    return source.n if isinstance(source, NetworkGraph) else len(source)


def _source_couplings(source) -> CouplingSet:
    if isinstance(source, NetworkGraph):
        return degrees_to_couplings(source)
    return source


def _source_system(params: ModelParams, source):
    if isinstance(source, NetworkGraph):
        return FullNetworkSystem(params, source)
    return MeanFieldSystem(params, source)


def _source_description(source) -> str:
    if isinstance(source, NetworkGraph):
        return f"network n={source.n} edges={int(source.adjacency.sum()) // 2}"
    K = source.K
    return f"couplings n={K.size} min={K.min():.6g} max={K.max():.6g}"


def cell_seed(rep_seed: int, i_beta: int, i_d0: int) -> int:
    """Stable per-cell seed: any evaluation schedule sees the same value."""
    ss = np.random.SeedSequence(entropy=int(rep_seed), spawn_key=(int(i_beta), int(i_d0)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _failed_cell(beta, d0, status="failed", failed_seeds=()) -> CellRecord:
    return CellRecord(
        beta=float(beta),
        d0=float(d0),
        R_tilde=math.nan,
        Delta=math.nan,
        amp_slope=math.nan,
        inflection_frac=math.nan,
        state="",
        fully_drifting=False,
        status=status,
        failed_seeds=tuple(failed_seeds),
    )


def run_point(
    params: ModelParams,
    source: CouplingSet | NetworkGraph,
    seeds,
    plan: IntegrationPlan,
) -> CellRecord:
    """Simulate one parameter point for every seed and aggregate.

    Any integration failure marks the whole cell failed and reports the
    offending seeds.
    """
    couplings = _source_couplings(source)
    system = _source_system(params, source)
    R_vals, Delta_vals, slopes, inflections, labels, locked_fracs = [], [], [], [], [], []
    failed = []
    for seed in seeds:
        try:
            traj = integrate(init_state(params, seed), system, plan.with_seed(seed))
        except IntegrationError:
            failed.append(int(seed))
            continue
        series = order_series(traj, params)
        part = detect_locked(traj, series)
        profile = stationary_profiles(part, couplings)
        slope, inflection = amplitude_slope(profile)
        R_vals.append(series.R_mean)
        Delta_vals.append(series.Delta)
        slopes.append(slope)
        inflections.append(bool(inflection))
        locked_fracs.append(part.locked_fraction)
        if not series.incoherent:
            labels.append(str(classify_state(series.R_mean, series.Delta, params, couplings)))
    if failed:
        return _failed_cell(params.beta, params.d0, failed_seeds=failed)
    state = ""
    if labels:
        counts = Counter(labels)
        top = max(counts.values())
        state = sorted(k for k, v in counts.items() if v == top)[0]
    with np.errstate(invalid="ignore"):
        mean_delta = float(np.nanmean(Delta_vals)) if not np.all(np.isnan(Delta_vals)) else math.nan
        mean_slope = float(np.nanmean(slopes)) if not np.all(np.isnan(slopes)) else math.nan
    return CellRecord(
        beta=params.beta,
        d0=params.d0,
        R_tilde=float(np.mean(R_vals)),
        Delta=mean_delta,
        amp_slope=mean_slope,
        inflection_frac=float(np.mean(inflections)),
        state=state,
        fully_drifting=bool(np.mean(locked_fracs) < DRIFTING_FRACTION),
        status="ok",
        failed_seeds=(),
    )


def theory_point(params: ModelParams, couplings: CouplingSet) -> CellRecord:
    """Self-consistency solution of one parameter point as a cell record.

    The trivial field (incoherent branch) is a legitimate answer: R=0,
    undefined detuning, fully drifting.  A solver failure on the
    synchronized branch marks the cell failed.
    """
    sol = solve_self_consistency(params, couplings)
    if sol.branch == "incoherent branch":
        return CellRecord(
            beta=params.beta,
            d0=params.d0,
            R_tilde=0.0,
            Delta=math.nan,
            amp_slope=math.nan,
            inflection_frac=math.nan,
            state="",
            fully_drifting=True,
            status="ok",
        )
    if not sol.converged:
        return _failed_cell(params.beta, params.d0)
    profile = predict_profiles(sol.R_tilde, sol.Delta, params, couplings)
    locked_rows = profile[profile[:, 3] == 1.0][:, :3]
    slope, inflection = amplitude_slope(locked_rows)
    locked_frac = float(np.mean(profile[:, 3]))
    label = str(classify_state(sol.R_tilde, sol.Delta, params, couplings))
    return CellRecord(
        beta=params.beta,
        d0=params.d0,
        R_tilde=sol.R_tilde,
        Delta=sol.Delta,
        amp_slope=slope,
        inflection_frac=1.0 if inflection else 0.0,
        state=label,
        fully_drifting=locked_frac < DRIFTING_FRACTION,
        status="ok",
    )


def _grid_metadata(spec: SweepSpec, flavor: str, wall_time: float) -> dict:
    plan = spec.plan
    return {
        "alpha": spec.alpha,
        "mode": flavor,
        "beta_range": list(spec.beta_range),
        "d0_range": list(spec.d0_range),
        "seeds": [int(s) for s in spec.seeds],
        "plan": {
            "dt": plan.dt,
            "t_transient": plan.t_transient,
            "t_measure": plan.t_measure,
            "record_stride": plan.record_stride,
            "seed": plan.seed,
        },
        "source": _source_description(spec.source),
        "lambda": spec.lambda_,
        "omega": spec.omega,
        "S": spec.S,
        "code_version": _code_version(),
        "wall_time_s": wall_time,
    }


def _sim_cell_task(spec: SweepSpec, i_b: int, i_d: int) -> CellRecord:
    params = spec.params_at(float(spec.betas[i_b]), float(spec.d0s[i_d]))
    seeds = [cell_seed(s, i_b, i_d) for s in spec.seeds]
    return run_point(params, spec.source, seeds, spec.plan)


def _theory_cell_task(spec: SweepSpec, i_b: int, i_d: int) -> CellRecord:
    params = spec.params_at(float(spec.betas[i_b]), float(spec.d0s[i_d]))
    return theory_point(params, _source_couplings(spec.source))


def _map_cells(task, spec: SweepSpec, workers: int) -> list[CellRecord]:
    # results are gathered in submission (row-major) order, so the grid is
    # identical for any worker count or completion schedule
    index = [(i_b, i_d) for i_b in range(len(spec.betas)) for i_d in range(len(spec.d0s))]
    if workers == 1:
        return [task(spec, i_b, i_d) for i_b, i_d in index]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(task, spec, i_b, i_d) for i_b, i_d in index]
        return [f.result() for f in futures]


def run_grid(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Evaluate the whole grid in the requested mode(s).

    Cells are independent; workers > 1 fans them out to a process pool.
    Per-cell seed derivation keeps the aggregate identical either way.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    betas, d0s = spec.betas, spec.d0s
    sim_grid = theory_grid = None
    if spec.mode in ("simulate", "both"):
        t0 = time.monotonic()
        cells = _map_cells(_sim_cell_task, spec, workers)
        sim_grid = SweepGrid(
            alpha=spec.alpha,
            betas=betas,
            d0s=d0s,
            cells=tuple(cells),
            metadata=_grid_metadata(spec, "simulate", time.monotonic() - t0),
        )
    if spec.mode in ("theory", "both"):
        t0 = time.monotonic()
        cells = _map_cells(_theory_cell_task, spec, workers)
        theory_grid = SweepGrid(
            alpha=spec.alpha,
            betas=betas,
            d0s=d0s,
            cells=tuple(cells),
            metadata=_grid_metadata(spec, "theory", time.monotonic() - t0),
        )
    return SweepResult(sim=sim_grid, theory=theory_grid)


def _fmt(x: float) -> str:
    return "%.17g" % x


def export_grid(grid: SweepGrid, path) -> Path:
    """One CSV row per cell plus a JSON metadata sidecar.

    Failed cells keep their coordinates and status but leave the numeric
    fields empty.
    """
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(GRID_HEADER + "\n")
        for c in grid.cells:
            if c.status == "ok":
                nums = [
                    _fmt(c.R_tilde),
                    _fmt(c.Delta),
                    _fmt(c.amp_slope),
                    _fmt(c.inflection_frac),
                ]
            else:
                nums = ["", "", "", ""]
            fh.write(
                ",".join(
                    [
                        _fmt(grid.alpha),
                        _fmt(c.beta),
                        _fmt(c.d0),
                        *nums,
                        c.state,
                        str(int(c.fully_drifting)),
                        c.status,
                    ]
                )
                + "\n"
            )
    meta_path = path.with_suffix(".meta.json")
    with open(meta_path, "w") as fh:
        json.dump(grid.metadata, fh, indent=2)
        fh.write("\n")
    return path


def load_grid(path) -> SweepGrid:
    """Rebuild a SweepGrid from an exported CSV (plus sidecar if present)."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip()
        if header != GRID_HEADER:
            raise ValueError(f"unexpected grid header: {header!r}")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    if not rows:
        raise ValueError("grid file has no data rows")
    alphas = {float(r[0]) for r in rows}
    if len(alphas) != 1:
        raise ValueError("grid file mixes alpha values")
    cells = []
    for r in rows:
        if len(r) != 10:
            raise ValueError(f"malformed grid row: {','.join(r)!r}")
        ok = r[9] == "ok"
        cells.append(
            CellRecord(
                beta=float(r[1]),
                d0=float(r[2]),
                R_tilde=float(r[3]) if ok else math.nan,
                Delta=float(r[4]) if ok else math.nan,
                amp_slope=float(r[5]) if ok else math.nan,
                inflection_frac=float(r[6]) if ok else math.nan,
                state=r[7],
                fully_drifting=bool(int(r[8])),
                status=r[9],
            )
        )
    betas = np.array(sorted({c.beta for c in cells}))
    d0s = np.array(sorted({c.d0 for c in cells}))
    meta_path = path.with_suffix(".meta.json")
    metadata = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return SweepGrid(
        alpha=alphas.pop(), betas=betas, d0s=d0s, cells=tuple(cells), metadata=metadata
    )


# ---------------------------------------------------------------------------
# Boundary overlays.  Each curve is the zero set of a relation between the
# self-consistent solution and the realized coupling range; zeros are found
# by sign change along grid lines and refined by bisection with fresh
# solves at the probe points.

BOUNDARY_CURVE_IDS = (
    "delta_zero",
    "field_matches_spread",
    "lock_lower_at_kmin_reinforcing",
    "lock_lower_at_kmin_competing",
    "lock_upper_at_kmax_competing",
    "lock_lower_at_kmax_reinforcing",
    "drift_onset_at_kmin",
    "drift_onset_at_kmax",
)


def _node_quantities(params: ModelParams, couplings: CouplingSet) -> dict:
    sol = solve_self_consistency(params, couplings)
    if not sol.converged or sol.R_tilde <= 0.0 or not np.isfinite(sol.Delta):
        return {"ok": False}
    from .theory import _r_star_fallback

    K = couplings.K
    ends = _r_star_fallback(np.array([K.min(), K.max()]), sol.R_tilde, sol.Delta, params)
    r_all = _r_star_fallback(K, sol.R_tilde, sol.Delta, params)
    return {
        "ok": True,
        "R": sol.R_tilde,
        "Delta": sol.Delta,
        "r_min": float(ends[0]),
        "r_max": float(ends[1]),
        "r_mean": float(np.nanmean(r_all)),
    }


def _curve_value(curve_id: str, q: dict, params: ModelParams, couplings: CouplingSet) -> float:
    if not q["ok"]:
        return math.nan
    R, Delta = q["R"], q["Delta"]
    m = abs(params.d0 * math.sin(params.alpha))
    K_min, K_max = float(couplings.K.min()), float(couplings.K.max())
    sq = math.sqrt(params.lambda_)
    if curve_id == "delta_zero":
        return Delta
    if curve_id == "field_matches_spread":
        return R - m * q["r_mean"]
    if curve_id == "lock_lower_at_kmin_reinforcing":
        den = R - m * q["r_min"]
        return Delta * q["r_min"] / den - K_min if abs(den) > 1e-12 else math.nan
    if curve_id == "lock_lower_at_kmin_competing":
        return abs(Delta) * q["r_min"] / (R + m * q["r_min"]) - K_min
    if curve_id == "lock_upper_at_kmax_competing":
        den = m * q["r_max"] - R
        return abs(Delta) * q["r_max"] / den - K_max if abs(den) > 1e-12 else math.nan
    if curve_id == "lock_lower_at_kmax_reinforcing":
        den = R - m * q["r_max"]
        return Delta * q["r_max"] / den - K_max if abs(den) > 1e-12 else math.nan
    if curve_id == "drift_onset_at_kmin":
        if params.d0 < 0:
            return math.nan
        den = m * sq - R
        return abs(Delta) * sq / den - K_min if abs(den) > 1e-12 else math.nan
    if curve_id == "drift_onset_at_kmax":
        if params.d0 >= 0:
            return math.nan
        return Delta * sq / (R + m * sq) - K_max
    raise ValueError(f"unknown curve id {curve_id!r}")


def boundary_curves(
    spec: SweepSpec,
    curve_ids=BOUNDARY_CURVE_IDS,
    refine_steps: int = 16,
) -> dict[str, np.ndarray]:
    """Zero crossings of each boundary relation over the (beta, d0) grid.

    Returns curve_id -> array of (beta, d0) points, ordered by beta then
    d0.  Curves that never cross inside the box come back empty.
    """
    couplings = _source_couplings(spec.source)
    betas, d0s = spec.betas, spec.d0s

    cache: dict[tuple[float, float], dict] = {}

    def node(beta: float, d0: float) -> dict:
        key = (float(beta), float(d0))
        if key not in cache:
            cache[key] = _node_quantities(spec.params_at(beta, d0), couplings)
        return cache[key]

    def value(curve_id, beta, d0):
        return _curve_value(curve_id, node(beta, d0), spec.params_at(beta, d0), couplings)

    def refine(curve_id, fixed, lo, hi, f_lo, f_hi, along_d0: bool):
        for _ in range(refine_steps):
            mid = 0.5 * (lo + hi)
            f_mid = (
                value(curve_id, fixed, mid) if along_d0 else value(curve_id, mid, fixed)
            )
            if not np.isfinite(f_mid):
                break
            if (f_lo < 0) != (f_mid < 0):
                hi, f_hi = mid, f_mid
            else:
                lo, f_lo = mid, f_mid
        mid = 0.5 * (lo + hi)
        return (fixed, mid) if along_d0 else (mid, fixed)

    out: dict[str, list[tuple[float, float]]] = {cid: [] for cid in curve_ids}
    for cid in curve_ids:
        # scan along d0 for each beta, then along beta for each d0
        for beta in betas:
            vals = [value(cid, beta, d0) for d0 in d0s]
            for a, b, fa, fb in zip(d0s[:-1], d0s[1:], vals[:-1], vals[1:]):
                if np.isfinite(fa) and np.isfinite(fb) and (fa < 0) != (fb < 0):
                    out[cid].append(refine(cid, beta, a, b, fa, fb, along_d0=True))
        for d0 in d0s:
            vals = [value(cid, beta, d0) for beta in betas]
            for a, b, fa, fb in zip(betas[:-1], betas[1:], vals[:-1], vals[1:]):
                if np.isfinite(fa) and np.isfinite(fb) and (fa < 0) != (fb < 0):
                    out[cid].append(refine(cid, d0, a, b, fa, fb, along_d0=False))
    return {
        cid: np.array(sorted(pts)) if pts else np.empty((0, 2))
        for cid, pts in out.items()
    }


def export_boundaries(curves: dict[str, np.ndarray], path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("curve_id,beta,d0\n")
        for cid in sorted(curves):
            for beta, d0 in curves[cid]:
                fh.write(f"{cid},{_fmt(beta)},{_fmt(d0)}\n")
    return path
