import json
import math

import numpy as np
import pytest

from slosc.model import CouplingSet, ModelParams
from slosc.integrate import IntegrationPlan
from slosc.sweep import (
    GRID_HEADER,
    CellRecord,
    SweepGrid,
    SweepSpec,
    boundary_curves,
    cell_seed,
    export_boundaries,
    export_grid,
    load_grid,
    run_grid,
    run_point,
    theory_point,
)
from slosc.theory import solve_self_consistency


def gauss_like(n):
    return CouplingSet(np.linspace(7.85e-3, 34.4e-3, n))


QUICK_PLAN = IntegrationPlan(dt=0.01, t_transient=200.0, t_measure=50.0, record_stride=10)


def test_sweep_spec_validation():
    cs = gauss_like(10)
    with pytest.raises(ValueError, match="mode"):
        SweepSpec(alpha=0.0, source=cs, mode="quick")
    with pytest.raises(ValueError, match="beta"):
        SweepSpec(alpha=0.0, source=cs, beta_range=(0.0, math.pi / 2, 5))
    with pytest.raises(ValueError, match="steps"):
        SweepSpec(alpha=0.0, source=cs, beta_range=(0.0, 0.4, 1))
    with pytest.raises(ValueError, match="reversed"):
        SweepSpec(alpha=0.0, source=cs, d0_range=(2.0, -2.0, 5))
    with pytest.raises(ValueError, match="seed"):
        SweepSpec(alpha=0.0, source=cs, mode="simulate", seeds=())
    SweepSpec(alpha=0.0, source=cs, mode="theory", seeds=())  # fine
    with pytest.raises(TypeError, match="source"):
        SweepSpec(alpha=0.0, source=[0.01, 0.02])


def test_cell_seed_stable_and_distinct():
    assert cell_seed(7, 0, 0) == cell_seed(7, 0, 0)
    seen = {cell_seed(rep, i, j) for rep in (0, 1) for i in range(4) for j in range(4)}
    assert len(seen) == 32


def test_run_point_aggregates_and_is_deterministic():
    params = ModelParams(
        lambda_=1.0, omega=np.pi, alpha=0.25 * np.pi, beta=0.2, d0=1.0, N=40
    )
    cs = gauss_like(40)
    seeds = [cell_seed(0, 0, 0), cell_seed(1, 0, 0)]
    cell = run_point(params, cs, seeds, QUICK_PLAN)
    again = run_point(params, cs, seeds, QUICK_PLAN)
    assert cell == again
    assert cell.status == "ok"
    assert 0.5 < cell.R_tilde < 1.1
    assert cell.state.startswith("S")
    assert not cell.fully_drifting
    assert cell.failed_seeds == ()


def test_run_point_in_phase_has_zero_detuning():
    # sin(beta) = d0 sin(alpha) puts the population exactly in phase; the
    # default transient is needed because coalescence from random phases
    # takes a few hundred time units at this coupling
    d0 = 0.3
    beta = math.asin(0.3)
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.5 * np.pi, beta=beta, d0=d0, N=50)
    cs = CouplingSet.homogeneous(0.02, 50)
    cell = run_point(params, cs, [3], IntegrationPlan())
    assert cell.status == "ok"
    assert abs(cell.Delta) < 1e-3
    assert cell.R_tilde > 1.0  # in-phase ceiling sits above sqrt(lambda)
    assert cell.R_tilde == pytest.approx(math.sqrt(1 + 0.02 * (math.cos(beta) - 0.0)), abs=0.01)


def test_run_point_near_max_delay_is_fully_drifting():
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.0, beta=0.45 * np.pi, d0=1.0, N=60)
    cs = gauss_like(60)
    cell = run_point(params, cs, [5], QUICK_PLAN)
    assert cell.status == "ok"
    assert cell.fully_drifting
    assert cell.R_tilde < 0.4


def test_theory_point_matches_simulation():
    params = ModelParams(
        lambda_=1.0, omega=np.pi, alpha=0.25 * np.pi, beta=0.2, d0=1.0, N=120
    )
    cs = gauss_like(120)
    th = theory_point(params, cs)
    assert th.status == "ok"
    assert th.state.startswith("S1")
    assert not th.fully_drifting
    assert np.isfinite(th.amp_slope)
    long_plan = IntegrationPlan(dt=0.01, t_transient=1000.0, t_measure=100.0, record_stride=10)
    sim = run_point(params, cs, [3], long_plan)
    assert abs(th.R_tilde - sim.R_tilde) <= 0.02
    assert abs(th.Delta - sim.Delta) <= 0.005


def test_theory_point_incoherent_branch():
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.0, beta=0.0, d0=200.0, N=40)
    cell = theory_point(params, gauss_like(40))
    assert cell.status == "ok"
    assert cell.R_tilde == 0.0
    assert math.isnan(cell.Delta)
    assert cell.fully_drifting
    assert cell.state == ""


def test_run_grid_theory_mode_shape_and_determinism():
    spec = SweepSpec(
        alpha=0.25 * np.pi,
        source=gauss_like(60),
        beta_range=(0.1, 0.4, 3),
        d0_range=(0.5, 1.5, 3),
        mode="theory",
        seeds=(),
    )
    res = run_grid(spec)
    assert res.sim is None
    grid = res.theory
    assert len(grid.cells) == 9
    assert grid.raster("R_tilde").shape == (3, 3)
    assert grid.metadata["mode"] == "theory"
    assert grid.metadata["alpha"] == spec.alpha
    assert "wall_time_s" in grid.metadata
    again = run_grid(spec).theory
    assert again.cells == grid.cells


def test_run_grid_both_modes_small_simulation():
    spec = SweepSpec(
        alpha=0.25 * np.pi,
        source=gauss_like(30),
        beta_range=(0.1, 0.3, 2),
        d0_range=(0.8, 1.2, 2),
        seeds=(0,),
        mode="both",
        plan=IntegrationPlan(dt=0.01, t_transient=100.0, t_measure=20.0, record_stride=10),
    )
    res = run_grid(spec)
    assert res.sim is not None and res.theory is not None
    assert len(res.sim.cells) == 4 and len(res.theory.cells) == 4
    assert np.isfinite(res.sim.raster("R_tilde")).all()
    # cell coordinates line up between the two flavors
    for a, b in zip(res.sim.cells, res.theory.cells):
        assert a.beta == b.beta and a.d0 == b.d0


def test_run_grid_alpha_zero_uniform_across_d0():
    # with no phase shift in the diffusive term, d0 barely moves the
    # solution relative to what beta does: the along-d0 spread of R and
    # Delta stays a few percent of their full along-beta swing, and the
    # largest delays collapse the population entirely
    spec = SweepSpec(
        alpha=0.0,
        source=gauss_like(60),
        beta_range=(0.05, 0.45 * np.pi, 4),
        d0_range=(-2.0, 2.0, 5),
        mode="theory",
        seeds=(),
    )
    grid = run_grid(spec).theory
    R = grid.raster("R_tilde")
    D = grid.raster("Delta")
    drifting = grid.raster("fully_drifting")

    assert drifting[-1].all()  # collapse row at the largest delay
    assert not drifting[0].any()

    def beta_swing(Q):
        return (np.nanmax(Q, axis=0) - np.nanmin(Q, axis=0)).max()

    def d0_spread(Q):
        rows = [row for row in Q if np.isfinite(row).any()]
        return max(np.nanmax(r) - np.nanmin(r) for r in rows)

    assert d0_spread(R) < 0.06 * beta_swing(R)
    assert d0_spread(D) < 0.05 * beta_swing(D)


def test_run_grid_independent_of_worker_count():
    import dataclasses

    spec = SweepSpec(
        alpha=0.25 * np.pi,
        source=gauss_like(40),
        beta_range=(0.1, 0.4, 2),
        d0_range=(0.5, 1.5, 2),
        mode="theory",
        seeds=(),
    )
    serial = run_grid(spec, workers=1).theory
    pooled = run_grid(spec, workers=2).theory
    for a, b in zip(serial.cells, pooled.cells):
        for f in dataclasses.fields(a):
            x, y = getattr(a, f.name), getattr(b, f.name)
            if isinstance(x, float) and math.isnan(x):
                assert isinstance(y, float) and math.isnan(y)
            else:
                assert x == y


def test_export_load_roundtrip(tmp_path):
    spec = SweepSpec(
        alpha=0.25 * np.pi,
        source=gauss_like(40),
        beta_range=(0.1, 0.4, 2),
        d0_range=(0.5, 1.5, 2),
        mode="theory",
        seeds=(),
    )
    grid = run_grid(spec).theory
    path = tmp_path / "grid.csv"
    export_grid(grid, path)
    lines = path.read_text().splitlines()
    assert lines[0] == GRID_HEADER
    assert len(lines) == 1 + 4
    loaded = load_grid(path)
    assert loaded.alpha == grid.alpha
    assert loaded.metadata == grid.metadata
    for a, b in zip(loaded.cells, grid.cells):
        assert a.beta == b.beta and a.d0 == b.d0
        assert a.R_tilde == b.R_tilde  # %.17g keeps doubles exact
        assert a.Delta == b.Delta
        assert a.amp_slope == b.amp_slope or (math.isnan(a.amp_slope) and math.isnan(b.amp_slope))
        assert a.state == b.state
        assert a.fully_drifting == b.fully_drifting
        assert a.status == b.status


def test_export_failed_cell_leaves_numeric_fields_empty(tmp_path):
    ok = CellRecord(
        beta=0.1, d0=1.0, R_tilde=0.9, Delta=-0.01, amp_slope=0.5,
        inflection_frac=0.0, state="S1_l+", fully_drifting=False, status="ok",
    )
    bad = CellRecord(
        beta=0.1, d0=2.0, R_tilde=math.nan, Delta=math.nan, amp_slope=math.nan,
        inflection_frac=math.nan, state="", fully_drifting=False, status="failed",
        failed_seeds=(11,),
    )
    grid = SweepGrid(
        alpha=0.0,
        betas=np.array([0.1]),
        d0s=np.array([1.0, 2.0]),
        cells=(ok, bad),
        metadata={"mode": "simulate"},
    )
    path = tmp_path / "grid.csv"
    export_grid(grid, path)
    failed_row = path.read_text().splitlines()[2]
    assert ",,,," in failed_row
    assert failed_row.endswith("failed")
    loaded = load_grid(path)
    assert loaded.cells[1].status == "failed"
    assert math.isnan(loaded.cells[1].R_tilde)
    assert loaded.cells[0].R_tilde == 0.9


def test_boundary_curve_delta_zero_is_accurate(tmp_path):
    cs = gauss_like(40)
    spec = SweepSpec(
        alpha=0.25 * np.pi,
        source=cs,
        beta_range=(0.15, 0.45, 4),
        d0_range=(0.05, 1.2, 4),
        mode="theory",
        seeds=(),
    )
    curves = boundary_curves(spec, curve_ids=("delta_zero",))
    pts = curves["delta_zero"]
    assert pts.shape[0] >= 3
    sa = math.sin(spec.alpha)
    for beta, d0 in pts:
        sol = solve_self_consistency(spec.params_at(beta, d0), cs)
        assert sol.converged
        assert abs(sol.Delta) < 1e-4
        # in-phase locus sits near sin(beta) = d0 sin(alpha)
        assert d0 == pytest.approx(math.sin(beta) / sa, abs=0.05)
    out = tmp_path / "bounds.csv"
    export_boundaries(curves, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "curve_id,beta,d0"
    assert len(lines) == 1 + pts.shape[0]
    first = lines[1].split(",")
    assert first[0] == "delta_zero"
    float(first[1]), float(first[2])  # parseable
