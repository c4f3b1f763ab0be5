"""Command-line front end.

gen       sample coupling strengths, or build a degree-matched graph
simulate  integrate one (alpha, beta, d0) point and measure it
sweep     evaluate a (beta, d0) grid by simulation, theory, or both
theory    solve the mean-field self-consistency alone
classify  print the state label stored in a run summary

Angles are accepted as radians ("0.785") or as multiples of pi
("0.25pi").  Every command that writes files also writes config.json,
the fully resolved parameter set, next to its outputs, so a run can be
reproduced from that file alone.  The OSC_SEED environment variable
overrides any seed given on the command line.

Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 a sweep
finished but some cells failed.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .integrate import (
    FullNetworkSystem,
    IntegrationError,
    IntegrationPlan,
    MeanFieldSystem,
    export_trajectory,
    init_state,
    integrate,
)
from .model import CouplingSet, ModelParams, NetworkGraph
from .networks import (
    DistributionSpec,
    GraphGenerationError,
    degrees_from_couplings,
    degrees_to_couplings,
    export_edge_list,
    generate_graph_from_degrees,
    load_adjacency,
    load_couplings,
    sample_couplings,
    save_couplings,
)
from .observables import (
    TOL_PHASE_DEFAULT,
    detect_locked,
    export_profiles,
    order_series,
    summarize_run,
    write_summary,
)
from .sweep import (
    SweepSpec,
    _code_version,
    boundary_curves,
    export_boundaries,
    export_grid,
    run_grid,
)
from .theory import (
    export_predicted_profiles,
    predict_profiles,
    solve_self_consistency,
    theory_summary,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_PARTIAL = 3

RNG_NAME = "numpy PCG64 via SeedSequence(entropy=seed, spawn_key=cell)"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the contract reserves 2 for
    # runtime failures, so usage errors are remapped to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def parse_angle(text: str) -> float:
    """Radians from '0.785', '0.25pi', 'pi', or '-0.5pi'."""
    t = text.strip().lower().replace(" ", "")
    try:
        if t.endswith("pi"):
            head = t[:-2]
            if head in ("", "+"):
                return math.pi
            if head == "-":
                return -math.pi
            return float(head) * math.pi
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot read angle {text!r}")


def _parse_seed_list(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot read seed list {text!r}")
    if not seeds:
        raise argparse.ArgumentTypeError("seed list is empty")
    return seeds


def _parse_range(text: str, angle: bool) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range {text!r} is not lo:hi:n")
    conv = parse_angle if angle else float
    try:
        lo, hi, n = conv(parts[0]), conv(parts[1]), int(parts[2])
    except (ValueError, argparse.ArgumentTypeError):
        raise argparse.ArgumentTypeError(f"cannot read range {text!r}")
    return float(lo), float(hi), n


def _angle_range(text: str) -> tuple[float, float, int]:
    return _parse_range(text, angle=True)


def _float_range(text: str) -> tuple[float, float, int]:
    return _parse_range(text, angle=False)


def _env_seed() -> int | None:
    raw = os.environ.get("OSC_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise _UsageError(f"OSC_SEED must be an integer, got {raw!r}")


def _resolve_seeds(flag_seeds: tuple[int, ...]) -> tuple[int, ...]:
    env = _env_seed()
    return (env,) if env is not None else flag_seeds


def _outdir(args) -> Path:
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_config(outdir: Path, command: str, payload: dict):
    config = {
        "command": command,
        "version": _code_version(),
        "rng": RNG_NAME,
        **payload,
    }
    with open(outdir / "config.json", "w") as fh:
        json.dump(config, fh, indent=2, sort_keys=False)
        fh.write("\n")


def _model_flags(p: argparse.ArgumentParser, with_beta_d0: bool = True):
    p.add_argument("--alpha", type=parse_angle, required=True,
                   help="coupling-asymmetry angle, e.g. 0.25pi")
    if with_beta_d0:
        p.add_argument("--beta", type=parse_angle, required=True,
                       help="transmission-delay angle, e.g. 0.2pi")
        p.add_argument("--d0", type=float, required=True,
                       help="self-feedback weight")
    p.add_argument("--lam", type=float, default=1.0,
                   help="limit-cycle growth rate (default 1.0)")
    p.add_argument("--omega", type=parse_angle, default=math.pi,
                   help="natural frequency (default pi)")
    p.add_argument("--scale", type=float, default=1.0,
                   help="global coupling multiplier (default 1.0)")


def _plan_flags(p: argparse.ArgumentParser):
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--t-transient", type=float, default=500.0)
    p.add_argument("--t-measure", type=float, default=100.0)
    p.add_argument("--record-stride", type=int, default=10)
    p.add_argument("--tol-phase", type=float, default=TOL_PHASE_DEFAULT,
                   help="max frame-phase span counted as locked (rad)")


def _source_flags(p: argparse.ArgumentParser):
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--couplings", help="coupling CSV, one strength per line")
    group.add_argument("--network", help="adjacency matrix or edge-list file")
    p.add_argument("--symmetrize", action="store_true",
                   help="make a loaded network undirected")


def _load_source(args) -> CouplingSet | NetworkGraph:
    if args.network is not None:
        return load_adjacency(args.network, symmetrize=args.symmetrize)
    return load_couplings(args.couplings)


def _plan_from(args, seed: int = 0) -> IntegrationPlan:
    return IntegrationPlan(
        dt=args.dt,
        t_transient=args.t_transient,
        t_measure=args.t_measure,
        record_stride=args.record_stride,
        seed=seed,
    )


# ---------------------------------------------------------------- gen


def cmd_gen(args) -> int:
    outdir = _outdir(args)
    seed = _resolve_seeds((args.seed,))[0]

    if args.graph:
        if args.from_couplings is None:
            raise _UsageError("--graph needs --from-couplings FILE")
        couplings = load_couplings(args.from_couplings)
        degrees = degrees_from_couplings(couplings, len(couplings))
        network = generate_graph_from_degrees(degrees, seed=seed)
        path = outdir / "edges.csv"
        export_edge_list(network, path)
        _write_config(outdir, "gen", {
            "graph": True,
            "from_couplings": str(args.from_couplings),
            "seed": seed,
            "n_nodes": network.n,
            "n_edges": network.n_edges,
        })
        mean_deg = float(network.degrees.mean())
        print(f"wrote {path}: {network.n} nodes, mean degree {mean_deg:.3f}")
        return EXIT_OK

    spec = DistributionSpec(
        kind=args.dist,
        mean=args.mean,
        sd=args.sd,
        gamma0=args.gamma0,
        k_bounds=(args.kmin, args.kmax) if args.kmin is not None else None,
        path=args.from_file,
        seed=seed,
    )
    couplings = sample_couplings(spec, args.n)
    path = outdir / "couplings.csv"
    save_couplings(couplings, path)
    _write_config(outdir, "gen", {
        "dist": args.dist,
        "mean": args.mean,
        "sd": args.sd,
        "gamma0": args.gamma0,
        "k_bounds": list(spec.k_bounds) if spec.k_bounds else None,
        "from_file": args.from_file,
        "n": args.n,
        "seed": seed,
    })
    print(
        f"wrote {path}: n={len(couplings)} mean={couplings.K_mean:.6g} "
        f"sd={couplings.sigma_K:.6g} min={couplings.K_min:.6g} "
        f"max={couplings.K_max:.6g}"
    )
    return EXIT_OK


# ----------------------------------------------------------- simulate


def _simulate_once(params, source, plan, seed):
    system = (
        FullNetworkSystem(params, source)
        if isinstance(source, NetworkGraph)
        else MeanFieldSystem(params, source)
    )
    initial = init_state(params, seed)
    return integrate(initial, system, plan.with_seed(seed))


def _aggregate_summaries(per_seed: list[dict]) -> dict:
    def mean_of(key):
        vals = [s[key] for s in per_seed if s[key] is not None]
        return float(np.mean(vals)) if vals else None

    labels = [s["state_label"] for s in per_seed if s["state_label"]]
    modal = max(sorted(set(labels)), key=labels.count) if labels else None
    return {
        "R_tilde_mean": mean_of("R_tilde_mean"),
        "Omega": mean_of("Omega"),
        "Delta": mean_of("Delta"),
        "n_locked": mean_of("n_locked"),
        "locked_fraction": mean_of("locked_fraction"),
        "mean_amp_slope": mean_of("mean_amp_slope"),
        "inflection": any(s["inflection"] for s in per_seed),
        "state_label": modal,
        "n_seeds": len(per_seed),
    }


def cmd_simulate(args) -> int:
    outdir = _outdir(args)
    source = _load_source(args)
    couplings = (
        degrees_to_couplings(source)
        if isinstance(source, NetworkGraph)
        else source
    )
    n = source.n if isinstance(source, NetworkGraph) else len(source)
    params = ModelParams(
        lambda_=args.lam, omega=args.omega, alpha=args.alpha,
        beta=args.beta, d0=args.d0, S=args.scale, N=n,
    )
    seeds = _resolve_seeds(args.seeds)
    plan = _plan_from(args)

    per_seed = []
    with open(outdir / "profiles.csv", "w") as prof:
        prof.write("K,phi_star,r_star,locked\n")
        for seed in seeds:
            traj = _simulate_once(params, source, plan, seed)
            series = order_series(traj, params)
            part = detect_locked(traj, series, args.tol_phase)
            per_seed.append(summarize_run(traj, couplings, params, args.tol_phase))
            tmp = outdir / f"_profiles_s{seed}.csv"
            export_profiles(part, couplings, tmp)
            prof.write(tmp.read_text().split("\n", 1)[1])
            tmp.unlink()
            if args.trajectory:
                export_trajectory(traj, outdir / f"trajectory_s{seed}.csv")

    summary = (
        dict(per_seed[0], n_seeds=1)
        if len(per_seed) == 1
        else _aggregate_summaries(per_seed)
    )

    if args.theory:
        sol = solve_self_consistency(params, couplings)
        summary["theory"] = theory_summary(sol, params, couplings)
        if sol.R_tilde > 0 and np.isfinite(sol.Delta):
            rows = predict_profiles(sol.R_tilde, sol.Delta, params, couplings)
            export_predicted_profiles(rows, outdir / "predicted_profiles.csv")

    write_summary(summary, outdir / "summary.json")
    _write_config(outdir, "simulate", {
        "alpha": params.alpha, "beta": params.beta, "d0": params.d0,
        "lam": params.lambda_, "omega": params.omega, "scale": params.S,
        "n": n,
        "couplings": args.couplings, "network": args.network,
        "symmetrize": args.symmetrize,
        "seeds": list(seeds),
        "dt": plan.dt, "t_transient": plan.t_transient,
        "t_measure": plan.t_measure, "record_stride": plan.record_stride,
        "tol_phase": args.tol_phase,
        "trajectory": args.trajectory, "theory": args.theory,
    })
    label = summary["state_label"] or "incoherent"
    R = summary["R_tilde_mean"]
    print(f"state {label}: R_tilde={R:.4f} locked_fraction="
          f"{summary['locked_fraction']:.3f} -> {outdir / 'summary.json'}")
    return EXIT_OK


# -------------------------------------------------------------- sweep


def cmd_sweep(args) -> int:
    outdir = _outdir(args)
    source = _load_source(args)
    seeds = _resolve_seeds(args.seeds)
    spec = SweepSpec(
        alpha=args.alpha,
        source=source,
        beta_range=args.beta_range,
        d0_range=args.d0_range,
        seeds=seeds if args.mode != "theory" else (),
        mode=args.mode,
        plan=_plan_from(args),
        lambda_=args.lam,
        omega=args.omega,
        S=args.scale,
    )
    workers = args.workers if args.workers else (os.cpu_count() or 1)
    result = run_grid(spec, workers=workers)

    n_failed = n_cells = 0
    written = []
    for flavor, grid in (("sim", result.sim), ("theory", result.theory)):
        if grid is None:
            continue
        path = outdir / f"grid_{flavor}.csv"
        export_grid(grid, path)
        written.append(path)
        n_cells += len(grid.cells)
        n_failed += sum(c.status == "failed" for c in grid.cells)

    if result.theory is not None and not args.no_boundaries:
        curves = boundary_curves(spec)
        export_boundaries(curves, outdir / "boundaries.csv")
        written.append(outdir / "boundaries.csv")

    _write_config(outdir, "sweep", {
        "alpha": args.alpha,
        "couplings": args.couplings, "network": args.network,
        "symmetrize": args.symmetrize,
        "beta_range": list(args.beta_range), "d0_range": list(args.d0_range),
        "mode": args.mode, "seeds": list(seeds),
        "dt": args.dt, "t_transient": args.t_transient,
        "t_measure": args.t_measure, "record_stride": args.record_stride,
        "lam": args.lam, "omega": args.omega, "scale": args.scale,
        "workers": workers, "boundaries": not args.no_boundaries,
    })
    for path in written:
        print(f"wrote {path}")
    if n_failed == n_cells and n_cells > 0:
        print(f"all {n_cells} cells failed", file=sys.stderr)
        return EXIT_RUNTIME
    if n_failed:
        print(f"{n_failed}/{n_cells} cells failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


# ------------------------------------------------------------- theory


def cmd_theory(args) -> int:
    outdir = _outdir(args)
    source = _load_source(args)
    couplings = (
        degrees_to_couplings(source)
        if isinstance(source, NetworkGraph)
        else source
    )
    params = ModelParams(
        lambda_=args.lam, omega=args.omega, alpha=args.alpha,
        beta=args.beta, d0=args.d0, S=args.scale, N=len(couplings),
    )
    sol = solve_self_consistency(params, couplings)
    payload = theory_summary(sol, params, couplings)
    with open(outdir / "theory_summary.json", "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    if sol.R_tilde > 0 and np.isfinite(sol.Delta):
        rows = predict_profiles(sol.R_tilde, sol.Delta, params, couplings)
        export_predicted_profiles(rows, outdir / "predicted_profiles.csv")
    _write_config(outdir, "theory", {
        "alpha": params.alpha, "beta": params.beta, "d0": params.d0,
        "lam": params.lambda_, "omega": params.omega, "scale": params.S,
        "couplings": args.couplings, "network": args.network,
        "symmetrize": args.symmetrize,
    })
    print(
        f"branch '{sol.branch}': R_tilde={sol.R_tilde:.6g} "
        f"Delta={sol.Delta:.6g} -> {outdir / 'theory_summary.json'}"
    )
    return EXIT_RUNTIME if sol.branch == "not converged" else EXIT_OK


# ----------------------------------------------------------- classify


def cmd_classify(args) -> int:
    path = Path(args.summary)
    try:
        summary = json.loads(path.read_text())
    except FileNotFoundError:
        print(f"no such file: {path}", file=sys.stderr)
        return EXIT_RUNTIME
    except json.JSONDecodeError as err:
        print(f"{path} is not valid JSON: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    if "state_label" not in summary:
        print(f"{path} has no state_label field", file=sys.stderr)
        return EXIT_RUNTIME
    print(summary["state_label"] or "incoherent")
    return EXIT_OK


# --------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="slosc",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="sample couplings or build a graph")
    gen.add_argument("--dist", choices=("gaussian", "powerlaw", "brainlike", "file"),
                     default="gaussian")
    gen.add_argument("--mean", type=float, default=None)
    gen.add_argument("--sd", type=float, default=None)
    gen.add_argument("--gamma0", type=float, default=2.0,
                     help="power-law exponent (default 2.0)")
    gen.add_argument("--kmin", type=float, default=None)
    gen.add_argument("--kmax", type=float, default=None)
    gen.add_argument("--from-file", default=None,
                     help="coupling file for --dist file")
    gen.add_argument("--n", type=int, default=1000)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--graph", action="store_true",
                     help="build a degree-matched graph instead of sampling")
    gen.add_argument("--from-couplings", default=None,
                     help="coupling CSV whose degrees the graph matches")
    gen.add_argument("--outdir", default=".")
    gen.set_defaults(func=cmd_gen)

    sim = sub.add_parser("simulate", help="run one parameter point")
    _model_flags(sim)
    _source_flags(sim)
    _plan_flags(sim)
    sim.add_argument("--seeds", type=_parse_seed_list, default=(0,),
                     help="comma-separated seed list (default 0)")
    sim.add_argument("--trajectory", action="store_true",
                     help="also write per-seed trajectory CSVs")
    sim.add_argument("--theory", action="store_true",
                     help="add the self-consistent solution to the summary")
    sim.add_argument("--outdir", default=".")
    sim.set_defaults(func=cmd_simulate)

    swp = sub.add_parser("sweep", help="evaluate a (beta, d0) grid")
    swp.add_argument("--alpha", type=parse_angle, required=True)
    _source_flags(swp)
    _plan_flags(swp)
    swp.add_argument("--beta-range", type=_angle_range, default=(0.0, 0.49 * math.pi, 41),
                     help="lo:hi:n with angle syntax (default 0:0.49pi:41)")
    swp.add_argument("--d0-range", type=_float_range, default=(-2.0, 2.0, 41),
                     help="lo:hi:n (default -2:2:41)")
    swp.add_argument("--mode", choices=("simulate", "theory", "both"), default="both")
    swp.add_argument("--seeds", type=_parse_seed_list, default=(0,))
    swp.add_argument("--lam", type=float, default=1.0)
    swp.add_argument("--omega", type=parse_angle, default=math.pi)
    swp.add_argument("--scale", type=float, default=1.0)
    swp.add_argument("--workers", type=int, default=0,
                     help="process count (default: all cores)")
    swp.add_argument("--no-boundaries", action="store_true",
                     help="skip boundary-curve extraction in theory mode")
    swp.add_argument("--outdir", default=".")
    swp.set_defaults(func=cmd_sweep)

    thr = sub.add_parser("theory", help="self-consistency solve only")
    _model_flags(thr)
    _source_flags(thr)
    thr.add_argument("--outdir", default=".")
    thr.set_defaults(func=cmd_theory)

    cls = sub.add_parser("classify", help="print the label from a summary JSON")
    cls.add_argument("summary", help="summary.json from a simulate run")
    cls.set_defaults(func=cmd_classify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as err:
        print(err, file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, GraphGenerationError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as err:
        print(f"integration failed: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as err:
        print(f"i/o failure: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
