"""Command-line entry point.

Subcommands: simulate, soliton-check, bracket-check, stability, convergence.
Exit codes: 0 success, 1 config error, 2 numerical failure, 3 assertion
(inequality) failure.  Worker pools for seed sweeps honor CKDV_THREADS.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import config as cfgmod
from .config import RunConfig, load_config
from .dynamics import bracket_consistency
from .errors import BlowUpError, CkdvError, ConfigError
from .grid import Grid1D, RealField, make_grid
from .integrator import SolverConfig, evolve, suggest_dt
from .invariants import apriori, check_apriori, make_invariant_observer
from .output import (
    drift_summary,
    summary_skeleton,
    write_fields_csv,
    write_invariants_csv,
    write_snapshots,
    write_stability_csv,
    write_summary_json,
)
from .solitons import SolitonSpec, soliton_profile, soliton_state, tw_residual
from .stability import (
    make_perturbation,
    run_ground_state_stability,
    run_soliton_stability,
    _snapshot_indices,
)
from .state import CoupledState, state_from_values, zero_state

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_ASSERTION = 3

TW_RESIDUAL_TOL = 1e-10
PROPAGATION_TOL = 1e-6
BRACKET_TOL = 1e-8


def _build_initial(config: RunConfig, grid: Grid1D) -> CoupledState:
    spec = config.initial
    kind = spec["type"]
    if kind == "soliton":
        return soliton_state(
            SolitonSpec(spec["C"], spec["x0"]), grid, config.components
        )
    if kind == "soliton-pair":
        u = np.zeros(grid.n)
        for c, x0 in zip(spec["C"], spec["x0"]):
            u += soliton_profile(SolitonSpec(c, x0), grid).values
        return CoupledState(
            RealField(grid, u), zero_state(grid, config.components).phi
        )
    if kind == "random":
        return make_perturbation(
            grid, config.components, spec["delta"], config.seed, spec["mode"]
        )
    return _read_fields_csv(spec["path"], grid, config.components)


def _read_fields_csv(path: str, grid: Grid1D, components: int) -> CoupledState:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"initial.path: file not found: {p}")
    data = np.genfromtxt(p, delimiter=",", names=True)
    names = data.dtype.names or ()
    expected = ["x", "u"] + [f"phi_{i + 1}" for i in range(components)]
    for name in expected:
        if name not in names:
            raise ConfigError(f"initial.path: column {name!r} missing from {p}")
    x = np.atleast_1d(data["x"])
    if x.shape != (grid.n,) or not np.allclose(x, grid.x, atol=1e-9):
        raise ConfigError(
            "initial.path: x column does not match the configured grid nodes"
        )
    return state_from_values(
        grid,
        np.atleast_1d(data["u"]),
        [np.atleast_1d(data[f"phi_{i + 1}"]) for i in range(components)],
    )


def _solver_config(config: RunConfig, grid: Grid1D, state: CoupledState) -> SolverConfig:
    dt = config.dt if config.dt is not None else suggest_dt(grid, state)
    return SolverConfig(
        dt=dt,
        t_end=config.t_end,
        sample_every=config.sample_every,
        force_dt=config.force_dt,
    )


def cmd_simulate(config: RunConfig, outdir: Path) -> int:
    t0 = time.perf_counter()
    outdir.mkdir(parents=True, exist_ok=True)
    grid = make_grid(config.length, config.n_points)
    try:
        state0 = _build_initial(config, grid)
        solver = _solver_config(config, grid, state0)
    except ValueError as exc:
        # a state that cannot even be constructed is a configuration problem
        raise ConfigError(f"initial: {exc}") from exc
    bound = apriori(state0)
    summary = summary_skeleton(config.echo())

    inv_obs = make_invariant_observer(bound.bound)
    try:
        result = evolve(state0, solver, observers=[inv_obs, lambda t, s: s])
    except (BlowUpError, ValueError) as exc:
        if isinstance(exc, BlowUpError):
            summary["blow_up"] = {"t": exc.t, "step": exc.step, "message": str(exc)}
        else:
            summary["error"] = str(exc)
        summary["exit_code"] = EXIT_NUMERICAL
        summary["wall_seconds"] = time.perf_counter() - t0
        write_summary_json(summary, outdir / "summary.json")
        print(f"simulate: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    reports = result.records[0]
    states = result.records[1]
    write_invariants_csv(reports, outdir / "invariants.csv", config.components)
    snap_at = _snapshot_indices(len(result.times), config.snapshots)
    write_snapshots(
        [(result.times[i], states[i]) for i in sorted(snap_at)], outdir
    )

    check = check_apriori(reports, bound)
    summary["drifts"] = drift_summary(reports)
    summary["apriori"] = {
        "d": bound.d,
        "e": bound.e,
        "bound": bound.bound,
        "ok": check.ok,
        "worst_margin": check.worst_margin,
    }
    summary["wall_seconds"] = time.perf_counter() - t0
    write_summary_json(summary, outdir / "summary.json")
    return EXIT_OK


def cmd_soliton_check(c_values: Sequence[float], outdir: Path,
                      config: RunConfig) -> int:
    t0 = time.perf_counter()
    outdir.mkdir(parents=True, exist_ok=True)
    # doubled grid: fast solitons are narrow, and the residual tolerance
    # demands their second derivative resolved to near round-off
    grid = make_grid(config.length, max(config.n_points, 1024))
    rows = []
    all_ok = True
    for c in c_values:
        if c <= 0:
            raise ConfigError(f"soliton-check: speed must be positive, got {c}")
        try:
            profile = soliton_profile(SolitonSpec(c), grid)
        except ValueError as exc:
            print(f"soliton-check: C={c}: {exc}", file=sys.stderr)
            rows.append((c, math.nan, math.nan, False))
            all_ok = False
            continue
        residual = tw_residual(profile, c)
        state = soliton_state(SolitonSpec(c), grid, config.components)
        dt = config.dt if config.dt is not None else suggest_dt(grid, state)
        # fast solitons advect proportionally faster; scale the step so the
        # temporal error stays commensurate across the battery
        dt = dt / max(1.0, c)
        solver = SolverConfig(dt=dt, t_end=config.t_end,
                              sample_every=max(1, config.sample_every))
        result = evolve(state, solver)
        exact = soliton_profile(SolitonSpec(c), grid, t=config.t_end)
        prop_err = float(np.abs(result.final.u.values - exact.values).max())
        ok = residual < TW_RESIDUAL_TOL and prop_err < PROPAGATION_TOL
        all_ok = all_ok and ok
        rows.append((c, residual, prop_err, ok))

    lines = ["C,tw_residual,propagation_error,ok"]
    for c, res, err, ok in rows:
        lines.append(f"{c:.17g},{res:.17g},{err:.17g},{int(ok)}")
    (outdir / "soliton_check.csv").write_text("\n".join(lines) + "\n")

    summary = summary_skeleton(config.echo())
    summary["soliton_check"] = [
        {"C": c, "tw_residual": res, "propagation_error": err, "ok": ok}
        for c, res, err, ok in rows
    ]
    summary["exit_code"] = EXIT_OK if all_ok else EXIT_ASSERTION
    summary["wall_seconds"] = time.perf_counter() - t0
    write_summary_json(summary, outdir / "summary.json")
    return EXIT_OK if all_ok else EXIT_ASSERTION


def _bracket_battery(config: RunConfig) -> list[tuple[str, CoupledState]]:
    grid = make_grid(config.length, config.n_points)
    battery: list[tuple[str, CoupledState]] = [
        ("soliton_c1", soliton_state(SolitonSpec(1.0), grid, config.components))
    ]
    trig_grid = make_grid(2.0 * math.pi, 64)
    u = np.sin(trig_grid.x)
    phis = [np.cos(trig_grid.x)] + [
        np.zeros(trig_grid.n) for _ in range(config.components - 1)
    ]
    battery.append(("trig", state_from_values(trig_grid, u, phis)))
    for s in range(10):
        battery.append(
            (
                f"random_{s}",
                make_perturbation(grid, config.components, 1.0, seed=s, mode="mixed"),
            )
        )
    return battery


def cmd_bracket_check(outdir: Path, config: RunConfig) -> int:
    t0 = time.perf_counter()
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    all_ok = True
    for name, state in _bracket_battery(config):
        report = bracket_consistency(state)
        ok = report.inferred_scale == 0.5 and report.residual_half < BRACKET_TOL
        all_ok = all_ok and ok
        rows.append((name, report))

    lines = ["state,residual_half,residual_one,inferred_scale"]
    for name, rep in rows:
        lines.append(
            f"{name},{rep.residual_half:.17g},{rep.residual_one:.17g},"
            f"{rep.inferred_scale:.17g}"
        )
    (outdir / "bracket_check.csv").write_text("\n".join(lines) + "\n")

    summary = summary_skeleton(config.echo())
    summary["bracket_check"] = [
        {
            "state": name,
            "residual_half": rep.residual_half,
            "residual_one": rep.residual_one,
            "inferred_scale": rep.inferred_scale,
        }
        for name, rep in rows
    ]
    summary["exit_code"] = EXIT_OK if all_ok else EXIT_ASSERTION
    summary["wall_seconds"] = time.perf_counter() - t0
    write_summary_json(summary, outdir / "summary.json")
    return EXIT_OK if all_ok else EXIT_ASSERTION


def cmd_stability(config: RunConfig, outdir: Path, workers: int | None) -> int:
    t0 = time.perf_counter()
    outdir.mkdir(parents=True, exist_ok=True)
    if config.experiment is None:
        raise ConfigError("experiment: required for the stability command")
    exp = config.experiment
    grid = make_grid(config.length, config.n_points)
    dt = config.dt if config.dt is not None else None
    if dt is None:
        probe = soliton_state(SolitonSpec(exp["C"]), grid, config.components) \
            if exp["kind"] == "soliton" else zero_state(grid, config.components)
        dt = suggest_dt(grid, probe)
    solver = SolverConfig(dt=dt, t_end=config.t_end,
                          sample_every=config.sample_every,
                          force_dt=config.force_dt)
    seeds = [config.seed + i for i in range(exp["seeds"])]

    summary = summary_skeleton(config.echo())
    all_ok = True
    seed_sections = []

    if exp["kind"] == "soliton":
        reports = run_soliton_stability(
            grid, config.components, exp["C"], exp["delta"], seeds, solver,
            mode=exp["mode"], v_rescale=exp["v_rescale"],
            translate_xi=exp["translate_xi"], snapshot_count=config.snapshots,
            workers=workers,
        )
        for rep in reports:
            seed_dir = outdir / f"seed_{rep.seed:03d}"
            seed_dir.mkdir(parents=True, exist_ok=True)
            write_stability_csv(rep.series, seed_dir / "stability.csv")
            write_invariants_csv(rep.invariants, seed_dir / "invariants.csv",
                                 config.components)
            write_snapshots(rep.snapshots, seed_dir)
            ok = rep.ok_upper and rep.ok_lower and rep.ok_tracking
            all_ok = all_ok and ok
            seed_summary = summary_skeleton(config.echo())
            seed_summary["drifts"] = drift_summary(rep.invariants)
            seed_summary["apriori"] = _apriori_section(rep.apriori_data,
                                                       rep.apriori_check)
            seed_summary["stability"] = _stability_section(rep)
            seed_summary["exit_code"] = EXIT_OK if ok else EXIT_ASSERTION
            seed_summary["wall_seconds"] = None
            write_summary_json(seed_summary, seed_dir / "summary.json")
            seed_sections.append({"seed": rep.seed, **_stability_section(rep)})

        first = reports[0]
        write_stability_csv(first.series, outdir / "stability.csv")
        write_invariants_csv(first.invariants, outdir / "invariants.csv",
                             config.components)
        write_snapshots(first.snapshots, outdir)
        summary["drifts"] = drift_summary(first.invariants)
        summary["apriori"] = {
            **_apriori_section(first.apriori_data, first.apriori_check),
            "ok": all(r.apriori_check.ok for r in reports),
            "worst_margin": min(r.apriori_check.worst_margin for r in reports),
        }
        summary["stability"] = {
            **_stability_section(first),
            "upper_ok": all(r.ok_upper for r in reports),
            "lower_ok": all(r.ok_lower for r in reports),
            "tracking_ok": all(r.ok_tracking for r in reports),
        }
        summary["seeds"] = seed_sections
    else:
        reports = run_ground_state_stability(
            grid, config.components, exp["delta"], seeds, solver,
            mode=exp["mode"], snapshot_count=config.snapshots, workers=workers,
        )
        for rep in reports:
            seed_dir = outdir / f"seed_{rep.seed:03d}"
            seed_dir.mkdir(parents=True, exist_ok=True)
            write_invariants_csv(rep.invariants, seed_dir / "invariants.csv",
                                 config.components)
            write_snapshots(rep.snapshots, seed_dir)
            all_ok = all_ok and rep.check.ok
            seed_sections.append({
                "seed": rep.seed,
                "bound": rep.apriori_data.bound,
                "ok": rep.check.ok,
                "worst_margin": rep.check.worst_margin,
                "worst_t": rep.check.worst_t,
            })
        first = reports[0]
        write_invariants_csv(first.invariants, outdir / "invariants.csv",
                             config.components)
        write_snapshots(first.snapshots, outdir)
        summary["drifts"] = drift_summary(first.invariants)
        summary["apriori"] = {
            "d": first.apriori_data.d,
            "e": first.apriori_data.e,
            "bound": first.apriori_data.bound,
            "ok": all(r.check.ok for r in reports),
            "worst_margin": min(r.check.worst_margin for r in reports),
        }
        summary["seeds"] = seed_sections

    summary["exit_code"] = EXIT_OK if all_ok else EXIT_ASSERTION
    summary["wall_seconds"] = time.perf_counter() - t0
    write_summary_json(summary, outdir / "summary.json")
    return EXIT_OK if all_ok else EXIT_ASSERTION


def _apriori_section(data, check) -> dict[str, Any]:
    return {
        "d": data.d,
        "e": data.e,
        "bound": data.bound,
        "ok": check.ok,
        "worst_margin": check.worst_margin,
    }


def _stability_section(rep) -> dict[str, Any]:
    return {
        "dH": rep.dh,
        "upper_ok": rep.ok_upper,
        "lower_ok": rep.ok_lower,
        "tracking_ok": rep.ok_tracking,
        "delta": rep.delta,
        "C": rep.c,
        "upper_coeff": rep.upper_coeff,
        "lower_coeff": rep.lower_coeff,
        "tracking_bound": rep.tracking_threshold,
    }


def cmd_convergence(outdir: Path, config: RunConfig) -> int:
    t0 = time.perf_counter()
    outdir.mkdir(parents=True, exist_ok=True)
    spec = SolitonSpec(1.0)
    t_end = 1.0

    # every dt divides t_end exactly so endpoints align; the doubled grid
    # keeps the band-projection error floor far below the smallest dt error
    grid = make_grid(config.length, 1024)
    state0 = soliton_state(spec, grid, config.components)
    dts = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
    temporal_errors = []
    exact = soliton_profile(spec, grid, t=t_end)
    for dt in dts:
        result = evolve(state0, SolverConfig(dt=dt, t_end=t_end, sample_every=10**9))
        temporal_errors.append(float(np.abs(result.final.u.values - exact.values).max()))
    orders = [
        math.log2(temporal_errors[i] / temporal_errors[i + 1])
        for i in range(len(dts) - 1)
    ]
    mean_order = sum(orders) / len(orders)

    ns = [128, 256, 512, 1024]
    dt_spatial = 2e-4
    spatial_errors = []
    for n in ns:
        g = make_grid(config.length, n)
        s0 = soliton_state(spec, g, config.components)
        result = evolve(s0, SolverConfig(dt=dt_spatial, t_end=t_end,
                                         sample_every=10**9))
        e = soliton_profile(spec, g, t=t_end)
        spatial_errors.append(float(np.abs(result.final.u.values - e.values).max()))
    spatial_ratios = [
        spatial_errors[i] / spatial_errors[i + 1] for i in range(len(ns) - 1)
    ]
    # spectral accuracy: far faster decay than any fixed algebraic order
    spatial_ok = (
        spatial_ratios[0] > 30.0
        and spatial_ratios[1] > 30.0
        and spatial_errors[-1] <= spatial_errors[-2]
    )
    temporal_ok = 3.5 <= mean_order <= 4.5
    all_ok = temporal_ok and spatial_ok

    lines = ["kind,param,error"]
    for dt, err in zip(dts, temporal_errors):
        lines.append(f"temporal,{dt:.17g},{err:.17g}")
    for n, err in zip(ns, spatial_errors):
        lines.append(f"spatial,{n},{err:.17g}")
    (outdir / "convergence.csv").write_text("\n".join(lines) + "\n")

    summary = summary_skeleton(config.echo())
    summary["convergence"] = {
        "temporal_errors": dict(zip(map(str, dts), temporal_errors)),
        "temporal_orders": orders,
        "temporal_mean_order": mean_order,
        "spatial_errors": dict(zip(map(str, ns), spatial_errors)),
        "spatial_ratios": spatial_ratios,
        "temporal_ok": temporal_ok,
        "spatial_ok": spatial_ok,
    }
    summary["exit_code"] = EXIT_OK if all_ok else EXIT_ASSERTION
    summary["wall_seconds"] = time.perf_counter() - t0
    write_summary_json(summary, outdir / "summary.json")
    return EXIT_OK if all_ok else EXIT_ASSERTION


def _parse_c_list(raw: str) -> list[float]:
    try:
        values = [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"--c: expected comma-separated numbers, got {raw!r}") from exc
    if not values:
        raise ConfigError("--c: at least one speed is required")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ckdv",
        description="Coupled KdV laboratory: simulation, checks, and "
                    "stability experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="evolve an initial state and "
                                            "record invariants and snapshots")
    p_sim.add_argument("--config", required=True, help="JSON run configuration")
    p_sim.add_argument("--out", default=None, help="output directory")

    p_sol = sub.add_parser("soliton-check", help="traveling-wave residual and "
                                                 "propagation fidelity per speed")
    p_sol.add_argument("--c", default="0.5,1,4",
                       help="comma-separated soliton speeds")
    p_sol.add_argument("--out", default="out-soliton-check")
    p_sol.add_argument("--t-end", type=float, default=cfgmod.DEFAULT_T_END)

    p_br = sub.add_parser("bracket-check", help="verify the generator scale "
                                                "of the Hamiltonian flow")
    p_br.add_argument("--out", default="out-bracket-check")

    p_st = sub.add_parser("stability", help="ground-state or soliton "
                                            "stability experiment")
    p_st.add_argument("--experiment", choices=cfgmod.EXPERIMENT_KINDS,
                      required=True)
    p_st.add_argument("--c", type=float, default=cfgmod.DEFAULT_C)
    p_st.add_argument("--delta", type=float, default=cfgmod.DEFAULT_DELTA)
    p_st.add_argument("--seeds", type=int, default=20)
    p_st.add_argument("--seed0", type=int, default=0)
    p_st.add_argument("--t-end", type=float, default=20.0)
    p_st.add_argument("--mode", choices=("u-only", "xi-only", "mixed"),
                      default="mixed")
    p_st.add_argument("--no-v-rescale", action="store_true")
    p_st.add_argument("--translate-xi", action="store_true")
    p_st.add_argument("--workers", type=int, default=None)
    p_st.add_argument("--out", default="out-stability")
    p_st.add_argument("--config", default=None,
                      help="optional JSON config; flags override its experiment")

    p_cv = sub.add_parser("convergence", help="temporal-order and "
                                              "grid-refinement study")
    p_cv.add_argument("--out", default="out-convergence")

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            config = load_config(args.config)
            outdir = Path(args.out) if args.out else Path(config.outdir)
            return cmd_simulate(config, outdir)
        if args.command == "soliton-check":
            config = RunConfig(t_end=args.t_end)
            return cmd_soliton_check(_parse_c_list(args.c), Path(args.out), config)
        if args.command == "bracket-check":
            return cmd_bracket_check(Path(args.out), RunConfig())
        if args.command == "stability":
            base = load_config(args.config) if args.config else RunConfig()
            experiment = {
                "kind": args.experiment,
                "C": args.c,
                "delta": args.delta,
                "seeds": args.seeds,
                "mode": args.mode,
                "v_rescale": not args.no_v_rescale,
                "translate_xi": args.translate_xi,
            }
            config = RunConfig(
                length=base.length,
                n_points=base.n_points,
                components=base.components,
                dt=base.dt,
                t_end=args.t_end,
                sample_every=base.sample_every,
                seed=args.seed0,
                initial=base.initial,
                snapshots=base.snapshots,
                force_dt=base.force_dt,
                experiment=experiment,
                outdir=args.out,
            )
            return cmd_stability(config, Path(args.out), args.workers)
        if args.command == "convergence":
            return cmd_convergence(Path(args.out), RunConfig())
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"ckdv: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"ckdv: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (CkdvError, ValueError) as exc:
        # domain/decay violations raised mid-run count as numerical failures
        print(f"ckdv: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
