"""Machine-readable result files.

Column contracts (headers are bit-exact):

    invariants.csv   t,H,V,H1,Hhalf_1..Hhalf_Nc,M_11..M_NcNc,sobolev,apriori_bound
    stability.csv    t,dI,dII,tau_star,sobolev
    fields_t*.csv    x,u,phi_1..phi_Nc

summary.json always carries the keys: config, drifts{H,V,H1,Hhalf_max,M_max},
apriori{d,e,bound,ok,worst_margin}, stability{dH,upper_ok,lower_ok,tracking_ok},
wall_seconds, exit_code.  CSV bodies are deterministic; wall-clock metadata is
confined to summary.json.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .invariants import InvariantReport, relative_drift
from .state import CoupledState
from .stability import TrackPoint


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_invariants_csv(
    reports: Sequence[InvariantReport], path: Path | str, n_components: int
) -> None:
    path = Path(path)
    header = (
        ["t", "H", "V", "H1"]
        + [f"Hhalf_{i + 1}" for i in range(n_components)]
        + [f"M_{i + 1}{j + 1}" for i in range(n_components) for j in range(n_components)]
        + ["sobolev", "apriori_bound"]
    )
    lines = [",".join(header)]
    for r in reports:
        row = [r.t, r.h, r.v, r.h1]
        row += list(r.h_half)
        row += list(r.m.ravel())
        row += [np.sqrt(max(r.sobolev_sq, 0.0)), r.apriori_bound]
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_stability_csv(series: Sequence[TrackPoint], path: Path | str) -> None:
    path = Path(path)
    lines = ["t,dI,dII,tau_star,sobolev"]
    for pt in series:
        lines.append(
            ",".join(_fmt(v) for v in (pt.t, pt.d1, pt.d2, pt.tau_star, pt.sobolev))
        )
    path.write_text("\n".join(lines) + "\n")


def write_fields_csv(state: CoupledState, path: Path | str) -> None:
    path = Path(path)
    header = ["x", "u"] + [f"phi_{i + 1}" for i in range(state.n_components)]
    cols = [state.grid.x, state.u.values] + [p.values for p in state.phi]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def fields_snapshot_name(t: float) -> str:
    return f"fields_t{t:.3f}.csv"


def write_snapshots(
    snapshots: Sequence[tuple[float, CoupledState]], outdir: Path | str
) -> list[str]:
    outdir = Path(outdir)
    names = []
    for t, state in snapshots:
        name = fields_snapshot_name(t)
        write_fields_csv(state, outdir / name)
        names.append(name)
    return names


def drift_summary(reports: Sequence[InvariantReport]) -> dict[str, float]:
    """Relative drifts of the monitored quantities over a record sequence."""
    if len(reports) < 1:
        return {"H": 0.0, "V": 0.0, "H1": 0.0, "Hhalf_max": 0.0, "M_max": 0.0}
    n_c = len(reports[0].h_half)
    hhalf = max(
        (relative_drift([r.h_half[i] for r in reports]) for i in range(n_c)),
        default=0.0,
    )
    m_max = max(
        (
            relative_drift([r.m[i, j] for r in reports])
            for i in range(n_c)
            for j in range(n_c)
        ),
        default=0.0,
    )
    return {
        "H": relative_drift([r.h for r in reports]),
        "V": relative_drift([r.v for r in reports]),
        "H1": relative_drift([r.h1 for r in reports]),
        "Hhalf_max": hhalf,
        "M_max": m_max,
    }


def summary_skeleton(config: dict[str, Any]) -> dict[str, Any]:
    return {
        "config": config,
        "drifts": None,
        "apriori": None,
        "stability": None,
        "wall_seconds": None,
        "exit_code": 0,
    }


def _jsonify(obj: Any):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


def write_summary_json(summary: dict[str, Any], path: Path | str) -> None:
    Path(path).write_text(
        json.dumps(summary, indent=2, sort_keys=False, default=_jsonify) + "\n"
    )
