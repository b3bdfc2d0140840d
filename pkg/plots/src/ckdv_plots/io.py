"""Readers for the simulator's output files.

This package consumes files only; it never recomputes physics.  The column
contracts it validates against:

    invariants.csv   t,H,V,H1,Hhalf_1..Hhalf_Nc,M_11..M_NcNc,sobolev,apriori_bound
    stability.csv    t,dI,dII,tau_star,sobolev
    fields_t*.csv    x,u,phi_1..phi_Nc
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

# |dQ| is measured against max(|Q0|, floor) so conserved zeros stay quiet;
# must agree with how the simulator fills summary.json drifts
DRIFT_FLOOR = 1e-9


class ContractError(ValueError):
    """An input file does not match the documented column contract."""


def read_csv_columns(path: Path) -> dict[str, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise ContractError(f"input file not found: {path}")
    with path.open() as fh:
        header = fh.readline().strip()
    if not header:
        raise ContractError(f"empty file: {path}")
    names = header.split(",")
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise ContractError(f"malformed CSV body in {path}: {exc}") from exc
    if data.shape[1] != len(names):
        raise ContractError(
            f"{path}: {data.shape[1]} columns of data under {len(names)} headers"
        )
    return {name: data[:, i] for i, name in enumerate(names)}


def require_columns(cols: dict[str, np.ndarray], required: list[str], path) -> None:
    missing = [name for name in required if name not in cols]
    if missing:
        raise ContractError(f"{path}: missing required column(s) {missing}")


def read_invariants(path: Path) -> dict[str, np.ndarray]:
    cols = read_csv_columns(path)
    require_columns(cols, ["t", "H", "V", "H1", "sobolev", "apriori_bound"], path)
    if not any(re.fullmatch(r"Hhalf_\d+", c) for c in cols):
        raise ContractError(f"{path}: no Hhalf_* columns found")
    return cols


def read_stability(path: Path) -> dict[str, np.ndarray]:
    cols = read_csv_columns(path)
    require_columns(cols, ["t", "dI", "dII", "tau_star", "sobolev"], path)
    return cols


def read_fields(path: Path) -> dict[str, np.ndarray]:
    cols = read_csv_columns(path)
    require_columns(cols, ["x", "u"], path)
    return cols


_SNAPSHOT_RE = re.compile(r"fields_t(-?[0-9.]+)\.csv$")


def list_snapshots(run_dir: Path) -> list[tuple[float, Path]]:
    """Field snapshots in the run directory, sorted by their time stamp."""
    out = []
    for path in Path(run_dir).glob("fields_t*.csv"):
        match = _SNAPSHOT_RE.search(path.name)
        if match:
            out.append((float(match.group(1)), path))
    if not out:
        raise ContractError(f"no fields_t*.csv snapshots in {run_dir}")
    return sorted(out)


def read_summary(run_dir: Path) -> dict:
    path = Path(run_dir) / "summary.json"
    if not path.exists():
        raise ContractError(f"summary.json not found in {run_dir}")
    return json.loads(path.read_text())


def quantity_columns(cols: dict[str, np.ndarray]) -> list[str]:
    """Conserved-quantity columns of an invariants table, in header order."""
    return [
        name
        for name in cols
        if name in ("H", "V", "H1")
        or re.fullmatch(r"Hhalf_\d+", name)
        or re.fullmatch(r"M_\d+", name)
    ]


def relative_drift_series(values: np.ndarray) -> np.ndarray:
    """|Q(t) - Q(0)| / max(|Q(0)|, floor), matching the simulator's summary."""
    v0 = values[0]
    return np.abs(values - v0) / max(abs(v0), DRIFT_FLOOR)
