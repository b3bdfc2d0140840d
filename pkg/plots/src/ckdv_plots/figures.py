"""The four figure kinds, each consuming a run directory and writing one image."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (
    ContractError,
    list_snapshots,
    quantity_columns,
    read_fields,
    read_invariants,
    read_stability,
    read_summary,
    relative_drift_series,
)

KINDS = ("invariant-drift", "waterfall", "dII-vs-t", "bound-check")

# drifts that are exactly zero still need a position on the log axis
LOG_FLOOR = 1e-18


@dataclass(frozen=True)
class FigureRequest:
    kind: str
    run_dir: Path
    out_path: Path
    log_axes: bool = True
    stride: int = 1

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")


def _finish(fig, out_path: Path) -> None:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_invariant_drift(request: FigureRequest) -> float:
    """Relative drift of each conserved quantity on a log axis.

    Returns the maximum drift that appears in the figure, for cross-checking
    against the run's summary.json.
    """
    cols = read_invariants(Path(request.run_dir) / "invariants.csv")
    t = cols["t"][:: request.stride]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    max_drift = 0.0
    for name in quantity_columns(cols):
        drift = relative_drift_series(cols[name])[:: request.stride]
        max_drift = max(max_drift, float(drift.max()))
        ax.plot(t, np.maximum(drift, LOG_FLOOR), label=name, linewidth=1.2)
    if request.log_axes:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("|Q(t)/Q(0) - 1|")
    ax.set_title("Conserved-quantity drift")
    ax.legend(ncol=3, fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, request.out_path)
    return max_drift


def plot_waterfall(request: FigureRequest) -> int:
    """Stacked u(x) snapshots; returns the number of traces drawn."""
    snapshots = list_snapshots(request.run_dir)[:: request.stride]
    fig, ax = plt.subplots(figsize=(7, 5.5))
    t_values = [t for t, _ in snapshots]
    spread = max(t_values) - min(t_values)
    peak = 0.0
    for t, path in snapshots:
        cols = read_fields(path)
        peak = max(peak, float(np.abs(cols["u"]).max()))
    offset_unit = (spread / max(len(snapshots) - 1, 1)) if spread > 0 else 1.0
    scale = 0.9 * offset_unit / max(peak, 1e-30)
    for t, path in snapshots:
        cols = read_fields(path)
        ax.plot(cols["x"], t + scale * cols["u"], color="C0", linewidth=1.0)
    ax.set_xlabel("x")
    ax.set_ylabel("t (trace baseline)")
    ax.set_title("Field evolution")
    _finish(fig, request.out_path)
    return len(snapshots)


def _stability_tables(run_dir: Path) -> list[tuple[str, dict[str, np.ndarray]]]:
    top = Path(run_dir) / "stability.csv"
    if top.exists():
        return [("run", read_stability(top))]
    tables = [
        (seed_dir.parent.name, read_stability(seed_dir))
        for seed_dir in sorted(Path(run_dir).glob("seed_*/stability.csv"))
    ]
    if not tables:
        raise ContractError(f"no stability.csv found under {run_dir}")
    return tables


def plot_stability(request: FigureRequest) -> float:
    """Quotient distance over time against the tracking bound from the summary."""
    tables = _stability_tables(Path(request.run_dir))
    summary = read_summary(request.run_dir)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    top = 0.0
    for label, cols in tables:
        t = cols["t"][:: request.stride]
        d2 = cols["dII"][:: request.stride]
        top = max(top, float(d2.max()))
        ax.plot(t, np.maximum(d2, LOG_FLOOR) if request.log_axes else d2,
                linewidth=1.2, label=label if len(tables) > 1 else "d_II(t)")
    bound = None
    stability = summary.get("stability") or {}
    if stability.get("tracking_bound") is not None:
        bound = float(stability["tracking_bound"])
        ax.axhline(bound, color="C3", linestyle="--", linewidth=1.2,
                   label="tracking bound")
    if request.log_axes:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("d_II")
    ax.set_title("Shape tracking of the perturbed soliton")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, request.out_path)
    return max(top, bound or 0.0)


def plot_bound_check(request: FigureRequest) -> float:
    """Sobolev norm of the state against its time-uniform a-priori bound."""
    cols = read_invariants(Path(request.run_dir) / "invariants.csv")
    t = cols["t"][:: request.stride]
    norm = cols["sobolev"][:: request.stride]
    bound = cols["apriori_bound"][:: request.stride]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(t, norm, label="H1 norm", linewidth=1.4)
    ax.plot(t, bound, label="a-priori bound", linestyle="--", linewidth=1.4)
    ax.fill_between(t, norm, bound, where=bound >= norm, alpha=0.15, color="C2")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.set_title("Norm against its a-priori bound")
    ax.legend(fontsize=9)
    ax.grid(True, alpha=0.3)
    _finish(fig, request.out_path)
    return float((bound - norm).min())


FIGURES = {
    "invariant-drift": plot_invariant_drift,
    "waterfall": plot_waterfall,
    "dII-vs-t": plot_stability,
    "bound-check": plot_bound_check,
}


def render(request: FigureRequest):
    return FIGURES[request.kind](request)
