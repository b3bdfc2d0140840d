"""Run configuration: JSON schema, defaults, and fail-fast validation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError

DEFAULT_L = 40.0 * math.pi
DEFAULT_N = 512
DEFAULT_COMPONENTS = 2
DEFAULT_DT = 1e-3
DEFAULT_T_END = 10.0
DEFAULT_SAMPLE_EVERY = 100
DEFAULT_C = 1.0
DEFAULT_DELTA = 1e-2

INITIAL_TYPES = ("soliton", "soliton-pair", "random", "file")
EXPERIMENT_KINDS = ("soliton", "ground")


def _require(cond: bool, field_name: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{field_name}: {message}")


def _number(raw: Any, field_name: str) -> float:
    _require(isinstance(raw, (int, float)) and not isinstance(raw, bool),
             field_name, f"expected a number, got {raw!r}")
    value = float(raw)
    _require(math.isfinite(value), field_name, f"must be finite, got {raw!r}")
    return value


def _integer(raw: Any, field_name: str) -> int:
    _require(isinstance(raw, int) and not isinstance(raw, bool),
             field_name, f"expected an integer, got {raw!r}")
    return int(raw)


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration for the CLI commands."""

    length: float = DEFAULT_L
    n_points: int = DEFAULT_N
    components: int = DEFAULT_COMPONENTS
    dt: float | None = DEFAULT_DT  # None means "auto"
    t_end: float = DEFAULT_T_END
    sample_every: int = DEFAULT_SAMPLE_EVERY
    seed: int = 0
    initial: dict[str, Any] = field(
        default_factory=lambda: {"type": "soliton", "C": DEFAULT_C, "x0": 0.0}
    )
    snapshots: int = 5
    force_dt: bool = False
    experiment: dict[str, Any] | None = None
    outdir: str = "out"

    def echo(self) -> dict[str, Any]:
        return {
            "domain": {"L": self.length, "N": self.n_points},
            "components": self.components,
            "dt": self.dt if self.dt is not None else "auto",
            "t_end": self.t_end,
            "sample_every": self.sample_every,
            "seed": self.seed,
            "initial": self.initial,
            "snapshots": self.snapshots,
            "force_dt": self.force_dt,
            "experiment": self.experiment,
            "outdir": self.outdir,
        }


def _validate_initial(raw: dict[str, Any]) -> dict[str, Any]:
    _require(isinstance(raw, dict), "initial", "expected an object")
    kind = raw.get("type")
    _require(kind in INITIAL_TYPES, "initial.type",
             f"must be one of {INITIAL_TYPES}, got {kind!r}")
    out: dict[str, Any] = {"type": kind}
    if kind == "soliton":
        out["C"] = _number(raw.get("C", DEFAULT_C), "initial.C")
        _require(out["C"] > 0, "initial.C", "must be positive")
        out["x0"] = _number(raw.get("x0", 0.0), "initial.x0")
    elif kind == "soliton-pair":
        cs = raw.get("C", [1.0, 0.5])
        xs = raw.get("x0", [-20.0, 10.0])
        _require(isinstance(cs, list) and len(cs) == 2, "initial.C",
                 "expected a list of two speeds")
        _require(isinstance(xs, list) and len(xs) == 2, "initial.x0",
                 "expected a list of two centers")
        out["C"] = [_number(c, "initial.C") for c in cs]
        out["x0"] = [_number(x, "initial.x0") for x in xs]
        for c in out["C"]:
            _require(c > 0, "initial.C", "speeds must be positive")
    elif kind == "random":
        out["delta"] = _number(raw.get("delta", DEFAULT_DELTA), "initial.delta")
        _require(out["delta"] >= 0, "initial.delta", "must be nonnegative")
        out["mode"] = raw.get("mode", "mixed")
        _require(out["mode"] in ("u-only", "xi-only", "mixed"), "initial.mode",
                 f"must be u-only, xi-only or mixed, got {out['mode']!r}")
    else:  # file
        _require(isinstance(raw.get("path"), str), "initial.path",
                 "expected a file path string")
        out["path"] = raw["path"]
    return out


def _validate_experiment(raw: dict[str, Any]) -> dict[str, Any]:
    _require(isinstance(raw, dict), "experiment", "expected an object")
    kind = raw.get("kind")
    _require(kind in EXPERIMENT_KINDS, "experiment.kind",
             f"must be one of {EXPERIMENT_KINDS}, got {kind!r}")
    out = {
        "kind": kind,
        "C": _number(raw.get("C", DEFAULT_C), "experiment.C"),
        "delta": _number(raw.get("delta", DEFAULT_DELTA), "experiment.delta"),
        "seeds": _integer(raw.get("seeds", 20), "experiment.seeds"),
        "mode": raw.get("mode", "mixed"),
        "v_rescale": bool(raw.get("v_rescale", True)),
        "translate_xi": bool(raw.get("translate_xi", False)),
    }
    _require(out["C"] > 0, "experiment.C", "must be positive")
    _require(out["delta"] >= 0, "experiment.delta", "must be nonnegative")
    _require(out["seeds"] >= 1, "experiment.seeds", "must be >= 1")
    _require(out["mode"] in ("u-only", "xi-only", "mixed"), "experiment.mode",
             f"must be u-only, xi-only or mixed, got {out['mode']!r}")
    return out


def config_from_dict(raw: dict[str, Any]) -> RunConfig:
    _require(isinstance(raw, dict), "config", "expected a JSON object")
    known = {"domain", "components", "dt", "t_end", "sample_every", "seed",
             "initial", "snapshots", "force_dt", "experiment", "outdir"}
    for key in raw:
        _require(key in known, key, "unknown configuration field")

    domain = raw.get("domain", {})
    _require(isinstance(domain, dict), "domain", "expected an object")
    length = _number(domain.get("L", DEFAULT_L), "domain.L")
    _require(length > 0, "domain.L", "must be positive")
    n_points = _integer(domain.get("N", DEFAULT_N), "domain.N")
    _require(n_points >= 16 and (n_points & (n_points - 1)) == 0, "domain.N",
             "must be a power of two >= 16")

    components = _integer(raw.get("components", DEFAULT_COMPONENTS), "components")
    _require(1 <= components <= 16, "components", "must be between 1 and 16")

    dt_raw = raw.get("dt", DEFAULT_DT)
    if dt_raw == "auto":
        dt = None
    else:
        dt = _number(dt_raw, "dt")
        _require(dt > 0, "dt", "must be positive (or the string 'auto')")

    t_end = _number(raw.get("t_end", DEFAULT_T_END), "t_end")
    _require(t_end >= 0, "t_end", "must be nonnegative")

    sample_every = _integer(raw.get("sample_every", DEFAULT_SAMPLE_EVERY),
                            "sample_every")
    _require(sample_every >= 1, "sample_every", "must be >= 1")

    seed = _integer(raw.get("seed", 0), "seed")
    snapshots = _integer(raw.get("snapshots", 5), "snapshots")
    _require(snapshots >= 1, "snapshots", "must be >= 1")

    initial = _validate_initial(raw.get("initial",
                                        {"type": "soliton", "C": DEFAULT_C}))
    experiment = raw.get("experiment")
    if experiment is not None:
        experiment = _validate_experiment(experiment)

    outdir = raw.get("outdir", "out")
    _require(isinstance(outdir, str), "outdir", "expected a string")

    return RunConfig(
        length=length,
        n_points=n_points,
        components=components,
        dt=dt,
        t_end=t_end,
        sample_every=sample_every,
        seed=seed,
        initial=initial,
        snapshots=snapshots,
        force_dt=bool(raw.get("force_dt", False)),
        experiment=experiment,
        outdir=outdir,
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config: file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON in {path}: {exc}") from exc
    return config_from_dict(raw)
