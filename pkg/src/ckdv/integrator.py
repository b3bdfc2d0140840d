"""Time evolution: exact dispersion via integrating factor, RK4 nonlinearity.

Every field obeys f_t = -f''' + (nonlinear terms), so the linear part is the
same Airy phase exp(i k^3 dt) for all fields.  The phase is applied exactly
in transform space and only the nonlinear terms are stepped with classical
RK4, which removes the k^3 stiffness from the step-size restriction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .errors import BlowUpError, ConfigError
from .grid import Grid1D, RealField
from .state import CoupledState

BLOWUP_THRESHOLD = 1e8

Observer = Callable[[float, CoupledState], Any]


@dataclass(frozen=True)
class SolverConfig:
    """Fixed-step evolution parameters.

    dt must respect the advective ceiling reported by suggest_dt unless
    force_dt is set; evolve validates this against the initial state.
    """

    dt: float
    t_end: float
    sample_every: int = 1
    dealias: bool = True
    force_dt: bool = False

    def __post_init__(self) -> None:
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise ConfigError(f"dt must be positive and finite, got {self.dt}")
        if not np.isfinite(self.t_end) or self.t_end < 0:
            raise ConfigError(f"t_end must be nonnegative, got {self.t_end}")
        if self.t_end > 0 and self.t_end < self.dt * (1.0 - 1e-12):
            raise ConfigError(f"t_end={self.t_end} is smaller than dt={self.dt}")
        if self.sample_every < 1:
            raise ConfigError(f"sample_every must be >= 1, got {self.sample_every}")


@dataclass(frozen=True)
class EvolveResult:
    final: CoupledState
    times: list[float]
    records: list[list[Any]]


def suggest_dt(grid: Grid1D, state: CoupledState) -> float:
    """Advective CFL ceiling 0.5 dx / max(1, sup|u|); dispersion is exact."""
    return 0.5 * grid.dx / max(1.0, float(np.abs(state.u.values).max()))


class _Stepper:
    """Precomputed phases and masks for repeated steps at one (grid, dt)."""

    def __init__(self, grid: Grid1D, dt: float, dealias: bool):
        self.grid = grid
        self.dt = dt
        k = grid.k
        self.e_half = np.exp(1j * k**3 * (0.5 * dt))
        self.e_full = self.e_half**2
        ik = 1j * k.copy()
        ik[grid.nyquist_index] = 0.0
        mask = grid.dealias_mask if dealias else np.ones(grid.n, dtype=bool)
        self.ik_masked = ik * mask

    def nonlinear(self, hats: list[np.ndarray]) -> list[np.ndarray]:
        u = np.fft.ifft(hats[0]).real
        phis = [np.fft.ifft(h).real for h in hats[1:]]
        p = np.zeros_like(u)
        for q in phis:
            p += q * q
        out = [-self.ik_masked * np.fft.fft(0.5 * u * u + 0.25 * p)]
        for q in phis:
            out.append(-0.5 * self.ik_masked * np.fft.fft(u * q))
        return out

    def step(self, hats: list[np.ndarray]) -> list[np.ndarray]:
        dt, e, e2 = self.dt, self.e_half, self.e_full
        n1 = self.nonlinear(hats)
        n2 = self.nonlinear([e * (h + 0.5 * dt * a) for h, a in zip(hats, n1)])
        n3 = self.nonlinear([e * h + 0.5 * dt * a for h, a in zip(hats, n2)])
        n4 = self.nonlinear([e2 * h + dt * e * a for h, a in zip(hats, n3)])
        return [
            e2 * h + (dt / 6.0) * (e2 * a + 2.0 * e * (b + c) + d)
            for h, a, b, c, d in zip(hats, n1, n2, n3, n4)
        ]


def _to_hats(state: CoupledState, dealias: bool) -> list[np.ndarray]:
    mask = state.grid.dealias_mask if dealias else 1.0
    return [np.fft.fft(f.values) * mask for f in state.fields()]


def _to_state(grid: Grid1D, hats: list[np.ndarray]) -> CoupledState:
    fields = [np.fft.ifft(h).real for h in hats]
    return CoupledState(
        RealField(grid, fields[0]), tuple(RealField(grid, f) for f in fields[1:])
    )


def _hats_look_sane(hats: list[np.ndarray], n: int) -> bool:
    for h in hats:
        if not np.all(np.isfinite(h)):
            return False
        # max|hat|/N lower-bounds sup|f|, so this only fires on true blow-ups
        if np.abs(h).max() / n > BLOWUP_THRESHOLD:
            return False
    return True


def step(state: CoupledState, dt: float) -> CoupledState:
    """Advance one integrating-factor RK4 step of size dt (dt < 0 runs backward)."""
    if not np.isfinite(dt) or dt == 0.0:
        raise ValueError(f"dt must be a nonzero finite number, got {dt}")
    stepper = _Stepper(state.grid, dt, dealias=True)
    hats = [np.fft.fft(f.values) for f in state.fields()]
    hats = stepper.step(hats)
    if not _hats_look_sane(hats, state.grid.n):
        raise BlowUpError(t=dt)
    return _to_state(state.grid, hats)


def evolve(
    state: CoupledState,
    cfg: SolverConfig,
    observers: Sequence[Observer] = (),
) -> EvolveResult:
    """Run repeated steps, invoking observers every sample_every steps.

    Observers are called with (t, state) at t=0, at each sampling time, and
    at the final step; their return values are accumulated per observer.
    """
    grid = state.grid
    ceiling = suggest_dt(grid, state)
    if cfg.dt > ceiling and not cfg.force_dt:
        raise ConfigError(
            f"dt={cfg.dt:.3g} exceeds the stability ceiling {ceiling:.3g}; "
            "set force_dt to override"
        )
    n_steps = int(round(cfg.t_end / cfg.dt)) if cfg.t_end > 0 else 0

    hats = _to_hats(state, cfg.dealias)
    current = _to_state(grid, hats)
    times: list[float] = [0.0]
    records: list[list[Any]] = [[obs(0.0, current)] for obs in observers]

    stepper = _Stepper(grid, cfg.dt, cfg.dealias)
    for i in range(1, n_steps + 1):
        hats = stepper.step(hats)
        t = i * cfg.dt
        if not _hats_look_sane(hats, grid.n):
            raise BlowUpError(t=t, step=i)
        if i % cfg.sample_every == 0 or i == n_steps:
            current = _to_state(grid, hats)
            if max(float(np.abs(f.values).max()) for f in current.fields()) > BLOWUP_THRESHOLD:
                raise BlowUpError(t=t, step=i)
            times.append(t)
            for slot, obs in enumerate(observers):
                records[slot].append(obs(t, current))
    final = _to_state(grid, hats)
    return EvolveResult(final=final, times=times, records=records)
