"""Closed-form one-soliton profiles and the traveling-wave residual."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid1D, RealField, deriv_values, zero_field
from .state import CoupledState


@dataclass(frozen=True)
class SolitonSpec:
    """Speed parameter C > 0 and initial center x0 of a one-soliton."""

    c: float
    x0: float = 0.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.c) or self.c <= 0:
            raise ValueError(f"soliton speed must be positive, got {self.c}")

    @property
    def peak(self) -> float:
        return 3.0 * self.c


def _wrap(grid: Grid1D, arg: np.ndarray) -> np.ndarray:
    half = 0.5 * grid.length
    return (arg + half) % grid.length - half


def soliton_profile(spec: SolitonSpec, grid: Grid1D, t: float = 0.0) -> RealField:
    """Profile 3C sech^2(sqrt(C) (x - x0 - C t) / 2), periodically wrapped.

    The profile solves f'' + f^2/2 = C f with decaying tails; the grid must
    be wide enough that those tails fall below 1e-10 at the domain edges.
    """
    arg = _wrap(grid, grid.x - spec.x0 - spec.c * t)
    values = spec.peak / np.cosh(0.5 * np.sqrt(spec.c) * arg) ** 2
    boundary = spec.peak / np.cosh(0.25 * np.sqrt(spec.c) * grid.length) ** 2
    if boundary > 1e-10:
        raise ValueError(
            f"soliton with C={spec.c} does not fit the domain: boundary value "
            f"{boundary:.3g} exceeds 1e-10"
        )
    return RealField(grid, values)


def soliton_state(
    spec: SolitonSpec, grid: Grid1D, n_components: int = 2
) -> CoupledState:
    """One-soliton initial state: u is the profile, all components zero."""
    z = zero_field(grid)
    return CoupledState(
        soliton_profile(spec, grid, 0.0), tuple(z for _ in range(n_components))
    )


def tw_residual(f: RealField, c: float) -> float:
    """Max-norm of f'' + f^2/2 - C f, the traveling-wave equation residual."""
    r = deriv_values(f.grid, f.values, 2) + 0.5 * f.values**2 - c * f.values
    return float(np.abs(r).max())
