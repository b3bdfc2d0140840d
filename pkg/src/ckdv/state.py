"""Coupled field state: one real field u plus a vector of component fields.

The companion field is an expansion over anticommuting algebra generators;
only the real coefficient functions phi_i are ever stored.  Everything the
dynamics needs from the algebra is the positive "body" projection
sum_i phi_i(x)^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .grid import Grid1D, RealField, deriv, zero_field


@dataclass(frozen=True, eq=False)
class CoupledState:
    """Immutable simulation state (u, phi_1..phi_Nc) on a shared grid."""

    u: RealField
    phi: tuple[RealField, ...]

    def __post_init__(self) -> None:
        phi = tuple(self.phi)
        if len(phi) < 1:
            raise ValueError("at least one component field is required")
        for p in phi:
            if not p.grid.compatible(self.u.grid):
                raise ValueError("all component fields must share one grid")
        object.__setattr__(self, "phi", phi)

    @property
    def grid(self) -> Grid1D:
        return self.u.grid

    @property
    def n_components(self) -> int:
        return len(self.phi)

    def fields(self) -> tuple[RealField, ...]:
        return (self.u, *self.phi)


@dataclass(frozen=True, eq=False)
class StateRate:
    """Time derivative of a CoupledState, with matching shapes."""

    du: RealField
    dphi: tuple[RealField, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dphi", tuple(self.dphi))

    def fields(self) -> tuple[RealField, ...]:
        return (self.du, *self.dphi)


StateLike = Union[CoupledState, StateRate]


def _parts(s: StateLike) -> tuple[RealField, tuple[RealField, ...]]:
    if isinstance(s, CoupledState):
        return s.u, s.phi
    return s.du, s.dphi


def zero_state(grid: Grid1D, n_components: int) -> CoupledState:
    z = zero_field(grid)
    return CoupledState(z, tuple(z for _ in range(n_components)))


def state_from_values(
    grid: Grid1D, u: np.ndarray, phi: Sequence[np.ndarray]
) -> CoupledState:
    return CoupledState(RealField(grid, u), tuple(RealField(grid, p) for p in phi))


def p_body(state: CoupledState) -> RealField:
    """Pointwise sum of squared components: the nonnegative body projection."""
    total = np.zeros(state.grid.n)
    for p in state.phi:
        total += p.values**2
    return RealField(state.grid, total)


def p_body_deriv(state: CoupledState) -> RealField:
    """Spectral derivative of the body projection (equals 2 sum phi_i phi_i')."""
    return deriv(p_body(state), 1)


def axpy_state(a: float, x: StateLike, y: CoupledState) -> CoupledState:
    """Componentwise y + a*x; x may be a state or a rate of matching shape."""
    xu, xphi = _parts(x)
    if len(xphi) != y.n_components or not xu.grid.compatible(y.grid):
        raise ValueError("state shapes do not match")
    u = RealField(y.grid, y.u.values + a * xu.values)
    phi = tuple(
        RealField(y.grid, yp.values + a * xp.values) for xp, yp in zip(xphi, y.phi)
    )
    return CoupledState(u, phi)


def scale_state(a: float, s: CoupledState) -> CoupledState:
    return CoupledState(
        RealField(s.grid, a * s.u.values),
        tuple(RealField(s.grid, a * p.values) for p in s.phi),
    )
