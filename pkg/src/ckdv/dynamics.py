"""Right-hand side of the coupled system and its Hamiltonian generators.

The evolution equations are

    u_t     = -u''' - u u' - (1/4) (sum_i phi_i^2)'
    phi_i,t = -phi_i''' - (1/2) (phi_i u)'

They are generated by half the Hamiltonian under the canonical brackets
{u,u} = d_x delta, {phi_i,phi_j} = delta_ij d_x delta, {u,phi_i} = 0; the
factor of one half is measured, not assumed, by bracket_consistency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import RealField, deriv_values
from .state import CoupledState, StateRate, p_body


@dataclass(frozen=True)
class BracketConvention:
    """Scale s applied to the Hamiltonian when generating the flow d_x(s dH)."""

    generator_scale: float

    def __post_init__(self) -> None:
        if self.generator_scale not in (1.0, 0.5):
            raise ValueError("generator_scale must be 1 or 1/2")


@dataclass(frozen=True)
class BracketReport:
    """Relative flow residuals for both candidate generator scales."""

    residual_half: float
    residual_one: float
    inferred_scale: float


def _dealiased_deriv(state: CoupledState, values: np.ndarray) -> np.ndarray:
    g = state.grid
    vh = np.fft.fft(values) * g.dealias_mask
    mult = 1j * g.k.copy()
    mult[g.nyquist_index] = 0.0
    return np.fft.ifft(mult * vh).real


def rhs(state: CoupledState) -> StateRate:
    """Evolution rate of the coupled system, quadratic products dealiased."""
    g = state.grid
    u = state.u.values
    p = p_body(state).values
    du = -deriv_values(g, u, 3) - _dealiased_deriv(state, 0.5 * u**2 + 0.25 * p)
    dphi = tuple(
        RealField(
            g,
            -deriv_values(g, q.values, 3)
            - 0.5 * _dealiased_deriv(state, u * q.values),
        )
        for q in state.phi
    )
    return StateRate(RealField(g, du), dphi)


def grad_h_u(state: CoupledState) -> RealField:
    """Variational derivative of the Hamiltonian with respect to u."""
    g = state.grid
    u = state.u.values
    p = p_body(state).values
    return RealField(g, -(u**2) - 0.5 * p - 2.0 * deriv_values(g, u, 2))


def grad_h_phi(state: CoupledState, i: int) -> RealField:
    """Variational derivative with respect to component i (0-based)."""
    if not 0 <= i < state.n_components:
        raise IndexError(f"component index {i} out of range 0..{state.n_components - 1}")
    g = state.grid
    q = state.phi[i].values
    return RealField(g, -state.u.values * q - 2.0 * deriv_values(g, q, 2))


def bracket_flow(state: CoupledState, conv: BracketConvention) -> StateRate:
    """Flow d_x(s * dH/d(u, phi)) with the same dealiasing treatment as rhs."""
    g = state.grid
    s = conv.generator_scale
    u = state.u.values
    p = p_body(state).values
    du = s * (
        -2.0 * deriv_values(g, u, 3) - _dealiased_deriv(state, u**2 + 0.5 * p)
    )
    dphi = tuple(
        RealField(
            g,
            s
            * (
                -2.0 * deriv_values(g, q.values, 3)
                - _dealiased_deriv(state, u * q.values)
            ),
        )
        for q in state.phi
    )
    return StateRate(RealField(g, du), dphi)


def _rate_max_abs(a: StateRate, b: StateRate | None = None) -> float:
    worst = 0.0
    for fa, fb in zip(a.fields(), b.fields() if b is not None else a.fields()):
        d = fa.values - fb.values if b is not None else fa.values
        worst = max(worst, float(np.abs(d).max()))
    return worst


def bracket_consistency(state: CoupledState) -> BracketReport:
    """Compare the bracket-generated flow against rhs for s in {1, 1/2}.

    Residuals are max-norm differences normalized by the max-norm of rhs.
    """
    base = rhs(state)
    denom = _rate_max_abs(base)
    if denom == 0.0:
        raise ValueError("degenerate normalization: rhs vanishes on this state")
    residuals = {}
    for s in (0.5, 1.0):
        flow = bracket_flow(state, BracketConvention(s))
        residuals[s] = _rate_max_abs(flow, base) / denom
    inferred = min(residuals, key=residuals.get)
    return BracketReport(
        residual_half=residuals[0.5],
        residual_one=residuals[1.0],
        inferred_scale=inferred,
    )
