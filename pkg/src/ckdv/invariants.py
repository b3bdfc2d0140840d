"""Conserved quantities, Sobolev norm, and the a-priori norm bound.

All integrals are whole-line integrals evaluated on the periodic proxy
domain; the nonlocal matrix additionally relies on the running primitive
anchored at the left edge, so its component fields must be decayed there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import RealField, antiderivative, deriv_values, integrate
from .state import CoupledState, p_body


@dataclass(frozen=True)
class InvariantReport:
    """All monitored functionals of one state at one time."""

    t: float
    h: float
    v: float
    h1: float
    h_half: np.ndarray
    m: np.ndarray
    sobolev_sq: float
    apriori_bound: float
    sup_u: float


@dataclass(frozen=True)
class AprioriData:
    """Ingredients of the time-uniform norm bound computed from t=0 data.

    d = V / (2 sqrt(2)), e = V + H, bound = (d + sqrt(d^2 + 4e)) / 2.
    """

    d: float
    e: float
    bound: float


@dataclass(frozen=True)
class AprioriCheck:
    ok: bool
    worst_margin: float
    worst_t: float


def hamiltonian(state: CoupledState) -> float:
    """Energy integral -u^3/3 - u P/2 + u'^2 + sum phi_i'^2."""
    g = state.grid
    u = state.u.values
    p = p_body(state).values
    ux = deriv_values(g, u, 1)
    density = -(u**3) / 3.0 - 0.5 * u * p + ux**2
    for q in state.phi:
        density += deriv_values(g, q.values, 1) ** 2
    return integrate(RealField(g, density))


def casimir_v(state: CoupledState) -> float:
    """Nonnegative quadratic invariant integral of u^2 + P."""
    g = state.grid
    return integrate(RealField(g, state.u.values**2 + p_body(state).values))


def masses(state: CoupledState) -> tuple[float, np.ndarray]:
    """Mean-field invariants: integral of u and of each component."""
    h1 = integrate(state.u)
    h_half = np.array([integrate(q) for q in state.phi])
    return h1, h_half


def nonlocal_matrix(state: CoupledState, decay_tol: float = 1e-8) -> np.ndarray:
    """Matrix M_ij = integral of phi_i(x) * primitive(phi_j)(x).

    The diagonal collapses to (integral of phi_i)^2 / 2 by the fundamental
    theorem of calculus; off-diagonal entries are genuinely nonlocal and
    generally asymmetric.
    """
    g = state.grid
    n = state.n_components
    primitives = [antiderivative(q, decay_tol=decay_tol) for q in state.phi]
    m = np.empty((n, n))
    for i, q in enumerate(state.phi):
        for j in range(n):
            m[i, j] = integrate(RealField(g, q.values * primitives[j].values))
    return m


def sobolev_h1(a: CoupledState, b: CoupledState | None = None) -> float:
    """H1 norm of the difference of two states (or of a itself if b is None)."""
    g = a.grid
    if b is not None:
        if not g.compatible(b.grid) or a.n_components != b.n_components:
            raise ValueError("states live on incompatible grids")
    total = np.zeros(g.n)
    pairs = zip(a.fields(), b.fields()) if b is not None else ((f, None) for f in a.fields())
    for fa, fb in pairs:
        d = fa.values - fb.values if fb is not None else fa.values
        total += d**2 + deriv_values(g, d, 1) ** 2
    return float(np.sqrt(max(integrate(RealField(g, total)), 0.0)))


def sup_u(state: CoupledState) -> float:
    return float(np.abs(state.u.values).max())


def apriori(state0: CoupledState) -> AprioriData:
    """Norm bound ingredients from the initial values of V and H."""
    v = casimir_v(state0)
    h = hamiltonian(state0)
    d = v / (2.0 * np.sqrt(2.0))
    e = v + h
    disc = d * d + 4.0 * e
    if disc < 0.0:
        raise ValueError(
            f"d^2 + 4e = {disc:.3g} < 0; the bound discriminant must be nonnegative"
        )
    return AprioriData(d=d, e=e, bound=0.5 * (d + np.sqrt(disc)))


def check_apriori(
    records: Sequence[InvariantReport], bound: AprioriData
) -> AprioriCheck:
    """Verify the H1 norm stays under the t=0 bound at every sample."""
    if not records:
        raise ValueError("no records to check")
    worst_margin = np.inf
    worst_t = records[0].t
    for r in records:
        margin = bound.bound - np.sqrt(max(r.sobolev_sq, 0.0))
        if margin < worst_margin:
            worst_margin = margin
            worst_t = r.t
    return AprioriCheck(
        ok=bool(worst_margin >= 0.0),
        worst_margin=float(worst_margin),
        worst_t=float(worst_t),
    )


def invariant_report(
    t: float,
    state: CoupledState,
    apriori_bound: float,
    decay_tol: float = 1e-8,
) -> InvariantReport:
    h1, h_half = masses(state)
    norm = sobolev_h1(state)
    return InvariantReport(
        t=t,
        h=hamiltonian(state),
        v=casimir_v(state),
        h1=h1,
        h_half=h_half,
        m=nonlocal_matrix(state, decay_tol=decay_tol),
        sobolev_sq=norm * norm,
        apriori_bound=apriori_bound,
        sup_u=sup_u(state),
    )


def make_invariant_observer(
    apriori_bound: float, decay_tol: float = 1e-8
) -> Callable[[float, CoupledState], InvariantReport]:
    """Observer for evolve() that records an InvariantReport per sample."""

    def observe(t: float, state: CoupledState) -> InvariantReport:
        return invariant_report(t, state, apriori_bound, decay_tol=decay_tol)

    return observe


def relative_drift(values: Sequence[float], floor: float = 1e-9) -> float:
    """Max relative excursion from the first sample.

    Quantities whose initial magnitude sits below the floor are treated as
    zero-valued: their excursion is measured against the floor instead, so a
    conserved zero does not report a spurious huge relative drift.
    """
    v0 = values[0]
    dq = max(abs(v - v0) for v in values)
    if dq == 0.0:
        return 0.0
    return dq / max(abs(v0), floor)
