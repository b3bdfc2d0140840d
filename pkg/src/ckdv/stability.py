"""Orbital-stability experiments for the ground state and the one-soliton.

Two distances are used: d1 is the plain H1 distance; d2 quotients out
spatial translations of u (the components are deliberately left untranslated,
matching the metric the stability estimates are stated in).  The energy
difference dH between a perturbed state and the soliton is sandwiched:

    upper:  |dH| <= [max(1, C) + delta/(3 sqrt(2))] * d1^2   at t=0
    lower:   dH  >= (1/6) min(1, C) * d2^2

both on the level set of the quadratic invariant V, which the experiment
enforces by rescaling perturbed states.  Conservation of H and V then turns
the lower bound into time-uniform tracking: d2(t) <= sqrt(6 dH / min(1, C)).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .grid import Grid1D
from .integrator import SolverConfig, evolve
from .invariants import (
    AprioriCheck,
    AprioriData,
    InvariantReport,
    apriori,
    casimir_v,
    check_apriori,
    hamiltonian,
    make_invariant_observer,
    relative_drift,
    sobolev_h1,
)
from .solitons import SolitonSpec, soliton_state
from .state import CoupledState, axpy_state, scale_state, state_from_values

PERTURBATION_MODES = ("u-only", "xi-only", "mixed")

_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0  # golden-section step


class TrackPoint(NamedTuple):
    t: float
    d1: float
    d2: float
    tau_star: float
    sobolev: float


@dataclass(frozen=True)
class DhBound:
    """Outcome of one side of the energy-difference sandwich."""

    ok: bool
    margin: float
    dh: float
    coeff: float
    rhs: float
    d2: float | None = None
    tau_star: float | None = None


@dataclass(frozen=True)
class StabilityRunReport:
    seed: int
    c: float
    delta: float  # realized initial d1
    delta_nominal: float
    dh: float
    upper_coeff: float
    lower_coeff: float
    ok_upper: bool
    ok_lower: bool
    ok_tracking: bool
    margin_upper: float
    margin_lower: float
    tracking_threshold: float
    series: list[TrackPoint]
    invariants: list[InvariantReport]
    snapshots: list[tuple[float, CoupledState]]
    apriori_data: AprioriData | None = None
    apriori_check: AprioriCheck | None = None


@dataclass(frozen=True)
class GroundStateReport:
    seed: int
    delta: float
    apriori_data: AprioriData
    check: AprioriCheck
    series: list[tuple[float, float]]
    invariants: list[InvariantReport]
    snapshots: list[tuple[float, CoupledState]]


def distance_d1(a: CoupledState, b: CoupledState) -> float:
    """Plain H1 distance between two states."""
    return sobolev_h1(a, b)


class _TranslationObjective:
    """Distance-squared to b over translations of a's fields.

    The coarse scan over grid shifts uses one correlation transform; exact
    values are then evaluated as direct spectral differences, which avoids
    the catastrophic cancellation of the norm-minus-correlation form when
    the two states nearly coincide.
    """

    def __init__(self, a: CoupledState, b: CoupledState, translate_xi: bool):
        if not a.grid.compatible(b.grid) or a.n_components != b.n_components:
            raise ValueError("states live on incompatible grids")
        g = a.grid
        self.grid = g
        self.w = 1.0 + g.k**2
        self.scale = g.length / g.n**2
        moving = [(a.u, b.u)]
        static = list(zip(a.phi, b.phi))
        if translate_xi:
            moving += static
            static = []

        self.static_sq = 0.0
        for fa, fb in static:
            dh = np.fft.fft(fa.values - fb.values)
            self.static_sq += self.scale * float(np.sum(self.w * np.abs(dh) ** 2))

        self.a_hats = [np.fft.fft(fa.values) for fa, _ in moving]
        self.b_hats = [np.fft.fft(fb.values) for _, fb in moving]

    def at_grid_shifts(self) -> np.ndarray:
        """Approximate objective at every grid shift (correlation form)."""
        corr = np.zeros(self.grid.n, dtype=complex)
        moving_sq = 0.0
        for ah, bh in zip(self.a_hats, self.b_hats):
            corr += self.w * ah * np.conj(bh)
            moving_sq += self.scale * float(
                np.sum(self.w * (np.abs(ah) ** 2 + np.abs(bh) ** 2))
            )
        cross = self.scale * np.fft.fft(corr).real
        return self.static_sq + moving_sq - 2.0 * cross

    def __call__(self, tau: float) -> float:
        phase = np.exp(-1j * self.grid.k * tau)
        total = self.static_sq
        for ah, bh in zip(self.a_hats, self.b_hats):
            diff = ah * phase - bh
            total += self.scale * float(np.sum(self.w * np.abs(diff) ** 2))
        return total


def distance_d2(
    a: CoupledState, b: CoupledState, translate_xi: bool = False
) -> tuple[float, float]:
    """Translation-quotient distance and the minimizing shift of a's u field.

    A coarse scan over all grid shifts (computed as one correlation transform)
    is refined by golden-section search with fractional spectral shifts in a
    window of one grid spacing around the coarse optimum.
    """
    obj = _TranslationObjective(a, b, translate_xi)
    g = a.grid
    coarse = obj.at_grid_shifts()
    j0 = int(np.argmin(coarse))
    half = 0.5 * g.length
    start_tau = (j0 * g.dx + half) % g.length - half
    # exact evaluations at the coarse optimum and the identity shift
    best_tau, best_val = start_tau, obj(start_tau)
    at_zero = obj(0.0)
    if at_zero < best_val:
        best_tau, best_val = 0.0, at_zero

    lo = start_tau - g.dx
    hi = start_tau + g.dx
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = obj(c), obj(d)
    for _ in range(96):  # 0.618^96 of the bracket: far below round-off
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = obj(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = obj(d)
        if min(fc, fd) < best_val:
            best_val = min(fc, fd)
            best_tau = c if fc < fd else d
        if hi - lo <= 1e-13 * g.dx:
            break

    tau = (best_tau + half) % g.length - half
    return float(np.sqrt(max(best_val, 0.0))), float(tau)


def make_perturbation(
    grid: Grid1D,
    n_components: int,
    delta: float,
    seed: int,
    mode: str = "mixed",
) -> CoupledState:
    """Random smooth increment with H1 norm exactly delta.

    The draw is band-limited to the lowest eighth of the spectrum with a
    steep Gaussian taper inside the band (slow group velocities keep the
    dispersive radiation away from the domain edges over the experiment
    horizons), enveloped by a centered Gaussian whose edge values sit at the
    1e-11 level (deep enough for the running-primitive anchor, shallow
    enough that the envelope's periodic seam does not ring under the band
    projection), and deterministic in the seed.
    """
    if mode not in PERTURBATION_MODES:
        raise ValueError(f"mode must be one of {PERTURBATION_MODES}, got {mode!r}")
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    rng = np.random.default_rng(seed)
    m_max = grid.n // 16
    k_band = 2.0 * np.pi * m_max / grid.length
    k_taper = k_band / 12.0
    sigma = grid.length / 14.0
    envelope = np.exp(-0.5 * (grid.x / sigma) ** 2)
    keep = np.abs(grid.k) <= k_band + 1e-12

    def draw() -> np.ndarray:
        coef = np.zeros(grid.n, dtype=complex)
        weights = np.exp(-((grid.k[: m_max + 1] / k_taper) ** 2))
        re = rng.standard_normal(m_max + 1)
        im = rng.standard_normal(m_max + 1)
        coef[0] = weights[0] * re[0]
        coef[1 : m_max + 1] = weights[1:] * (re[1:] + 1j * im[1:])
        coef[-m_max:] = np.conj(coef[1 : m_max + 1][::-1])
        f = np.fft.ifft(coef).real * envelope
        return np.fft.ifft(np.fft.fft(f) * keep).real

    u = draw()
    phis = [draw() for _ in range(n_components)]
    if mode == "u-only":
        phis = [np.zeros(grid.n) for _ in phis]
    elif mode == "xi-only":
        u = np.zeros(grid.n)
    inc = state_from_values(grid, u, phis)
    nrm = sobolev_h1(inc)
    if delta == 0.0 or nrm == 0.0:
        return scale_state(0.0, inc)
    return scale_state(delta / nrm, inc)


def rescale_to_v(state: CoupledState, v_target: float) -> CoupledState:
    """Scale all fields so the quadratic invariant V hits v_target exactly."""
    v = casimir_v(state)
    if v <= 0.0:
        raise ValueError("cannot rescale a state with vanishing quadratic invariant")
    return scale_state(float(np.sqrt(v_target / v)), state)


def _dh_slack(h_soliton: float) -> float:
    return 1e-12 * max(1.0, abs(h_soliton))


def check_dh_upper(
    spec: SolitonSpec, perturbed: CoupledState, delta: float
) -> DhBound:
    """Evaluate |dH| <= [max(1,C) + delta/(3 sqrt 2)] * delta^2 at t=0."""
    sol = soliton_state(spec, perturbed.grid, perturbed.n_components)
    h_sol = hamiltonian(sol)
    dh = hamiltonian(perturbed) - h_sol
    coeff = max(1.0, spec.c) + delta / (3.0 * np.sqrt(2.0))
    rhs = coeff * delta * delta
    margin = rhs - abs(dh)
    return DhBound(
        ok=bool(margin >= -_dh_slack(h_sol)),
        margin=float(margin),
        dh=float(dh),
        coeff=float(coeff),
        rhs=float(rhs),
    )


def check_dh_lower(
    spec: SolitonSpec, perturbed: CoupledState, translate_xi: bool = False
) -> DhBound:
    """Evaluate dH >= (min(1,C)/6) * d2^2 at t=0 (V-rescaled setting)."""
    sol = soliton_state(spec, perturbed.grid, perturbed.n_components)
    h_sol = hamiltonian(sol)
    dh = hamiltonian(perturbed) - h_sol
    coeff = min(1.0, spec.c) / 6.0
    d2, tau = distance_d2(perturbed, sol, translate_xi=translate_xi)
    rhs = coeff * d2 * d2
    margin = dh - rhs
    return DhBound(
        ok=bool(margin >= -_dh_slack(h_sol)),
        margin=float(margin),
        dh=float(dh),
        coeff=float(coeff),
        rhs=float(rhs),
        d2=d2,
        tau_star=tau,
    )


def _snapshot_indices(n_samples: int, count: int) -> set[int]:
    if count <= 1 or n_samples <= 1:
        return {0}
    idx = np.unique(np.round(np.linspace(0, n_samples - 1, count)).astype(int))
    return set(int(i) for i in idx)


# Recording tolerance for the running-primitive anchor during evolutions.
# Perturbed-soliton flows shed low-amplitude high-wavenumber radiation that
# reaches the domain edge well before the tracking horizon; the M columns of
# the records are reporting-only there, so the guard is relaxed rather than
# aborting the run.
RECORD_DECAY_TOL = 1e-3


def _run_soliton_seed(args: tuple) -> StabilityRunReport:
    (grid, n_components, c, x0, delta, seed, cfg, mode, v_rescale, translate_xi,
     snapshot_count) = args
    spec = SolitonSpec(c, x0)
    sol = soliton_state(spec, grid, n_components)
    inc = make_perturbation(grid, n_components, delta, seed, mode)
    pert = axpy_state(1.0, inc, sol)
    if v_rescale and delta > 0.0:
        pert = rescale_to_v(pert, casimir_v(sol))
    d1_0 = distance_d1(pert, sol)

    upper = check_dh_upper(spec, pert, d1_0)
    lower = check_dh_lower(spec, pert, translate_xi=translate_xi)

    bound = apriori(pert)

    def track(t: float, state: CoupledState) -> TrackPoint:
        d1 = distance_d1(state, sol)
        d2, tau = distance_d2(state, sol, translate_xi=translate_xi)
        return TrackPoint(t, d1, d2, tau, sobolev_h1(state))

    inv_obs = make_invariant_observer(bound.bound, decay_tol=RECORD_DECAY_TOL)
    result = evolve(pert, cfg, observers=[track, inv_obs, lambda t, s: s])
    series: list[TrackPoint] = result.records[0]
    invariants: list[InvariantReport] = result.records[1]
    states: list[CoupledState] = result.records[2]
    snap_at = _snapshot_indices(len(result.times), snapshot_count)
    snapshots = [(result.times[i], states[i]) for i in sorted(snap_at)]

    drift = max(
        relative_drift([r.h for r in invariants]),
        relative_drift([r.v for r in invariants]),
    )
    l = min(1.0, c)
    threshold = float(np.sqrt(6.0 * max(upper.dh, 0.0) / l)) + 1e-6 + 10.0 * drift
    ok_tracking = all(pt.d2 <= threshold for pt in series)

    return StabilityRunReport(
        seed=seed,
        c=c,
        delta=d1_0,
        delta_nominal=delta,
        dh=upper.dh,
        upper_coeff=upper.coeff,
        lower_coeff=lower.coeff,
        ok_upper=upper.ok,
        ok_lower=lower.ok,
        ok_tracking=ok_tracking,
        margin_upper=upper.margin,
        margin_lower=lower.margin,
        tracking_threshold=threshold,
        series=series,
        invariants=invariants,
        snapshots=snapshots,
        apriori_data=bound,
        apriori_check=check_apriori(invariants, bound),
    )


def _run_ground_seed(args: tuple) -> GroundStateReport:
    grid, n_components, delta, seed, cfg, mode, snapshot_count = args
    state0 = make_perturbation(grid, n_components, delta, seed, mode)
    bound = apriori(state0)
    inv_obs = make_invariant_observer(bound.bound, decay_tol=RECORD_DECAY_TOL)
    result = evolve(state0, cfg, observers=[inv_obs, lambda t, s: s])
    invariants: list[InvariantReport] = result.records[0]
    states: list[CoupledState] = result.records[1]
    snap_at = _snapshot_indices(len(result.times), snapshot_count)
    snapshots = [(result.times[i], states[i]) for i in sorted(snap_at)]
    check = check_apriori(invariants, bound)
    series = [(r.t, float(np.sqrt(max(r.sobolev_sq, 0.0)))) for r in invariants]
    return GroundStateReport(
        seed=seed,
        delta=delta,
        apriori_data=bound,
        check=check,
        series=series,
        invariants=invariants,
        snapshots=snapshots,
    )


def resolve_workers(n_tasks: int, workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get("CKDV_THREADS")
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(workers, n_tasks))


def _map_runs(fn, argses: list[tuple], workers: int | None):
    w = resolve_workers(len(argses), workers)
    if w == 1:
        return [fn(a) for a in argses]
    with ProcessPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, argses))


def run_soliton_stability(
    grid: Grid1D,
    n_components: int,
    c: float,
    delta: float,
    seeds: Sequence[int],
    cfg: SolverConfig,
    *,
    mode: str = "mixed",
    v_rescale: bool = True,
    x0: float = 0.0,
    translate_xi: bool = False,
    snapshot_count: int = 9,
    workers: int | None = None,
) -> list[StabilityRunReport]:
    """Perturb the one-soliton, verify both dH bounds at t=0, then track d2."""
    argses = [
        (grid, n_components, c, x0, delta, int(seed), cfg, mode, v_rescale,
         translate_xi, snapshot_count)
        for seed in seeds
    ]
    return _map_runs(_run_soliton_seed, argses, workers)


def run_ground_state_stability(
    grid: Grid1D,
    n_components: int,
    delta: float,
    seeds: Sequence[int],
    cfg: SolverConfig,
    *,
    mode: str = "mixed",
    snapshot_count: int = 9,
    workers: int | None = None,
) -> list[GroundStateReport]:
    """Evolve small random data and verify the a-priori norm bound throughout."""
    argses = [
        (grid, n_components, delta, int(seed), cfg, mode, snapshot_count)
        for seed in seeds
    ]
    return _map_runs(_run_ground_seed, argses, workers)
