import numpy as np
import pytest

from ckdv import (
    BracketConvention,
    SolitonSpec,
    bracket_consistency,
    bracket_flow,
    deriv,
    grad_h_phi,
    grad_h_u,
    hamiltonian,
    integrate,
    make_grid,
    rhs,
    soliton_state,
    state_from_values,
    zero_state,
)
from ckdv.grid import RealField, shift_values

from conftest import random_smooth_state


def shift_state(state, s):
    return state_from_values(
        state.grid,
        shift_values(state.grid, state.u.values, s),
        [shift_values(state.grid, p.values, s) for p in state.phi],
    )


class TestRhs:
    def test_zero_is_fixed_point(self, grid):
        rate = rhs(zero_state(grid, 2))
        for f in rate.fields():
            assert np.abs(f.values).max() == 0.0

    def test_soliton_traveling_wave_identity(self, fine_grid):
        # along the closed-form traveling wave, du must equal -C u'
        for c in (0.5, 1.0, 2.0):
            s = soliton_state(SolitonSpec(c), fine_grid, 2)
            rate = rhs(s)
            expected = -c * deriv(s.u, 1).values
            assert np.abs(rate.du.values - expected).max() < 1e-8

    def test_trig_state_analytic(self):
        g = make_grid(2 * np.pi, 32)
        x = g.x
        s = state_from_values(g, np.zeros(g.n), [np.sin(x), np.zeros(g.n)])
        rate = rhs(s)
        assert np.abs(rate.dphi[0].values - np.cos(x)).max() < 1e-12
        assert np.abs(rate.du.values + 0.25 * np.sin(2 * x)).max() < 1e-12

    def test_translation_equivariance(self, grid):
        s = random_smooth_state(grid, 11)
        base = rhs(s)
        for a in (5 * grid.dx, 2.31):
            shifted = rhs(shift_state(s, a))
            for f_shift, f_base in zip(shifted.fields(), base.fields()):
                expected = shift_values(grid, f_base.values, a)
                assert np.abs(f_shift.values - expected).max() < 1e-10

    def test_linearity_in_components(self, grid):
        s = random_smooth_state(grid, 12)
        base = rhs(s)
        u_only = state_from_values(grid, s.u.values, [np.zeros(grid.n)] * 2)
        du0 = rhs(u_only).du.values
        for alpha in (0.0, 1.0, 2.0):
            scaled = state_from_values(
                grid, s.u.values, [alpha * p.values for p in s.phi]
            )
            rate = rhs(scaled)
            for i in range(2):
                assert (
                    np.abs(rate.dphi[i].values - alpha * base.dphi[i].values).max()
                    < 1e-10
                )
            # the body-projection term in du scales quadratically
            expected_du = du0 + alpha**2 * (base.du.values - du0)
            assert np.abs(rate.du.values - expected_du).max() < 1e-10


class TestGradients:
    def test_zero_state(self, grid):
        s = zero_state(grid, 2)
        assert np.abs(grad_h_u(s).values).max() == 0.0
        assert np.abs(grad_h_phi(s, 0).values).max() == 0.0

    def test_u_component_analytic(self, trig_grid):
        x = trig_grid.x
        s = state_from_values(trig_grid, np.sin(x), [np.zeros(trig_grid.n)])
        expected = -np.sin(x) ** 2 + 2 * np.sin(x)
        assert np.abs(grad_h_u(s).values - expected).max() < 1e-12

    def test_phi_component_analytic(self, trig_grid):
        x = trig_grid.x
        s = state_from_values(trig_grid, np.zeros(trig_grid.n), [np.sin(x)])
        assert np.abs(grad_h_phi(s, 0).values - 2 * np.sin(x)).max() < 1e-12

    def test_index_out_of_range(self, grid):
        s = zero_state(grid, 2)
        with pytest.raises(IndexError):
            grad_h_phi(s, 2)
        with pytest.raises(IndexError):
            grad_h_phi(s, -1)

    def test_gateaux_oracle(self, grid):
        # central difference of the energy along random directions
        eps = 1e-5
        for seed in range(100):
            s = random_smooth_state(grid, 1000 + seed, delta=0.5)
            v = random_smooth_state(grid, 2000 + seed, delta=0.5)
            plus = hamiltonian(
                state_from_values(
                    grid,
                    s.u.values + eps * v.u.values,
                    [p.values + eps * q.values for p, q in zip(s.phi, v.phi)],
                )
            )
            minus = hamiltonian(
                state_from_values(
                    grid,
                    s.u.values - eps * v.u.values,
                    [p.values - eps * q.values for p, q in zip(s.phi, v.phi)],
                )
            )
            fd = (plus - minus) / (2 * eps)
            pairing = integrate(
                RealField(grid, grad_h_u(s).values * v.u.values)
            ) + sum(
                integrate(RealField(grid, grad_h_phi(s, i).values * v.phi[i].values))
                for i in range(2)
            )
            assert fd == pytest.approx(pairing, abs=1e-6)


class TestBracketFlow:
    def test_zero_state(self, grid):
        flow = bracket_flow(zero_state(grid, 2), BracketConvention(0.5))
        for f in flow.fields():
            assert np.abs(f.values).max() == 0.0

    def test_half_scale_reproduces_rhs(self, grid):
        for seed in range(5):
            s = random_smooth_state(grid, 60 + seed)
            base = rhs(s)
            flow = bracket_flow(s, BracketConvention(0.5))
            denom = max(np.abs(f.values).max() for f in base.fields())
            for ff, fb in zip(flow.fields(), base.fields()):
                assert np.abs(ff.values - fb.values).max() / denom < 1e-8

    def test_unit_scale_doubles_rhs(self, grid):
        s = random_smooth_state(grid, 70)
        base = rhs(s)
        flow = bracket_flow(s, BracketConvention(1.0))
        denom = max(np.abs(f.values).max() for f in base.fields())
        for ff, fb in zip(flow.fields(), base.fields()):
            assert np.abs(ff.values - 2.0 * fb.values).max() / denom < 1e-8

    def test_rejects_other_scales(self):
        with pytest.raises(ValueError):
            BracketConvention(0.25)


class TestBracketConsistency:
    def test_soliton(self, grid):
        report = bracket_consistency(soliton_state(SolitonSpec(1.0), grid, 2))
        assert report.inferred_scale == 0.5
        assert report.residual_half < 1e-8

    def test_trig_state(self, trig_grid):
        x = trig_grid.x
        s = state_from_values(trig_grid, np.sin(x), [np.cos(x), np.zeros(trig_grid.n)])
        report = bracket_consistency(s)
        assert report.inferred_scale == 0.5

    def test_random_states_separation(self, grid):
        for seed in range(5):
            s = random_smooth_state(grid, 80 + seed)
            report = bracket_consistency(s)
            ratio = report.residual_one / max(report.residual_half, 1e-300)
            assert ratio > 1e6

    def test_zero_state_rejected(self, grid):
        with pytest.raises(ValueError, match="degenerate normalization"):
            bracket_consistency(zero_state(grid, 2))
