import numpy as np
import pytest

from ckdv import (
    SolitonSpec,
    casimir_v,
    deriv,
    hamiltonian,
    make_grid,
    p_body,
    rhs,
    soliton_profile,
    soliton_state,
    tw_residual,
    zero_field,
)


class TestSolitonSpec:
    def test_rejects_nonpositive_speed(self):
        with pytest.raises(ValueError):
            SolitonSpec(0.0)
        with pytest.raises(ValueError):
            SolitonSpec(-1.0)

    def test_peak(self):
        assert SolitonSpec(4.0).peak == 12.0


class TestSolitonProfile:
    def test_unit_speed_peak(self, grid):
        f = soliton_profile(SolitonSpec(1.0), grid)
        j = np.argmax(f.values)
        assert grid.x[j] == pytest.approx(0.0, abs=grid.dx)
        assert f.values.max() == pytest.approx(3.0, abs=1e-10)

    def test_ode_residual_across_speeds(self, fine_grid):
        # fast solitons are narrow; N=1024 resolves the C=4 core, where the
        # default N=512 leaves measurable truncation in the second derivative
        for c in (0.25, 0.5, 1.0, 2.0, 4.0):
            f = soliton_profile(SolitonSpec(c), fine_grid)
            assert tw_residual(f, c) < 1e-10

    def test_speed_scaling_family(self, grid):
        # profile values satisfy f_C(x) = C f_1(sqrt(C) x) exactly
        c = 4.0
        f_c = soliton_profile(SolitonSpec(c), grid)
        expected = c * 3.0 / np.cosh(np.sqrt(c) * grid.x / 2) ** 2
        assert np.abs(f_c.values - expected).max() < 1e-12

    def test_time_argument_translates(self, grid):
        spec = SolitonSpec(1.0, x0=0.0)
        moved = soliton_profile(spec, grid, t=1.0)
        expected = 3.0 / np.cosh((grid.x - 1.0) / 2) ** 2
        assert np.abs(moved.values - expected).max() < 1e-12

    def test_domain_fit_rejected(self):
        small = make_grid(4 * np.pi, 64)
        with pytest.raises(ValueError, match="does not fit"):
            soliton_profile(SolitonSpec(0.25), small)


class TestSolitonState:
    def test_components_vanish(self, grid):
        s = soliton_state(SolitonSpec(2.0), grid, 3)
        assert s.n_components == 3
        assert np.abs(p_body(s).values).max() == 0.0

    def test_invariant_values(self, soliton):
        assert casimir_v(soliton) == pytest.approx(24.0, abs=1e-8)
        assert hamiltonian(soliton) == pytest.approx(-14.4, abs=1e-8)

    def test_traveling_wave_identity(self, fine_grid):
        s = soliton_state(SolitonSpec(1.0), fine_grid, 2)
        rate = rhs(s)
        residual = rate.du.values + 1.0 * deriv(s.u, 1).values
        assert np.abs(residual).max() < 1e-8


class TestTwResidual:
    def test_zero_field(self, grid):
        assert tw_residual(zero_field(grid), 1.0) == 0.0

    def test_scaled_profile_is_not_a_solution(self, grid):
        f = soliton_profile(SolitonSpec(1.0), grid)
        scaled = 1.1 * f
        assert tw_residual(scaled, 1.0) > 1e-2
