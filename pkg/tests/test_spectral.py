import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbmkp_lab.errors import IndexOutOfRange, InvalidGrid, NonFiniteField, NonZeroXMean
from bbmkp_lab.spectral import (
    Field1D,
    Field2D,
    antideriv_x,
    dealias,
    dealias_mask,
    deriv_x,
    deriv_y,
    hk_norm_1d,
    hk_x_norms,
    hk_x_slice_norm,
    hs_minus1_norm,
    hs_norm_2d,
    l2_norm,
    make_grid_1d,
    make_grid_2d,
    w1_norm,
)
from bbmkp_lab._fft import RealPlan


class TestGrids:
    def test_x_coordinates(self):
        g = make_grid_1d(8, 4.0)
        np.testing.assert_allclose(g.x, np.arange(8) * 0.5)

    def test_y_coordinates_centred(self):
        g = make_grid_2d(8, 8, 4.0, 8.0)
        assert g.y[0] == -4.0
        assert g.y[4] == 0.0

    def test_wavenumbers(self):
        g = make_grid_1d(8, 2 * np.pi)
        np.testing.assert_allclose(g.wavenumbers, [0, 1, 2, 3, -4, -3, -2, -1])

    @pytest.mark.parametrize("n, L", [(7, 1.0), (4, 1.0), (8, 0.0), (8, -1.0)])
    def test_invalid(self, n, L):
        with pytest.raises(InvalidGrid):
            make_grid_1d(n, L)

    def test_nonfinite_field(self):
        g = make_grid_1d(8, 1.0)
        with pytest.raises(NonFiniteField):
            Field1D(g, np.full(8, np.nan))

    def test_field_is_read_only(self):
        g = make_grid_1d(8, 1.0)
        f = Field1D(g, np.zeros(8))
        with pytest.raises(ValueError):
            f.values[0] = 1.0


class TestDerivatives:
    def test_deriv_of_sine(self):
        g = make_grid_1d(64, 2 * np.pi)
        f = Field1D(g, np.sin(3 * g.x))
        np.testing.assert_allclose(deriv_x(f).values, 3 * np.cos(3 * g.x), atol=1e-12)
        np.testing.assert_allclose(deriv_x(f, 3).values, -27 * np.cos(3 * g.x), atol=1e-10)

    def test_deriv_y(self):
        g = make_grid_2d(16, 32, 2 * np.pi, 2 * np.pi)
        f = Field2D(g, np.cos(g.x)[:, None] * np.sin(2 * g.y)[None, :])
        expect = 2 * np.cos(g.x)[:, None] * np.cos(2 * g.y)[None, :]
        np.testing.assert_allclose(deriv_y(f).values, expect, atol=1e-12)

    def test_odd_derivative_kills_nyquist(self):
        g = make_grid_1d(8, 8.0)
        f = Field1D(g, np.cos(np.pi * g.x))  # pure Nyquist mode
        assert np.abs(deriv_x(f).values).max() < 1e-14


class TestAntiderivative:
    def test_inverse_of_deriv(self, plane_waves):
        f = plane_waves(1).field()
        back = deriv_x(antideriv_x(f))
        np.testing.assert_allclose(back.values, f.values, atol=1e-10)

    def test_constant_in_x_rejected(self):
        g = make_grid_2d(16, 8, 10.0, 10.0)
        f = Field2D(g, np.broadcast_to(1 / np.cosh(g.y), g.shape))
        with pytest.raises(NonZeroXMean) as info:
            antideriv_x(f)
        assert info.value.y_index is not None

    def test_analytic(self):
        g = make_grid_1d(32, 2 * np.pi)
        f = Field1D(g, np.cos(2 * g.x))
        np.testing.assert_allclose(antideriv_x(f).values, 0.5 * np.sin(2 * g.x), atol=1e-14)


class TestDealias:
    def test_mask_counts(self):
        m = dealias_mask(12)
        assert m.sum() == 9  # |j| <= 4

    def test_rfft_layout_matches_full(self):
        n = 24
        full = dealias_mask(n)
        half = dealias_mask(n, n // 2 + 1)
        np.testing.assert_array_equal(half, full[: n // 2 + 1])

    def test_dealias_2d_shape_check(self):
        g = make_grid_2d(8, 8, 1.0, 1.0)
        with pytest.raises(ValueError):
            dealias(np.ones((3, 8)), g)

    def test_dealias_removes_high_modes(self):
        g = make_grid_1d(12, 1.0)
        c = dealias(np.ones(12), g)
        assert c[5] == 0 and c[4] == 1


def _hk_direct(pw, j, k):
    """sum_i binom(k,i) ||d^i f||^2 from analytic derivatives and the rectangle rule."""
    from math import comb

    y = pw.grid.y[j]
    total = 0.0
    for i in range(k + 1):
        d = pw.slice_derivative(y, i)
        total += comb(k, i) * pw.grid.dx * np.sum(d**2)
    return np.sqrt(total)


def _hs_closed(pw, s):
    g = pw.grid
    return np.sqrt(sum(0.5 * g.Lx * g.Ly * a**2 * (1 + xi**2 + mu**2) ** s for xi, mu, a, _ in pw.wavevectors()))


def _hs_minus1_closed(pw, s):
    g = pw.grid
    return np.sqrt(
        sum(
            0.5 * g.Lx * g.Ly * a**2 * (1 + 1 / abs(xi)) ** 2 * (1 + xi**2 + mu**2) ** s
            for xi, mu, a, _ in pw.wavevectors()
        )
    )


def _w1_closed(pw):
    g = pw.grid
    area = 0.5 * g.Lx * g.Ly

    def part(fn):
        return np.sqrt(sum(area * a**2 * fn(xi, mu) for xi, mu, a, _ in pw.wavevectors()))

    return (
        part(lambda xi, mu: 1.0)
        + part(lambda xi, mu: xi**2)
        + part(lambda xi, mu: xi**4)
        + part(lambda xi, mu: (mu / xi) ** 2)
        + part(lambda xi, mu: mu**2)
    )


SEEDS = list(range(20))


class TestNormOracles:
    @pytest.mark.parametrize("seed", SEEDS)
    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_hk_slice(self, plane_waves, seed, k):
        pw = plane_waves(seed)
        f = pw.field()
        j = seed % pw.grid.ny
        assert hk_x_slice_norm(f, j, k) == pytest.approx(_hk_direct(pw, j, k), rel=1e-10)

    @pytest.mark.parametrize("seed", SEEDS)
    @pytest.mark.parametrize("s", [0, 1, 1.5, 2.5])
    def test_hs(self, plane_waves, seed, s):
        pw = plane_waves(seed)
        assert hs_norm_2d(pw.field(), s) == pytest.approx(_hs_closed(pw, s), rel=1e-10)

    @pytest.mark.parametrize("seed", SEEDS)
    @pytest.mark.parametrize("s", [0, 2])
    def test_hs_minus1(self, plane_waves, seed, s):
        pw = plane_waves(seed)
        assert hs_minus1_norm(pw.field(), s) == pytest.approx(_hs_minus1_closed(pw, s), rel=1e-10)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_w1(self, plane_waves, seed):
        pw = plane_waves(seed)
        assert w1_norm(pw.field()) == pytest.approx(_w1_closed(pw), rel=1e-10)

    def test_rows_match_slices(self, plane_waves):
        f = plane_waves(3).field()
        rows = hk_x_norms(f, 2)
        for j in range(f.grid.ny):
            assert rows[j] == pytest.approx(hk_x_slice_norm(f, j, 2), rel=1e-13)

    def test_parseval(self, rng):
        g = make_grid_1d(64, 7.0)
        f = Field1D(g, rng.normal(size=64))
        assert hk_norm_1d(f, 0) == pytest.approx(l2_norm(f), rel=1e-12)

    def test_h2_dominates_h1(self, plane_waves):
        f = plane_waves(5).field()
        assert np.all(hk_x_norms(f, 2) >= hk_x_norms(f, 1))

    def test_slice_index_out_of_range(self, plane_waves):
        f = plane_waves(0).field()
        with pytest.raises(IndexOutOfRange):
            hk_x_slice_norm(f, f.grid.ny, 1)

    def test_hs_minus1_needs_zero_mean(self):
        g = make_grid_2d(16, 8, 10.0, 10.0)
        with pytest.raises(NonZeroXMean):
            hs_minus1_norm(Field2D(g, np.ones(g.shape)), 1)


class TestRealPlan:
    @pytest.mark.parametrize("shape", [(16,), (16, 8)])
    def test_round_trip_and_inputs_untouched(self, rng, shape):
        plan = RealPlan(shape)
        x = rng.normal(size=shape)
        x0 = x.copy()
        c = plan.forward(x)
        c0 = c.copy()
        back = plan.inverse(c).copy()
        np.testing.assert_array_equal(x, x0)
        np.testing.assert_array_equal(c, c0)
        np.testing.assert_allclose(back, x0, atol=1e-13)

    @pytest.mark.parametrize("shape", [(16,), (12, 8)])
    def test_matches_numpy(self, rng, shape):
        x = rng.normal(size=shape)
        ref = RealPlan(shape, backend="numpy").forward(x).copy()
        np.testing.assert_allclose(RealPlan(shape).forward(x), ref, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(
    m=st.integers(1, 10),
    amp=st.floats(-5, 5, allow_nan=False),
    k=st.integers(0, 3),
)
def test_single_mode_norm(m, amp, k):
    g = make_grid_1d(32, 10.0)
    xi = 2 * np.pi * m / 10.0
    f = Field1D(g, amp * np.cos(xi * g.x))
    expect = abs(amp) * np.sqrt(5.0 * (1 + xi**2) ** k)
    assert hk_norm_1d(f, k) == pytest.approx(expect, rel=1e-11, abs=1e-13)
