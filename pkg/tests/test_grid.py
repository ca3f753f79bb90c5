import math

import numpy as np
import pytest

from uwq.errors import UwqError
from uwq.grid import (
    AxisGrid,
    FunctionGrid,
    PhaseFunctionGrid,
    fourier,
    gaussian_window,
    inner,
    inverse_fourier,
    l2_norm,
    load_function,
    load_phase,
    quadrature,
    save_function,
    save_phase,
)


@pytest.fixture(scope="module")
def axis():
    return AxisGrid(128, 10.0, 1)


def band_limited(axis, seed, half_width=20):
    rng = np.random.default_rng(seed)
    n = axis.n
    spec = np.zeros(n, dtype=complex)
    spec[n // 2 - half_width : n // 2 + half_width] = rng.standard_normal(
        2 * half_width
    ) + 1j * rng.standard_normal(2 * half_width)
    return FunctionGrid(axis, np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(spec))) * n)


class TestAxisGrid:
    def test_duality_relation(self):
        for n, L in [(128, 10.0), (64, 8.0), (32, 2.5)]:
            ax = AxisGrid(n, L, 1)
            assert ax.dx * ax.dxi * ax.n == pytest.approx(2.0 * math.pi, rel=1e-15)

    def test_dual_is_involutive(self, axis):
        assert axis.dual().dual() == axis

    def test_validation(self):
        with pytest.raises(UwqError):
            AxisGrid(100, 10.0, 1)  # not a power of two
        with pytest.raises(UwqError):
            AxisGrid(64, -1.0, 1)
        with pytest.raises(UwqError):
            AxisGrid(64, 8.0, 3)


class TestFourier:
    def test_gaussian_closed_form(self, axis):
        g0 = gaussian_window(axis)
        F = fourier(g0)
        xi = axis.dual().points()
        exact = math.pi ** (-0.25) * math.sqrt(2.0 * math.pi) * np.exp(-(xi**2) / 2.0)
        assert np.max(np.abs(F.values - exact)) < 1e-12

    def test_constant_gives_delta_column(self, axis):
        F = fourier(FunctionGrid(axis, np.ones(axis.n, dtype=complex)))
        expected = np.zeros(axis.n)
        expected[axis.n // 2] = 2.0 * axis.L
        assert np.max(np.abs(F.values - expected)) < 1e-11

    def test_linearity(self, axis):
        u, v = band_limited(axis, 0), band_limited(axis, 1)
        a, b = 0.7 - 0.2j, 1.3 + 0.4j
        lhs = fourier(FunctionGrid(axis, a * u.values + b * v.values)).values
        rhs = a * fourier(u).values + b * fourier(v).values
        assert np.max(np.abs(lhs - rhs)) < 1e-14 * np.max(np.abs(rhs))

    def test_round_trip(self, axis):
        u = band_limited(axis, 2)
        back = inverse_fourier(fourier(u))
        assert np.max(np.abs(back.values - u.values)) < 1e-13 * np.max(np.abs(u.values))

    def test_gaussian_round_trip(self, axis):
        g0 = gaussian_window(axis)
        back = inverse_fourier(fourier(g0))
        assert np.max(np.abs(back.values - g0.values)) < 1e-12

    def test_inverse_of_constant_is_delta(self, axis):
        F = FunctionGrid(axis.dual(), np.ones(axis.n, dtype=complex))
        u = inverse_fourier(F)
        expected = np.zeros(axis.n)
        expected[axis.n // 2] = 1.0 / axis.dx
        assert np.max(np.abs(u.values - expected)) < 1e-10

    def test_parseval(self, axis):
        for seed in range(3):
            u = band_limited(axis, seed)
            F = fourier(u)
            lhs = axis.dxi * np.sum(np.abs(F.values) ** 2)
            rhs = 2.0 * math.pi * axis.dx * np.sum(np.abs(u.values) ** 2)
            assert abs(lhs - rhs) < 1e-12 * rhs

    def test_double_fourier_reflects(self, axis):
        # F F u = 2 pi * u(-x), with reflection taken on the periodic grid
        g0 = gaussian_window(axis)
        FF = fourier(fourier(g0))
        assert FF.axis == axis
        n = axis.n
        reflected = g0.values[(n - np.arange(n)) % n]
        assert np.max(np.abs(FF.values - 2.0 * math.pi * reflected)) < 1e-12


class TestGaussianWindow:
    def test_peak_value(self, axis):
        g0 = gaussian_window(axis)
        assert g0.values[axis.n // 2].real == pytest.approx(math.pi ** (-0.25), abs=1e-15)

    def test_unit_norm(self, axis):
        g0 = gaussian_window(axis)
        sq = quadrature(FunctionGrid(axis, np.abs(g0.values) ** 2))
        assert abs(sq - 1.0) < 1e-12

    def test_modulation_identity(self, axis):
        eta0 = 3.0 * axis.dxi
        g = gaussian_window(axis, y=1.0, eta=eta0)
        base = gaussian_window(axis, y=1.0)
        phase = np.exp(1j * axis.points() * eta0)
        assert np.max(np.abs(g.values - phase * base.values)) < 1e-14

    def test_norm_invariance(self, axis):
        ref = l2_norm(gaussian_window(axis))
        for y, eta in [(2.0, 0.0), (-3.5, 4.0), (4.9, -7.0)]:
            assert l2_norm(gaussian_window(axis, y=y, eta=eta)) == pytest.approx(ref, abs=1e-12)

    def test_off_box_center_warns(self, axis):
        with pytest.warns(UserWarning):
            gaussian_window(axis, y=0.9 * axis.L)


class TestQuadrature:
    def test_gaussian_square(self, axis):
        g0 = gaussian_window(axis)
        assert abs(quadrature(FunctionGrid(axis, np.abs(g0.values) ** 2)) - 1.0) < 1e-12

    def test_zero(self, axis):
        assert quadrature(FunctionGrid.zero(axis)) == 0.0

    def test_odd_function_cancels(self, axis):
        # odd and vanishing at -L, so the half-open grid has full mirrors
        pts = axis.points()
        u = FunctionGrid(axis, pts * np.exp(-(pts**2)))
        assert abs(quadrature(u)) < 1e-13


class TestSerialization:
    def test_function_round_trip(self, axis, tmp_path):
        u = band_limited(axis, 5)
        path = tmp_path / "u.csv"
        save_function(u, path)
        back = load_function(path)
        assert back.axis == axis
        np.testing.assert_allclose(back.values, u.values, rtol=0, atol=1e-16)

    def test_phase_round_trip(self, tmp_path):
        ax = AxisGrid(16, 4.0, 1)
        rng = np.random.default_rng(0)
        a = PhaseFunctionGrid(ax, rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
        path = tmp_path / "a.csv"
        save_phase(a, path)
        back = load_phase(path)
        assert back.xaxis == ax
        np.testing.assert_allclose(back.values, a.values, rtol=0, atol=1e-16)

    def test_header_required(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0,1.0,0.0\n")
        with pytest.raises(UwqError):
            load_function(path)

    def test_phase_kind_enforced(self, axis, tmp_path):
        u = band_limited(axis, 6)
        path = tmp_path / "u.csv"
        save_function(u, path)
        with pytest.raises(UwqError):
            load_phase(path)


class TestTwoDimensions:
    def test_round_trip_2d(self):
        ax = AxisGrid(32, 8.0, 2)
        rng = np.random.default_rng(3)
        u = FunctionGrid(ax, rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32)))
        back = inverse_fourier(fourier(u))
        assert np.max(np.abs(back.values - u.values)) < 1e-13 * np.max(np.abs(u.values))

    def test_gaussian_norm_2d(self):
        ax = AxisGrid(32, 8.0, 2)
        g = gaussian_window(ax)
        assert abs(quadrature(FunctionGrid(ax, np.abs(g.values) ** 2)) - 1.0) < 1e-12
