import math

import numpy as np
import pytest

from uwq.errors import UwqError
from uwq.expansion import (
    ClassParams,
    PolySymbol,
    aw_to_weyl_terms,
    compose_terms,
    compositions,
    expansion_partial_sum,
    gamma_norm_estimate,
    gaussian_moment,
    heat_quarter,
    inverse_aw_recursion,
    moment_coeff,
    multi_factorial,
    poly_allclose,
    poly_derive,
    tau_change_terms,
    transpose_terms,
)
from uwq.weights import WeightSequence

X = PolySymbol.x()
XI = PolySymbol.xi()


def monomials_1d(max_degree):
    return [
        PolySymbol.monomial(1, (i,), (j,))
        for i in range(max_degree + 1)
        for j in range(max_degree + 1 - i)
    ]


def random_polys_2d(seed, count=6, max_degree=5):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        terms = {}
        for _ in range(4):
            xe = tuple(int(v) for v in rng.integers(0, 3, size=2))
            ke = tuple(int(v) for v in rng.integers(0, 3, size=2))
            if sum(xe) + sum(ke) <= max_degree:
                terms[(xe, ke)] = complex(rng.standard_normal(), rng.standard_normal())
        if terms:
            out.append(PolySymbol(2, terms))
    return out


class TestPolySymbol:
    def test_no_zero_terms_stored(self):
        p = PolySymbol(1, {((0,), (1,)): 1.0, ((1,), (0,)): 0.0})
        assert len(p.terms) == 1

    def test_canonical_order_is_graded(self):
        p = X * X + XI + X * XI * XI
        keys = [k for k, _ in p.sorted_terms()]
        degrees = [sum(x) + sum(k) for x, k in keys]
        assert degrees == sorted(degrees)

    def test_evaluate(self):
        p = X * XI + 2.0
        val = p.evaluate((np.array([3.0]),), (np.array([4.0]),))
        assert val.ravel()[0] == pytest.approx(14.0)

    def test_algebra(self):
        assert poly_allclose((X + XI) * (X - XI), X * X - XI * XI)
        assert (X - X).is_zero()

    def test_dimension_mismatch(self):
        with pytest.raises(UwqError):
            X + PolySymbol.x(d=2)


class TestDerive:
    def test_xi_derivative_of_cross_term(self):
        assert poly_allclose(poly_derive(X * XI, alpha=(1,)), X)

    def test_second_x_derivative_of_quartic(self):
        q = X * X * X * X
        assert poly_allclose(poly_derive(q, beta=(2,)), 12.0 * X * X)

    def test_d_convention(self):
        res = poly_derive(X, beta=(1,), convention="D")
        assert poly_allclose(res, PolySymbol.one() * (-1j))


class TestMoments:
    def test_zero_index(self):
        assert moment_coeff((0,), (0,)) == 1.0

    def test_odd_component_vanishes(self):
        assert moment_coeff((1,), (0,)) == 0.0
        assert moment_coeff((2, 1), (0, 0)) == 0.0

    def test_second_moment_against_quadrature(self):
        ts = np.linspace(-12.0, 12.0, 200001)
        quad = np.trapezoid(ts**2 * np.exp(-(ts**2)), ts) / math.sqrt(math.pi)
        assert moment_coeff((2,), (0,)) == pytest.approx(quad, abs=1e-10)
        assert moment_coeff((2,), (0,)) == 0.5

    def test_recurrence_matches_quadrature_to_ten(self):
        ts = np.linspace(-14.0, 14.0, 400001)
        base = np.exp(-(ts**2)) / math.sqrt(math.pi)
        for k in range(0, 11):
            quad = float(np.trapezoid(ts**k * base, ts))
            assert gaussian_moment(k) == pytest.approx(quad, abs=1e-8)

    def test_symmetries(self):
        # invariant under permutations within each index and under swapping
        assert moment_coeff((2, 4), (0, 2)) == moment_coeff((4, 2), (2, 0))
        assert moment_coeff((2, 4), (0, 2)) == moment_coeff((0, 2), (2, 4))


class TestSmoothingExpansion:
    def test_quadratic_symbol(self):
        e = aw_to_weyl_terms(XI * XI, 5)
        assert poly_allclose(e[0], XI * XI)
        assert poly_allclose(e[1], PolySymbol.one() * 0.5)
        assert all(e[j].is_zero() for j in range(2, 6))

    def test_linear_symbol_has_single_term(self):
        e = aw_to_weyl_terms(X)
        assert poly_allclose(expansion_partial_sum(e, len(e)), X)

    def test_quartic_terms(self):
        e = aw_to_weyl_terms(X * X * X * X)
        assert poly_allclose(e[1], 3.0 * X * X)
        assert poly_allclose(e[2], PolySymbol.one() * 0.75)

    def test_full_sum_equals_heat_flow(self):
        for a in monomials_1d(8) + random_polys_2d(21):
            e = aw_to_weyl_terms(a)
            assert poly_allclose(expansion_partial_sum(e, len(e)), heat_quarter(a, +1), rtol=1e-12)


class TestHeatQuarter:
    def test_examples(self):
        assert poly_allclose(heat_quarter(XI * XI), XI * XI + 0.5)
        assert poly_allclose(heat_quarter(X * X * X * X), X * X * X * X + 3.0 * X * X + 0.75)
        assert poly_allclose(heat_quarter(PolySymbol.one(), +1), PolySymbol.one())
        assert poly_allclose(heat_quarter(PolySymbol.one(), -1), PolySymbol.one())

    def test_inverse_round_trip(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            terms = {
                ((int(rng.integers(0, 5)),), (int(rng.integers(0, 5)),)): complex(
                    rng.standard_normal(), rng.standard_normal()
                )
                for _ in range(4)
            }
            p = PolySymbol(1, terms)
            assert poly_allclose(heat_quarter(heat_quarter(p, +1), -1), p, rtol=1e-12)

    def test_bad_sign(self):
        with pytest.raises(UwqError):
            heat_quarter(X, 2)


class TestInverseRecursion:
    def test_first_table_entry(self):
        res = inverse_aw_recursion(XI * XI)
        assert poly_allclose(res.primed[(1, 1)], PolySymbol.one() * 0.5)
        assert poly_allclose(res.a, XI * XI - 0.5)

    def test_constant_is_fixed(self):
        res = inverse_aw_recursion(PolySymbol.one())
        assert poly_allclose(res.a, PolySymbol.one())

    def test_quartic(self):
        res = inverse_aw_recursion(X * X * X * X)
        assert poly_allclose(res.a, X * X * X * X - 3.0 * X * X + 0.75)
        assert poly_allclose(res.a, heat_quarter(X * X * X * X, -1), rtol=1e-12)

    def test_round_trip_over_corpus(self):
        for b in monomials_1d(8) + random_polys_2d(22):
            res = inverse_aw_recursion(b)
            assert poly_allclose(heat_quarter(res.a, +1), b, rtol=1e-12)
            assert poly_allclose(res.a, heat_quarter(b, -1), rtol=1e-12)


class TestTauChange:
    def test_x_independent_is_fixed(self):
        a = XI * XI * XI
        for t1, t in [(0.0, 0.5), (1.0, 0.0), (0.5, 0.25)]:
            assert poly_allclose(tau_change_terms(a, t1, t), a)

    def test_cross_term_picks_up_half_i(self):
        # sign pinned by the kernel round-trip and matrix oracles in quant
        b = tau_change_terms(X * XI, 0.0, 0.5)
        assert poly_allclose(b, X * XI + 0.5j)

    def test_involution(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            terms = {
                ((int(rng.integers(0, 4)),), (int(rng.integers(0, 4)),)): complex(
                    rng.standard_normal(), rng.standard_normal()
                )
                for _ in range(4)
            }
            p = PolySymbol(1, terms)
            back = tau_change_terms(tau_change_terms(p, 0.0, 1.0), 1.0, 0.0)
            assert poly_allclose(back, p, rtol=1e-12)


class TestTranspose:
    def test_weyl_point_reflects_only(self):
        a = X * XI + XI * XI
        assert poly_allclose(transpose_terms(a, 0.5), a.reflect_xi())

    def test_pure_frequency_symbol(self):
        assert poly_allclose(transpose_terms(XI, 0.0), -1.0 * XI)

    def test_cross_term(self):
        # transpose of the product-ordering operator of x*xi
        assert poly_allclose(transpose_terms(X * XI, 0.0), -1.0 * X * XI + 1j)


class TestCompose:
    def test_leibniz_correction(self):
        assert poly_allclose(compose_terms(XI, X), X * XI - 1j)

    def test_frequency_free_left_factor(self):
        a = X * X
        b = X * XI + XI
        assert poly_allclose(compose_terms(a, b), a * b)

    def test_associativity_on_monomials(self):
        monos = [
            PolySymbol.monomial(1, (i,), (j,)) for i in range(3) for j in range(3) if i + j <= 4
        ]
        rng = np.random.default_rng(6)
        for _ in range(12):
            a, b, c = (monos[int(rng.integers(0, len(monos)))] for _ in range(3))
            lhs = compose_terms(compose_terms(a, b), c)
            rhs = compose_terms(a, compose_terms(b, c))
            assert poly_allclose(lhs, rhs, rtol=1e-12)


@pytest.fixture(scope="module")
def params():
    return ClassParams(rho=1.0, h=1.0, m=1.0, weight=WeightSequence.gevrey(2.0))


class TestGammaNorm:

    def test_zero_symbol(self, params):
        assert gamma_norm_estimate(PolySymbol.zero(1), params, 20.0) == 0.0

    def test_unit_symbol(self, params):
        assert gamma_norm_estimate(PolySymbol.one(), params, 20.0) == pytest.approx(1.0)

    def test_quadratic_regression_and_monotonicity(self):
        w = WeightSequence.gevrey(2.0)
        base = ClassParams(rho=1.0, h=1.0, m=1.0, weight=w)
        v1 = gamma_norm_estimate(XI * XI, base, 20.0)
        assert np.isfinite(v1) and v1 > 0
        v_h = gamma_norm_estimate(XI * XI, ClassParams(rho=1.0, h=2.0, m=1.0, weight=w), 20.0)
        v_m = gamma_norm_estimate(XI * XI, ClassParams(rho=1.0, h=1.0, m=2.0, weight=w), 20.0)
        assert v_h <= v1 + 1e-12
        assert v_m <= v1 + 1e-12

    def test_invalid_params(self):
        w = WeightSequence.gevrey(2.0)
        with pytest.raises(UwqError):
            ClassParams(rho=1.5, h=1.0, m=1.0, weight=w)
        with pytest.raises(UwqError):
            ClassParams(rho=0.5, h=-1.0, m=1.0, weight=w)


class TestPartialSum:
    def test_zero_order(self):
        e = aw_to_weyl_terms(XI * XI, 3)
        assert expansion_partial_sum(e, 0).is_zero()

    def test_first_two_terms(self):
        e = aw_to_weyl_terms(XI * XI, 5)
        assert poly_allclose(expansion_partial_sum(e, 2), XI * XI + 0.5)

    def test_out_of_range(self):
        e = aw_to_weyl_terms(XI * XI, 2)
        with pytest.raises(UwqError):
            expansion_partial_sum(e, 7)


class TestHelpers:
    def test_multi_factorial(self):
        assert multi_factorial((3, 2)) == 12

    def test_compositions_count(self):
        assert len(list(compositions(4, 2))) == 5
        assert set(compositions(2, 2)) == {(0, 2), (1, 1), (2, 0)}
