import random
from fractions import Fraction

import numpy as np
import pytest

from cubeforms.forms import (
    DiffForm,
    Polynomial,
    enumerate_sigma,
    l2_inner_box,
    l2_inner_reference,
)
from cubeforms.mapping import (
    MultilinearMap,
    SingularMapError,
    check_diffeo,
    compose_affine,
    jacobian,
    map_from_vertices,
    pullback_polynomial,
    pushforward_eval,
)
from cubeforms.spaces import build_P, build_Qminus, in_span
from cubeforms.verify import random_rational_affine, random_rational_multilinear


def trapezoid_map(d=Fraction(1, 2)):
    return map_from_vertices(
        {(0, 0): (0, 0), (1, 0): (1, 0), (0, 1): (0, 1 - d), (1, 1): (1, 1 + d)}
    )


class TestMapFromVertices:
    def test_identity(self):
        fmap = map_from_vertices(
            {a: a for a in [(0, 0), (1, 0), (0, 1), (1, 1)]}
        )
        assert fmap.coeffs == MultilinearMap.identity(2).coeffs
        assert fmap.is_affine

    def test_dilation(self):
        h = Fraction(1, 3)
        fmap = map_from_vertices(
            {a: (h * a[0], h * a[1]) for a in [(0, 0), (1, 0), (0, 1), (1, 1)]}
        )
        assert fmap.coeffs == MultilinearMap.dilation(2, h).coeffs

    def test_trapezoid_coefficients(self):
        d = Fraction(1, 2)
        fmap = trapezoid_map(d)
        # F(x, y) = (x, y (1 - d + 2 d x))
        assert fmap.component_poly(1) == Polynomial.variable(2, 1)
        want = Polynomial(2, {(0, 1): 1 - d, (1, 1): 2 * d})
        assert fmap.component_poly(2) == want
        assert not fmap.is_affine

    def test_missing_corner(self):
        with pytest.raises(ValueError):
            map_from_vertices({(0, 0): (0, 0), (1, 0): (1, 0), (0, 1): (0, 1)})

    def test_corner_interpolation_exact(self, rng):
        fmap = random_rational_multilinear(3, rng)
        for alpha in [(0, 0, 0), (1, 0, 1), (1, 1, 1)]:
            vals = fmap.eval_exact(alpha)
            assert all(isinstance(v, Fraction) for v in vals)


class TestJacobian:
    def test_identity(self):
        jac = jacobian(MultilinearMap.identity(2))
        assert jac.det_poly == Polynomial.constant(2, 1)

    def test_dilation(self):
        h = Fraction(2)
        jac = jacobian(MultilinearMap.dilation(2, h))
        assert jac.entries[0][0] == Polynomial.constant(2, h)
        assert jac.entries[0][1].is_zero
        assert jac.det_poly == Polynomial.constant(2, h * h)

    def test_trapezoid_det(self):
        d = Fraction(1, 2)
        jac = jacobian(trapezoid_map(d))
        assert jac.det_poly == Polynomial(2, {(0, 0): 1 - d, (1, 0): 2 * d})

    def test_entries_independent_of_own_variable(self, rng):
        fmap = random_rational_multilinear(3, rng)
        jac = jacobian(fmap)
        for i in range(3):
            for j in range(3):
                assert jac.entries[i][j].degree_in(j + 1) <= 0


class TestCheckDiffeo:
    def test_identity(self):
        assert check_diffeo(MultilinearMap.identity(2))

    def test_trapezoid(self):
        assert check_diffeo(trapezoid_map(Fraction(1, 2)))

    def test_crossed_corners(self):
        fmap = map_from_vertices(
            {(0, 0): (1, 0), (1, 0): (0, 0), (0, 1): (0, 1), (1, 1): (1, 1)}
        )
        assert not check_diffeo(fmap)


class TestPullback:
    def test_identity(self):
        v = DiffForm.monomial_form(2, (1,), (1, 2), Fraction(3, 2))
        assert pullback_polynomial(MultilinearMap.identity(2), v) == v

    def test_dilation_volume(self):
        h = Fraction(1, 2)
        vol = DiffForm.basis_form(2, (1, 2))
        got = pullback_polynomial(MultilinearMap.dilation(2, h), vol)
        assert got == DiffForm.monomial_form(2, (1, 2), (0, 0), h * h)

    def test_trapezoid_volume(self):
        d = Fraction(1, 2)
        got = pullback_polynomial(trapezoid_map(d), DiffForm.basis_form(2, (1, 2)))
        want = DiffForm(2, 2, {(1, 2): Polynomial(2, {(0, 0): 1 - d, (1, 0): 2 * d})})
        assert got == want

    def test_multilinear_pullback_lands_in_qminus(self, rng):
        fmap = random_rational_multilinear(2, rng)
        v = DiffForm.monomial_form(2, (1,), (1, 0))
        assert in_span(build_Qminus(2, 1, 2), pullback_polynomial(fmap, v))

    def test_affine_pullback_stays_polynomial(self, rng):
        amap = random_rational_affine(2, rng)
        for v in build_P(2, 1, 2).basis:
            assert in_span(build_P(2, 1, 2), pullback_polynomial(amap, v))

    def test_naturality(self, rng):
        fmap = random_rational_multilinear(2, rng)
        v = DiffForm.monomial_form(2, (2,), (2, 1)) + DiffForm.monomial_form(
            2, (1,), (0, 2), Fraction(-1, 3)
        )
        assert pullback_polynomial(fmap, v.d()) == pullback_polynomial(fmap, v).d()

    def test_wedge_preservation(self, rng):
        fmap = random_rational_multilinear(3, rng)
        v = DiffForm.monomial_form(3, (1,), (1, 0, 1))
        w = DiffForm.monomial_form(3, (2,), (0, 1, 0), Fraction(2, 5))
        lhs = pullback_polynomial(fmap, v.wedge(w))
        rhs = pullback_polynomial(fmap, v).wedge(pullback_polynomial(fmap, w))
        assert lhs == rhs

    def test_functoriality_with_affine_outer(self, rng):
        inner = random_rational_multilinear(2, rng)
        outer = random_rational_affine(2, rng)
        comp = compose_affine(outer, inner)
        v = DiffForm.monomial_form(2, (1, 2), (1, 1), Fraction(1, 2))
        lhs = pullback_polynomial(comp, v)
        rhs = pullback_polynomial(inner, pullback_polynomial(outer, v))
        assert lhs == rhs

    def test_dilation_l2_scaling(self):
        for n in (1, 2, 3):
            for h in (Fraction(1, 2), Fraction(1, 3), Fraction(2)):
                fmap = MultilinearMap.dilation(n, h)
                for k in range(n + 1):
                    v = DiffForm.monomial_form(
                        n, tuple(range(1, k + 1)), tuple(range(n)), Fraction(2, 3)
                    )
                    lhs = l2_inner_reference(
                        pullback_polynomial(fmap, v), pullback_polynomial(fmap, v)
                    )
                    assert lhs == h ** (2 * k - n) * l2_inner_box(v, v, h)


class TestPushforward:
    def test_identity(self):
        w = DiffForm.monomial_form(2, (1,), (1, 1), Fraction(1, 2))
        got = pushforward_eval(MultilinearMap.identity(2), w, (0.5, 0.25))
        assert got[(1,)] == pytest.approx(0.5 * 0.5 * 0.25)
        assert got[(2,)] == 0.0

    def test_dilation_scaling(self):
        h = 0.5
        fmap = MultilinearMap.dilation(2, Fraction(1, 2))
        w = DiffForm.basis_form(2, (1,)) + DiffForm.basis_form(2, (2,)) * 2
        got = pushforward_eval(fmap, w, (0.3, 0.7))
        assert got[(1,)] == pytest.approx(1 / h)
        assert got[(2,)] == pytest.approx(2 / h)

    def test_round_trip_on_grid(self, rng):
        fmap = random_rational_multilinear(2, rng)
        w = DiffForm.monomial_form(2, (1,), (1, 1)) + DiffForm.monomial_form(
            2, (2,), (0, 2), Fraction(-2, 3)
        )
        jac = jacobian(fmap)
        for xh in [(0.1, 0.2), (0.5, 0.5), (0.9, 0.3)]:
            phys = pushforward_eval(fmap, w, xh)
            df = np.array(
                [[jac.entries[i][j].eval_float(xh) for j in range(2)] for i in range(2)]
            )
            # contract back: (F^* v)_tau = sum_sigma v_sigma det(DF[sigma, tau])
            for tau in enumerate_sigma(1, 2):
                val = sum(
                    phys[sigma] * df[sigma[0] - 1, tau[0] - 1]
                    for sigma in enumerate_sigma(1, 2)
                )
                want = w.components.get(tau, Polynomial.zero(2)).eval_float(xh)
                assert val == pytest.approx(want, abs=1e-12)

    def test_singular_jacobian(self):
        fmap = map_from_vertices(
            {(0, 0): (0, 0), (1, 0): (1, 0), (0, 1): (0, 0), (1, 1): (1, 0)}
        )
        with pytest.raises(SingularMapError):
            pushforward_eval(fmap, DiffForm.basis_form(2, (1,)), (0.5, 0.5))
