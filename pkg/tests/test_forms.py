from fractions import Fraction
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cubeforms.forms import (
    DiffForm,
    Face,
    Polynomial,
    enumerate_sigma,
    evaluate,
    exterior_derivative,
    l2_inner_reference,
    trace,
    wedge,
)

from conftest import form_strategy, nk_pairs


def mono(n, sigma, exps, c=1):
    return DiffForm.monomial_form(n, sigma, exps, c)


class TestEnumerateSigma:
    def test_zero_selection(self):
        assert enumerate_sigma(0, 3) == [()]

    def test_one_forms_2d(self):
        assert enumerate_sigma(1, 2) == [(1,), (2,)]

    def test_two_forms_3d(self):
        assert enumerate_sigma(2, 3) == [(1, 2), (1, 3), (2, 3)]

    @pytest.mark.parametrize("n,k", nk_pairs(4))
    def test_cardinality_and_order(self, n, k):
        sigmas = enumerate_sigma(k, n)
        assert len(sigmas) == comb(n, k)
        assert sigmas == sorted(set(sigmas))

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            enumerate_sigma(-1, 2)
        with pytest.raises(ValueError):
            enumerate_sigma(3, 2)


class TestWedge:
    def test_basis_wedge(self):
        assert wedge(mono(2, (1,), (0, 0)), mono(2, (2,), (0, 0))) == mono(2, (1, 2), (0, 0))

    def test_anticommute_one_forms(self):
        assert wedge(mono(2, (2,), (0, 0)), mono(2, (1,), (0, 0))) == mono(
            2, (1, 2), (0, 0), -1
        )

    def test_repeated_index_annihilates(self):
        f = mono(2, (1,), (1, 0))
        g = mono(2, (1,), (0, 1))
        assert wedge(f, g).is_zero

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            wedge(mono(2, (1,), (0, 0)), mono(3, (1,), (0, 0, 0)))

    @pytest.mark.parametrize("n", [2, 3])
    @given(data=st.data())
    def test_graded_anticommutativity(self, n, data):
        k = data.draw(st.integers(0, n))
        l = data.draw(st.integers(0, n))
        f = data.draw(form_strategy(n, k))
        g = data.draw(form_strategy(n, l))
        sign = -1 if (k * l) % 2 else 1
        assert wedge(f, g) == sign * wedge(g, f)


class TestExteriorDerivative:
    def test_zero_form(self):
        got = exterior_derivative(mono(2, (), (2, 1)))
        want = mono(2, (1,), (1, 1), 2) + mono(2, (2,), (2, 0))
        assert got == want

    def test_one_form(self):
        assert exterior_derivative(mono(2, (2,), (1, 0))) == mono(2, (1, 2), (0, 0))

    def test_dd_zero_example(self):
        assert mono(2, (), (3, 2)).d().d().is_zero

    @pytest.mark.parametrize("n,k", nk_pairs(3))
    @given(data=st.data())
    def test_dd_zero(self, n, k, data):
        f = data.draw(form_strategy(n, k))
        assert f.d().d().is_zero

    @pytest.mark.parametrize("n", [2, 3])
    @given(data=st.data())
    def test_leibniz(self, n, data):
        k = data.draw(st.integers(0, n))
        l = data.draw(st.integers(0, n))
        f = data.draw(form_strategy(n, k))
        g = data.draw(form_strategy(n, l))
        sign = -1 if k % 2 else 1
        assert f.wedge(g).d() == f.d().wedge(g) + sign * f.wedge(g.d())


class TestTrace:
    def test_edge_trace(self):
        f = mono(2, (1,), (1, 0)) + mono(2, (2,), (0, 1))
        got = trace(f, Face(2, {2: 1}))
        assert got == mono(1, (1,), (1,))

    def test_top_form_on_edge_vanishes(self):
        assert trace(mono(2, (1, 2), (0, 0)), Face(2, {2: 0})).is_zero

    def test_vertex_trace(self):
        f = mono(2, (), (1, 0)) + mono(2, (), (0, 1))
        got = trace(f, Face(2, {1: 1, 2: 0}))
        assert got == DiffForm(0, 0, {(): Polynomial.constant(0, 1)})

    @pytest.mark.parametrize("n,k", nk_pairs(3))
    @given(data=st.data())
    def test_trace_commutes_with_d(self, n, k, data):
        f = data.draw(form_strategy(n, k))
        fixed_count = data.draw(st.integers(0, n))
        coords = data.draw(
            st.permutations(list(range(1, n + 1))).map(lambda p: p[:fixed_count])
        )
        values = data.draw(st.tuples(*([st.sampled_from([0, 1])] * fixed_count)))
        face = Face(n, dict(zip(coords, values)))
        assert trace(f.d(), face) == trace(f, face).d()


class TestL2Inner:
    def test_constants(self):
        one = mono(2, (), (0, 0))
        assert l2_inner_reference(one, one) == 1

    def test_linear_pairing(self):
        assert l2_inner_reference(mono(2, (1,), (1, 0)), mono(2, (1,), (0, 0))) == Fraction(1, 2)

    def test_distinct_components_orthogonal(self):
        assert l2_inner_reference(mono(2, (1,), (0, 0)), mono(2, (2,), (0, 0))) == 0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            l2_inner_reference(mono(2, (1,), (0, 0)), mono(2, (1, 2), (0, 0)))

    @pytest.mark.parametrize("n,k", nk_pairs(3))
    @given(data=st.data())
    def test_symmetric_bilinear_positive(self, n, k, data):
        f = data.draw(form_strategy(n, k))
        g = data.draw(form_strategy(n, k))
        h = data.draw(form_strategy(n, k))
        c = data.draw(st.fractions(min_value=-2, max_value=2, max_denominator=2))
        assert l2_inner_reference(f, g) == l2_inner_reference(g, f)
        assert l2_inner_reference(f + g * c, h) == l2_inner_reference(
            f, h
        ) + c * l2_inner_reference(g, h)
        if not f.is_zero:
            assert l2_inner_reference(f, f) > 0


class TestEvaluate:
    def test_linear_component(self):
        assert evaluate(mono(2, (1,), (1, 0)), (0.5, 0.0)) == {(1,): 0.5}

    def test_zero_form_empty(self):
        assert evaluate(DiffForm.zero(2, 1), (0.3, 0.7)) == {}

    def test_scalar_product(self):
        assert evaluate(mono(2, (), (1, 1)), (1.0, 1.0)) == {(): 1.0}


class TestPolynomial:
    def test_canonical_form_drops_zeros(self):
        p = Polynomial(2, {(1, 0): Fraction(1), (0, 1): Fraction(0)})
        assert (1, 0) in p.terms and (0, 1) not in p.terms

    def test_exact_arithmetic(self):
        third = Polynomial.constant(1, Fraction(1, 3))
        assert (third + third + third) == Polynomial.constant(1, 1)

    def test_integral_box(self):
        p = Polynomial.monomial(2, (1, 2))
        assert p.integral_box() == Fraction(1, 6)
        assert p.integral_box(Fraction(1, 2)) == Fraction(1, 8) * Fraction(1, 24)

    def test_compose(self):
        p = Polynomial.monomial(2, (2, 1))
        x_plus_y = Polynomial(2, {(1, 0): 1, (0, 1): 1})
        y_only = Polynomial.variable(2, 2)
        got = p.compose([x_plus_y, y_only])
        want = (x_plus_y * x_plus_y) * y_only
        assert got == want
