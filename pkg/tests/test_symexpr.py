from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from udfq.symexpr import (I, ONE, Expr, FormalSeries, const, cosh, equivalent, exp, parse, sinh, var)

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def polynomials(draw, nvars=3, max_terms=5, max_pow=3):
    e = Expr()
    for _ in range(draw(st.integers(0, max_terms))):
        term = const(draw(coeffs))
        for i in range(nvars):
            for _ in range(draw(st.integers(0, max_pow))):
                term = term * var(i)
        e = e + term
    return e


@st.composite
def expressions(draw):
    p = draw(polynomials())
    q = draw(polynomials(max_terms=2, max_pow=1))
    kind = draw(st.sampled_from(["poly", "exp", "sinh", "cosh"]))
    if kind == "poly":
        return p
    lin = var(0) - var(1) * Fraction(1, 2)
    wrap = {"exp": exp, "sinh": sinh, "cosh": cosh}[kind]
    return p + q * wrap(lin)


@given(expressions())
def test_string_round_trip(e):
    assert parse(e.to_string()) == e


@given(polynomials(), polynomials())
def test_ring_laws(p, q):
    assert p * q == q * p
    assert (p + q) - q == p
    assert p * (q + ONE) == p * q + p


@given(expressions(), expressions(), st.integers(0, 2))
@settings(max_examples=50)
def test_leibniz_rule(p, q, i):
    assert (p * q).diff(i) == p.diff(i) * q + p * q.diff(i)


@given(expressions(), st.integers(0, 2), st.integers(0, 2))
@settings(max_examples=50)
def test_partials_commute(e, i, j):
    assert e.diff(i).diff(j) == e.diff(j).diff(i)


def test_hyperbolic_identities():
    x = var(0)
    assert equivalent(cosh(x) * cosh(x) - sinh(x) * sinh(x), ONE)
    assert exp(x) * exp(-x) == ONE
    assert sinh(-x) == -sinh(x)
    assert sinh(x).diff(0) == cosh(x)


def test_parse_names_and_imaginary_unit():
    e = parse("a*l + I", None)
    assert e == var(0) * var(1) + I
    assert parse("y0*y2", ["y0", "y1", "y2"]) == var(0) * var(2)


def test_evaluation_matches_numbers():
    e = parse("3/2*x0^2*exp(-x1) + sinh(x0 - x1)")
    import math
    val = e.to_complex([0.3, -0.2])
    assert val == pytest.approx(1.5 * 0.09 * math.exp(0.2) + math.sinh(0.5))


def test_equivalent_detects_difference():
    assert equivalent(parse("x0^2 - 1"), (var(0) - 1) * (var(0) + 1))
    assert not equivalent(parse("x0^2"), parse("x0^2 + x1/1000"))


def test_formal_series_truncates_product():
    s = FormalSeries([ONE, var(0)], 2)
    sq = s * s
    assert sq.order == 2
    assert sq[1] == 2 * var(0)
    assert sq[2] == var(0) * var(0)
