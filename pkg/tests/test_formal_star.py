from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from udfq import formal_star as fs
from udfq.symexpr import ONE, I, parse, var

RN2 = fs.InvariantFrame.for_group("rn", 2)
W01 = fs.w_from_wedges([(0, 1)], 2)


def moyal(u, v, N=4):
    return fs.moyal_invariant_star(u, v, RN2, W01, N)


def test_canonical_commutator():
    left, right = moyal(var(0), var(1), 2), moyal(var(1), var(0), 2)
    assert left[0] == right[0] == var(0) * var(1)
    # x0*x1 - x1*x0 = hbar / i
    assert left[1] - right[1] == -I
    assert left[2].is_zero() and right[2].is_zero()


def test_unit_and_classical_limit():
    u = parse("x0^2*exp(x1) + x1^3")
    r = moyal(u, ONE)
    assert r[0] == u and all(r[k].is_zero() for k in range(1, 5))
    v = parse("x0*x1^2")
    assert moyal(u, v)[0] == u * v


def test_first_order_is_half_poisson_bracket():
    u, v = parse("x0^3 + x0*x1"), parse("exp(x0)*x1^2")
    pb = u.diff(0) * v.diff(1) - u.diff(1) * v.diff(0)
    assert moyal(u, v, 1)[1] == pb * Fraction(1, 2) * (-I)


polys = st.sampled_from(fs.monomials(2, 3)[1:] + [parse("x0^2 - 3*x1"), parse("exp(x0)*x1")])


@given(polys, polys, polys)
@settings(max_examples=40, deadline=None)
def test_moyal_associative_on_samples(u, v, w):
    assert fs.check_associativity_formal(moyal, u, v, w, 4).passed


def test_position_dependent_nonantisymmetric_w_fails_at_order_two():
    w = [[0, ONE + var(1)], [-1, 0]]

    def star(a, b):
        return fs.bidifferential_star(a, b, RN2.ops, w, 3)

    r = fs.check_associativity_formal(star, parse("x0^3*x1"), parse("x1^3 + x0*x1"), parse("exp(x0)*x1^2"), 3)
    assert not r.passed and r.first_violation == 2


def test_constant_nonantisymmetric_w_stays_associative():
    w = [[0, 1], [0, 0]]

    def star(a, b):
        return fs.bidifferential_star(a, b, RN2.ops, w, 3)

    assert fs.check_associativity_formal(star, parse("x0^2*x1"), parse("x1^2 + x0"), parse("x0*x1^2"), 3).passed


def test_book_frame_fields_commute_and_product_is_associative():
    frame = fs.InvariantFrame.for_group("book")
    frame.check_commuting()
    names = ["a", "v1", "v2"]
    u, v, w = parse("v1^2*exp(a)", names), parse("a*v2 + v1", names), parse("v2^2*v1", names)

    def star(x, y):
        return fs.moyal_invariant_star(x, y, frame, W01, 3)

    assert fs.check_associativity_formal(star, u, v, w, 3).passed


def test_noncommuting_frame_is_rejected():
    ops = [(ONE, 0 * ONE), (0 * ONE, var(0))]
    frame = fs.InvariantFrame.from_operators(ops, 2)
    with pytest.raises(fs.NonCommutingFrame):
        frame.check_commuting()


def test_weyl_symbol_product_matches_moyal():
    a, b = parse("x0^2*x1"), parse("x1^2 + x0")
    ref = fs.moyal_symbol_star(a, b, 1, 3)
    via = fs.ordered_symbol_star(a, b, 1, Fraction(1, 2), 3)
    assert all(ref[k] == via[k] for k in range(4))


def test_standard_ordering_first_correction():
    # symbols (x, p) on R^1: x *_0 p = xp, p *_0 x = xp - t
    x, p = var(0), var(1)
    assert fs.ordered_symbol_star(x, p, 1, 0, 2)[1].is_zero()
    assert fs.ordered_symbol_star(p, x, 1, 0, 2)[1] == -ONE
