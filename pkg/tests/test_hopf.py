import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from udfq import hopf, lie
from udfq.symexpr import exp, sinh, var

HALF = Fraction(1, 2)


@given(st.lists(st.integers(0, 2), min_size=2, max_size=5), st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
@pytest.mark.parametrize("alg", [lie.book(), lie.heisenberg(), lie.jordan_book(1)], ids=["book", "heis", "jordan"])
def test_normal_form_independent_of_rewrite_order(alg, word, seed):
    rng = random.Random(seed)
    default = hopf.pbw_normal_order(alg, word, 4)
    other = hopf.pbw_normal_order(alg, word, 4, chooser=lambda inv: rng.randrange(len(inv)))
    assert default == other


def test_single_swap_rule():
    # X A = A X + t [X, A] = A X - t X in the book algebra
    out = hopf.pbw_normal_order(lie.book(), (1, 0), 2)
    assert out == {(0, (1, 1, 0)): 1, (1, (0, 1, 0)): -1}


def test_truncation_overflow():
    with pytest.raises(hopf.TruncationOverflow):
        hopf.pbw_normal_order(lie.book(), (1, 0), 1, t_degree=2)


@pytest.mark.parametrize("lam", [Fraction(0), HALF, Fraction(1)])
def test_position_momentum_commutator(lam):
    st_ = hopf.lambda_structure(lam, 3)
    x, X = hopf.parse_smash("x@1", st_), hopf.parse_smash("1@X0", st_)
    # X*x - x*X = -t for every ordering
    assert hopf.commutator(X, x, st_) == hopf.parse_smash("-t@1", st_)
    # x * X carries the ordering correction t*lam
    expected = hopf.parse_smash("x@X0", st_) + hopf.parse_smash("t@1", st_).scale(lam)
    assert hopf.lr_smash_multiply(x, X, st_) == expected


@pytest.mark.parametrize("lam", [Fraction(0), HALF, Fraction(1)])
def test_hopf_axioms_hold(lam):
    st_ = hopf.lambda_structure(lam, 3)
    gens = [hopf.parse_smash("x@1", st_), hopf.parse_smash("1@X0", st_)]
    assert all(r.passed for r in hopf.verify_hopf_axioms(st_, gens, 2))


def test_corrupted_antipode_is_detected():
    st_ = hopf.lambda_structure(HALF, 3)
    gens = [hopf.parse_smash("x@1", st_), hopf.parse_smash("1@X0", st_)]
    rep = hopf.verify_hopf_axioms(st_, gens, 2, antipode_sign=1)
    assert any(not r.passed for r in rep if r.name.startswith("antipode"))


def test_coproduct_of_primitive_and_group_like():
    st_ = hopf.lambda_structure(HALF, 3)
    X = hopf.parse_smash("1@X0", st_)
    assert hopf.coproduct_star(X).to_string() == "(1) ⊗ 1 ⊗ X0 + (1) ⊗ X0 ⊗ 1"
    assert hopf.antipode_star(hopf.parse_smash("x@1", st_), st_) == hopf.parse_smash("-x@1", st_)
    assert hopf.counit_star(hopf.parse_smash("exp(x)@1", st_)).to_complex([0.0]) == 1


def test_coefficients_outside_closed_class_are_rejected():
    el = hopf.SmashElement.term(sinh(var(0)) * var(0), (0,), 1, 3)
    with pytest.raises(hopf.NotCoalgebraClosed):
        hopf.coproduct(el)


def test_axb_module_axioms_select_lambda():
    samples = [var(0), exp(var(1)) * var(0)]
    assert hopf.check_module_axioms(hopf.lambda_structure(Fraction(1), 3, "axb"), samples) == []
    assert hopf.check_module_axioms(hopf.lambda_structure(HALF, 3, "axb"), samples)
    assert hopf.check_module_axioms(hopf.left_module_structure("axb", 3, 1), samples) == []


def test_axb_smash_product_is_associative():
    st_ = hopf.left_module_structure("axb", 3, 1)
    els = [hopf.parse_smash(s, st_) for s in ("exp(x0)*x1@1", "1@A", "x1@E", "1@A*E")]
    for a in els:
        for b in els:
            for c in els:
                left = hopf.smash_multiply(hopf.smash_multiply(a, b, st_), c, st_)
                right = hopf.smash_multiply(a, hopf.smash_multiply(b, c, st_), st_)
                assert left == right


def test_twist_paths_agree():
    from udfq.suites import check_twist_paths
    assert check_twist_paths().passed
