from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from udfq import lie


@pytest.mark.parametrize("name", list(lie.builtin_algebras()))
def test_builtin_algebras_are_lie(name):
    assert lie.validate(lie.builtin_algebras()[name]) == []


@pytest.mark.parametrize("lam", [Fraction(1, 2), 1, 2])
def test_transvection_tables_are_lie(lam):
    assert lie.validate(lie.transvection_algebra(lam)) == []


def test_jacobi_violation_is_reported():
    # [P,Q]=R, [Q,R]=P, [R,P]=P is antisymmetric but not Jacobi
    alg = lie.LieAlgebra.from_brackets(["P", "Q", "R"], {(0, 1): {2: 1}, (1, 2): {0: 1}, (2, 0): {0: 1}})
    kinds = {v.kind for v in lie.validate(alg)}
    assert kinds == {"jacobi"}


def test_antisymmetry_violation_is_reported():
    alg = lie.LieAlgebra.from_brackets(["P", "Q"], {(0, 1): {1: 1}}, antisymmetrize=False)
    assert "antisymmetry" in {v.kind for v in lie.validate(alg)}


def _classify(alg, w):
    return lie.classify(lie.PreSymplecticPair(alg, lie.parse_wedge(alg, w)))


def test_book_with_a_wedge_x_is_semisimple_case():
    c = _classify(lie.book(), "A^X")
    assert c.tag == lie.CASE1_SEMISIMPLE
    assert len(c.s) == 2


def test_jordan_block_gives_lambda_one():
    c = _classify(lie.jordan_book(1), "A^X")
    assert c.tag == lie.CASE1_NONSEMISIMPLE
    assert c.lam == 1


def test_heisenberg_with_central_direction():
    assert _classify(lie.heisenberg(), "X^Z").tag == lie.CASE2_HEISENBERG


def test_non_closed_orthodual_is_rejected():
    with pytest.raises(lie.NotSubalgebra):
        _classify(lie.heisenberg(), "X^Y")


def test_trivial_bivector_warns():
    alg = lie.book()
    with pytest.warns(UserWarning):
        c = lie.classify(lie.PreSymplecticPair(alg, tuple((0,) * 3 for _ in range(3))))
    assert c.tag == lie.TRIVIAL


def test_bad_bivectors_are_rejected():
    with pytest.raises(ValueError):
        lie.PreSymplecticPair(lie.book(), ((0, 1, 0), (1, 0, 0), (0, 0, 0)))
    with pytest.raises(lie.UnsupportedDimension):
        lie.classify(lie.PreSymplecticPair(lie.axb(), lie.parse_wedge(lie.axb(), "A^E")))


@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=4), min_size=3, max_size=3),
       st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=4), min_size=3, max_size=3))
def test_bracket_is_bilinear_and_antisymmetric(u, v):
    alg = lie.book()
    uv = alg.bracket(u, v)
    assert tuple(-x for x in alg.bracket(v, u)) == uv
    twice = alg.bracket([2 * x for x in u], v)
    assert twice == tuple(2 * x for x in uv)
