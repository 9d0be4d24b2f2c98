import numpy as np
import pytest

from udfq import dressing as dr
from udfq.symexpr import parse

RNG = np.random.default_rng(11)


def test_iwasawa_of_lower_unipotent():
    s = dr.iwasawa_decompose(np.array([[1, 0], [1, 1]], dtype=complex))
    r = 1 / np.sqrt(2)
    assert np.allclose(s.k, [[r, -r], [r, r]], atol=1e-15)
    assert np.allclose(s.g, [[np.sqrt(2), r], [0, r]], atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_iwasawa_factors_have_the_right_shape(seed):
    rng = np.random.default_rng(seed)
    g = dr.random_sl2c(rng)
    s = dr.iwasawa_decompose(g)
    assert np.allclose(s.k.conj().T @ s.k, np.eye(2), atol=1e-13)
    assert abs(np.linalg.det(s.k) - 1) < 1e-13
    assert s.g[1, 0] == 0 and s.g[0, 0].real > 0 and abs(s.g[0, 0].imag) < 1e-13
    assert np.allclose(s.k @ s.g, g, atol=1e-12)


def test_singular_input():
    with pytest.raises(dr.Singular):
        dr.iwasawa_decompose(np.array([[0, 1], [0, 0]], dtype=complex))


def test_book_matrix_realises_group_law():
    a, v, b, w = 0.3, (0.5, -0.2), -0.7, (1.1, 0.4)
    prod = dr.book_matrix(a, *v) @ dr.book_matrix(b, *w)
    expected = (a + b, np.exp(-b) * v[0] + w[0], np.exp(-b) * v[1] + w[1])
    assert np.allclose(dr.book_coords(prod), expected, atol=1e-14)


def test_dressing_is_an_action():
    for _ in range(20):
        g, h, k = dr.random_book(RNG), dr.random_book(RNG), dr.random_su2(RNG)
        assert np.allclose(dr.dress(g, dr.dress(h, k)), dr.dress(g @ h, k), atol=1e-12)
    k = dr.random_su2(RNG)
    assert np.allclose(dr.dress(np.eye(2), k), k)


def test_projection_agrees_with_linear_solve():
    for _ in range(10):
        Z = RNG.normal(size=(2, 2)) + 1j * RNG.normal(size=(2, 2))
        Z -= np.trace(Z) / 2 * np.eye(2)
        assert np.allclose(dr.project_k(Z), dr.sl2_coordinates(Z)[:3], atol=1e-13)


def test_fundamental_fields_match_finite_differences():
    k = dr.random_su2(RNG)
    for X in np.eye(3):
        assert np.allclose(dr.infinitesimal_dressing(X, k), dr.dressing_by_differences(X, k), atol=1e-9)


def test_bivector_vanishes_at_identity_and_routes_agree():
    e = np.eye(2, dtype=complex)
    assert np.all(dr.poisson_bivector_ws([1, 0, 0], [0, 1, 0], e).components == 0)
    k = dr.random_su2(RNG)
    ws = dr.poisson_bivector_ws([1, 0, 0], [0, 1, 0], k).components
    wf = dr.poisson_bivector_fundamental(dr.wedge_matrix([1, 0, 0], [0, 1, 0]), k).components
    assert np.allclose(ws, wf, atol=1e-9)


def test_transported_first_order():
    names = ["y0", "y1", "y2"]
    U, V = parse("y0 + y1*y2", names), parse("y2 - y0*y1", names)
    x = dr.random_su2(RNG)
    r1 = dr.transported_star_first_order(U, V, x, [1, 0, 0], [0, 1, 0])
    r2 = dr.bivector_first_order(U, V, x, [1, 0, 0], [0, 1, 0])
    assert r1 == pytest.approx(r2, rel=1e-8)


def test_exponential_chart_round_trip_and_cut_locus():
    y = np.array([0.3, -0.5, 0.9])
    assert np.allclose(dr.su2_log(dr.su2_exp(y)), y, atol=1e-13)
    with pytest.raises(dr.ChartOutOfRange):
        dr.su2_log(-np.eye(2, dtype=complex))
