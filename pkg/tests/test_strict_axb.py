import math

import numpy as np
import pytest

from udfq import strict_axb as sx
from udfq.symexpr import I, var

U = sx.TestFunction.gaussian(ma=0.2, sa=1.0, ml=0.1, sl=1.0)
V = sx.TestFunction.gaussian(ma=-0.1, sa=0.8, ml=-0.3, sl=1.2)
X0 = (0.1, 0.2)


def test_phase_sample_value():
    assert sx.phase((0, 0), (1, 0), (0, 1)) == pytest.approx(-math.sinh(1.0), abs=1e-15)


def test_phase_is_cyclic_and_left_invariant():
    rng = np.random.default_rng(7)
    for _ in range(50):
        pts = [tuple(rng.uniform(-2, 2, 2)) for _ in range(3)]
        g = tuple(rng.uniform(-2, 2, 2))
        base = sx.phase(*pts)
        assert sx.phase(pts[1], pts[2], pts[0]) == pytest.approx(base, abs=1e-12)
        moved = [sx.group_mul(g, p) for p in pts]
        assert sx.phase(*moved) == pytest.approx(base, abs=1e-11)


def test_group_inverse():
    g = (0.4, -1.3)
    e = sx.group_mul(g, sx.group_inv(g))
    assert e == pytest.approx((0.0, 0.0), abs=1e-15)


def test_closed_form_fourier_matches_quadrature():
    u = sx.TestFunction.parse("gauss(a;0.2,1)*gauss(l;0.1,0.7)*poly(l;1,0.5,-0.3) + 0.5i*gauss(a;0,2)*gauss(l;0,1)")
    l, w = np.polynomial.legendre.leggauss(200)
    l, w = 12 * l, 12 * w
    for a, alpha in [(0.3, 0.0), (-0.5, 1.7), (1.1, -2.4)]:
        numeric = np.sum(w * u(a, l) * np.exp(-1j * alpha * l)) / math.sqrt(2 * math.pi)
        assert complex(u.fourier(a, alpha)) == pytest.approx(numeric, abs=1e-13)


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        sx.TestFunction.parse("gauss(a;0)*gauss(l;0,1)")
    with pytest.raises(ValueError):
        sx.TestFunction.parse("cos(a)")


def test_zero_hbar_is_an_error():
    with pytest.raises(sx.HbarZero):
        sx.star_strict(U, V, X0, 0.0)


def test_small_hbar_matches_first_order():
    hbar = 0.05
    r = sx.star_strict(U, V, X0, hbar)
    uv = U(*X0) * V(*X0)
    first = uv + hbar / 2j * sx.poisson_bracket(U, V, X0)
    assert abs(r.value - first) < 0.5 * hbar ** 2
    assert abs(r.value - uv) > 0.1 * abs(first - uv)
    assert r.error_estimate < 1e-8


def test_strict_product_is_left_invariant():
    g = (0.3, -0.4)
    lhs = sx.star_strict(sx.Translated(U, g), sx.Translated(V, g), X0, 0.3).value
    rhs = sx.star_strict(U, V, sx.group_mul(g, X0), 0.3).value
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_moyal_reference_first_order():
    a, l = var(0), var(1)
    s = sx.moyal_series(a, l, 2)
    assert s[1] == I * (-0.5) or s[1] == -I / 2


def test_formal_t_map_matches_numerical_t_map():
    hbar = 0.1
    T = sx.tmap_formal(3)(U.to_expr())
    for a, l in [(0.0, 0.0), (0.4, -0.7)]:
        approx = sum(hbar ** k * complex(T[k].to_complex([a, l])) for k in range(4))
        exact = complex(sx.tmap_apply(U, hbar, a, l)[0])
        assert exact == pytest.approx(approx, abs=5 * hbar ** 4)


def test_formal_product_first_order_is_half_bracket():
    s = sx.axb_formal_star(U.to_expr(), V.to_expr(), 2)
    assert complex(s[1].to_complex(X0)) == pytest.approx(sx.poisson_bracket(U, V, X0) / 2j, rel=1e-12)


def test_phase_cyclic_symbolically():
    from udfq.suites import check_phase_invariance
    c = check_phase_invariance(samples=100)
    assert c.passed and c.measured["cyclic_exact"]
