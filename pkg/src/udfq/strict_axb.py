"""The strict invariant product on the 'ax+b' group and its formal expansion.

Coordinates ``(a, l)`` with law ``(a, l).(a', l') = (a + a', e^{-a'} l + l')``.
The product is an oscillatory integral with amplitude ``cosh(a1 - a2)`` and
a cyclic three-point phase.  Because the phase is linear in ``l1`` and
``l2`` those integrals are done in closed form through the partial Fourier
transform ``F(u)(a, alpha) = int u(a, l) e^{-i alpha l} dl / sqrt(2 pi)``,
leaving a two-dimensional integral in the ``a`` variables.
"""
from __future__ import annotations

import math
import re
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.hermite_e import hermeval
from numpy.polynomial.legendre import leggauss

from .formal_star import HALF_OVER_I, bidifferential_star, cotangent_ops
from .symexpr import ZERO, Expr, FormalSeries, const, exp, var

SQRT_2PI = math.sqrt(2 * math.pi)


class HbarZero(ValueError):
    pass


class ToleranceNotMet(RuntimeError):
    def __init__(self, msg, estimate=None, value=None):
        super().__init__(msg)
        self.estimate = estimate
        self.value = value


# -- kernel ---------------------------------------------------------------------------------------

def phase(x0, x1, x2):
    """Cyclic sum sinh(a0 - a1) l2 + sinh(a1 - a2) l0 + sinh(a2 - a0) l1."""
    (a0, l0), (a1, l1), (a2, l2) = x0, x1, x2
    return np.sinh(a0 - a1) * l2 + np.sinh(a1 - a2) * l0 + np.sinh(a2 - a0) * l1


def amplitude(x1, x2):
    return np.cosh(x1[0] - x2[0])


def group_mul(g, x):
    return (g[0] + x[0], np.exp(-x[0]) * g[1] + x[1])


def group_inv(g):
    return (-g[0], -np.exp(g[0]) * g[1])


# -- test functions ------------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussTerm:
    """coef * pa(a) e^{-(a-ma)^2/2sa^2} * pl(l) e^{-(l-ml)^2/2sl^2}; pa, pl ascending."""
    coef: complex
    pa: Tuple[float, ...]
    ma: float
    sa: float
    pl: Tuple[float, ...]
    ml: float
    sl: float


def _poly_shift(c: Sequence[float], mu: float) -> np.ndarray:
    """Coefficients of p(mu + y) in y (ascending)."""
    n = len(c)
    out = np.zeros(n, dtype=complex)
    for k, ck in enumerate(c):
        for j in range(k + 1):
            out[j] += ck * math.comb(k, j) * mu ** (k - j)
    return out


class TestFunction:
    """Finite sum of Gaussian x polynomial terms in (a, l)."""

    __test__ = False  # not a pytest class

    def __init__(self, terms: Sequence[GaussTerm]):
        for t in terms:
            if t.sa <= 0 or t.sl <= 0:
                raise ValueError("Gaussian widths must be positive")
            if len(t.pl) > 5:
                raise ValueError("l-polynomial degree must be at most 4")
        self.terms = tuple(terms)

    @classmethod
    def gaussian(cls, ma=0.0, sa=1.0, ml=0.0, sl=1.0, pl=(1.0,), pa=(1.0,), coef=1.0):
        return cls([GaussTerm(complex(coef), tuple(pa), ma, sa, tuple(pl), ml, sl)])

    @classmethod
    def parse(cls, text: str) -> "TestFunction":
        """``gauss(a;m,s)*gauss(l;m,s)*poly(l;c0,c1,..)`` terms joined by ``+``."""
        terms = []
        for chunk in _split_top(text):
            coef = 1.0 + 0j
            pa, pl = [1.0], [1.0]
            ga = gl = None
            for fac in _split_top(chunk, "*"):
                fac = fac.strip()
                m = re.fullmatch(r"(gauss|poly)\(\s*([al])\s*;([^)]*)\)", fac)
                if m is None:
                    try:
                        coef *= complex(fac.replace("I", "j").replace("i", "j"))
                    except ValueError:
                        raise ValueError(f"bad factor {fac!r}") from None
                    continue
                kind, v, args = m.group(1), m.group(2), [float(x) for x in m.group(3).split(",")]
                if kind == "gauss":
                    if len(args) != 2:
                        raise ValueError("gauss takes (var; mean, width)")
                    if v == "a":
                        ga = args
                    else:
                        gl = args
                else:
                    target = pa if v == "a" else pl
                    prod = np.polynomial.polynomial.polymul(target, args)
                    target[:] = list(prod)
            if ga is None or gl is None:
                raise ValueError("each term needs gauss(a;..) and gauss(l;..) factors")
            terms.append(GaussTerm(coef, tuple(pa), ga[0], ga[1], tuple(pl), gl[0], gl[1]))
        return cls(terms)

    def __add__(self, other: "TestFunction") -> "TestFunction":
        return TestFunction(self.terms + other.terms)

    def scale(self, c) -> "TestFunction":
        return TestFunction([GaussTerm(t.coef * c, t.pa, t.ma, t.sa, t.pl, t.ml, t.sl) for t in self.terms])

    def __call__(self, a, l):
        a = np.asarray(a, dtype=float)
        l = np.asarray(l, dtype=float)
        out = 0j
        for t in self.terms:
            out = out + t.coef * np.polynomial.polynomial.polyval(a, t.pa) * np.exp(-(a - t.ma) ** 2 / (2 * t.sa ** 2)) \
                * np.polynomial.polynomial.polyval(l, t.pl) * np.exp(-(l - t.ml) ** 2 / (2 * t.sl ** 2))
        return out

    def fourier(self, a, alpha):
        """Closed-form partial Fourier transform in l."""
        a = np.asarray(a, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        out = 0j
        for t in self.terms:
            prof = t.coef * np.polynomial.polynomial.polyval(a, t.pa) * np.exp(-(a - t.ma) ** 2 / (2 * t.sa ** 2))
            q = _poly_shift(t.pl, t.ml)
            z = t.sl * alpha
            acc = 0j
            for j, qj in enumerate(q):
                if qj == 0:
                    continue
                he = hermeval(z, [0] * j + [1])
                acc = acc + qj * (-1j * t.sl) ** j * he
            out = out + prof * t.sl * np.exp(-1j * alpha * t.ml - z * z / 2) * acc
        return out

    def a_range(self) -> Tuple[float, float]:
        lo = min(t.ma - (9 + len(t.pa)) * t.sa for t in self.terms)
        hi = max(t.ma + (9 + len(t.pa)) * t.sa for t in self.terms)
        return lo, hi

    def alpha_radius(self) -> float:
        return max((9 + 2 * len(t.pl)) / t.sl for t in self.terms)

    def to_expr(self) -> Expr:
        """Exact Expr in (x0 = a, x1 = l) for the formal pipeline."""
        a, l = var(0), var(1)
        out = ZERO
        for t in self.terms:
            fr = lambda x: Fraction(repr(float(x)))
            c = t.coef
            cexpr = const(fr(c.real)) + (const(fr(c.imag)) * const(1j) if c.imag else ZERO)
            pa = sum((const(fr(ci)) * a ** k for k, ci in enumerate(t.pa)), ZERO)
            pl = sum((const(fr(ci)) * l ** k for k, ci in enumerate(t.pl)), ZERO)
            ga = exp(-((a - const(fr(t.ma))) ** 2).scale(Fraction(1) / (2 * fr(t.sa) ** 2)))
            gl = exp(-((l - const(fr(t.ml))) ** 2).scale(Fraction(1) / (2 * fr(t.sl) ** 2)))
            out = out + cexpr * pa * ga * pl * gl
        return out

    def __repr__(self):
        return f"TestFunction({len(self.terms)} terms)"


def _split_top(text: str, sep: str = "+") -> List[str]:
    out, depth, cur = [], 0, []
    prev = ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0 and not (sep == "+" and prev in "eE"):
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
        if not ch.isspace():
            prev = ch
    out.append("".join(cur))
    return [s for s in (x.strip() for x in out) if s]


class Translated:
    """u o L_g for g = (b, w): (a, l) -> u(b + a, e^{-a} w + l)."""

    def __init__(self, u, g):
        self.u = u
        self.g = (float(g[0]), float(g[1]))

    def __call__(self, a, l):
        b, w = self.g
        return self.u(b + np.asarray(a), np.exp(-np.asarray(a)) * w + np.asarray(l))

    def fourier(self, a, alpha):
        b, w = self.g
        a = np.asarray(a, dtype=float)
        return np.exp(1j * alpha * np.exp(-a) * w) * self.u.fourier(a + b, alpha)

    def a_range(self):
        lo, hi = self.u.a_range()
        return lo - self.g[0], hi - self.g[0]

    def alpha_radius(self):
        return self.u.alpha_radius()


# -- quadrature ------------------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadConfig:
    nodes: int = 24          # Gauss-Legendre nodes per panel
    panels: int = 8          # initial panels per axis
    depth: int = 4           # panel doublings allowed
    rel_tol: float = 1e-9
    abs_tol: float = 1e-13
    box: Optional[Tuple[float, float]] = None  # explicit s-box half-widths

    def __post_init__(self):
        if self.nodes < 16:
            raise ValueError("nodes must be >= 16")
        if self.rel_tol < 1e-10 and self.rel_tol != 0:
            raise ValueError("tolerance must be >= 1e-10")


@lru_cache(maxsize=64)
def _gl(n: int):
    return leggauss(n)


def composite_nodes(lo: float, hi: float, panels: int, n: int):
    x, w = _gl(n)
    edges = np.linspace(lo, hi, panels + 1)
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass
class StrictResult:
    value: complex
    error_estimate: float
    nodes_used: int
    runtime_ms: float

    def to_json(self):
        return {"value_re": self.value.real, "value_im": self.value.imag,
                "error_estimate": self.error_estimate, "nodes_used": self.nodes_used,
                "runtime_ms": round(self.runtime_ms, 3)}


def _s_interval(fn_a, fn_alpha, a0: float, h: float) -> Tuple[float, float]:
    """s-range where a0 + h s lies in ``fn_a``'s a-range and |sinh(h s)/h| <= ``fn_alpha``'s radius."""
    r = math.asinh(abs(h) * fn_alpha.alpha_radius()) / abs(h)
    lo_a, hi_a = fn_a.a_range()
    s_lo, s_hi = sorted(((lo_a - a0) / h, (hi_a - a0) / h))
    return max(-r, s_lo), min(r, s_hi)


def _star_grid(Fu, Fv, a0, l0, h, s1, w1, s2, w2):
    S1 = s1[:, None]
    S2 = s2[None, :]
    d = h * (S1 - S2)
    integ = np.cosh(d) * np.exp(1j * l0 * np.sinh(d) / h) \
        * Fu(a0 + h * S1, np.sinh(-h * S2) / h) * Fv(a0 + h * S2, np.sinh(h * S1) / h)
    return (w1[:, None] * w2[None, :] * integ).sum() / (2 * math.pi)


def star_strict(u, v, x0, hbar: float, cfg: QuadConfig = QuadConfig(), raise_on_fail: bool = True) -> StrictResult:
    """Strict product (u * v)(x0) at deformation parameter ``hbar``."""
    if hbar == 0:
        raise HbarZero("hbar must be nonzero")
    t0 = time.perf_counter()
    h = hbar / 2
    a0, l0 = float(x0[0]), float(x0[1])
    if cfg.box is not None:
        i1 = (-cfg.box[0], cfg.box[0])
        i2 = (-cfg.box[1], cfg.box[1])
    else:
        i1 = _s_interval(u, v, a0, h)   # s1 drives u's a-argument and v's frequency
        i2 = _s_interval(v, u, a0, h)
    if i1[0] >= i1[1] or i2[0] >= i2[1]:
        return StrictResult(0j, 0.0, 0, (time.perf_counter() - t0) * 1e3)
    panels = cfg.panels
    prev = None
    total = 0
    for _ in range(cfg.depth + 1):
        s1, w1 = composite_nodes(*i1, panels, cfg.nodes)
        s2, w2 = composite_nodes(*i2, panels, cfg.nodes)
        total += len(s1) * len(s2)
        val = _star_grid(u.fourier, v.fourier, a0, l0, h, s1, w1, s2, w2)
        if prev is not None:
            err = abs(val - prev)
            if err <= max(cfg.rel_tol * abs(val), cfg.abs_tol):
                return StrictResult(complex(val), float(err), total, (time.perf_counter() - t0) * 1e3)
        prev = val
        panels *= 2
    err = float(abs(val - _star_grid(u.fourier, v.fourier, a0, l0, h,
                                     *composite_nodes(*i1, panels // 4, cfg.nodes),
                                     *composite_nodes(*i2, panels // 4, cfg.nodes))))
    if raise_on_fail:
        raise ToleranceNotMet(f"estimate {err:.3e} above tolerance", err, complex(val))
    return StrictResult(complex(val), err, total, (time.perf_counter() - t0) * 1e3)


class StarProduct:
    """u * v as a function, with its partial Fourier transform by 1D quadrature.

    F(u*v)(a0, alpha) = (1/(sqrt(2 pi)|h|)) int da2 F(u)(a2 + asinh(h alpha), sinh(a0 - a2)/h)
                                              F(v)(a2, sinh(a2 + asinh(h alpha) - a0)/h)
    with h = hbar/2.
    """

    def __init__(self, u, v, hbar: float, cfg: QuadConfig = QuadConfig(), inner_nodes: int = 192):
        if hbar == 0:
            raise HbarZero("hbar must be nonzero")
        self.u, self.v, self.hbar, self.cfg = u, v, hbar, cfg
        self.h = hbar / 2
        self.inner_nodes = inner_nodes

    def __call__(self, a, l):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        l = np.atleast_1d(np.asarray(l, dtype=float))
        out = np.array([star_strict(self.u, self.v, (ai, li), self.hbar, self.cfg).value
                        for ai, li in zip(a.ravel(), l.ravel())])
        return out.reshape(a.shape)

    def fourier(self, a0, alpha):
        h = self.h
        a0, alpha = np.broadcast_arrays(np.asarray(a0, dtype=float), np.asarray(alpha, dtype=float))
        shape = a0.shape
        a0 = a0.ravel()
        alpha = alpha.ravel()
        shift = np.arcsinh(h * alpha)
        # a2 must lie in v's a-range, with |sinh(a0 - a2)/h| inside u's frequency support
        ru = math.asinh(abs(h) * self.u.alpha_radius())
        lo_v, hi_v = self.v.a_range()
        lo = np.maximum(lo_v, a0 - ru)
        hi = np.minimum(hi_v, a0 + ru)
        lo_u, hi_u = self.u.a_range()
        lo = np.maximum(lo, lo_u - shift)
        hi = np.minimum(hi, hi_u - shift)
        valid = hi > lo
        hi = np.where(valid, hi, lo + 1)
        x, w = composite_nodes(-1.0, 1.0, max(1, self.inner_nodes // 32), 32)
        mid = (hi + lo) / 2
        half = (hi - lo) / 2
        out = np.empty(a0.shape, dtype=complex)
        chunk = max(1, 2_000_000 // len(x))
        for s in range(0, len(a0), chunk):
            sl = slice(s, s + chunk)
            A2 = mid[sl, None] + half[sl, None] * x[None, :]
            sh = shift[sl, None]
            vals = self.u.fourier(A2 + sh, np.sinh(a0[sl, None] - A2) / h) \
                * self.v.fourier(A2, np.sinh(A2 + sh - a0[sl, None]) / h)
            out[sl] = (vals * w[None, :]).sum(axis=1) * half[sl]
        out = np.where(valid, out, 0) / (SQRT_2PI * abs(h))
        return out.reshape(shape)

    def a_range(self):
        ru = math.asinh(abs(self.h) * self.u.alpha_radius())
        lo, hi = self.v.a_range()
        return lo - ru, hi + ru

    def alpha_radius(self):
        lo_u, hi_u = self.u.a_range()
        lo_v, hi_v = self.v.a_range()
        span = max(abs(hi_u - lo_v), abs(lo_u - hi_v))
        return math.sinh(min(span, 30.0)) / abs(self.h)


def associativity_defect(u, v, w, x0, hbar: float, cfg: QuadConfig = QuadConfig(rel_tol=1e-7),
                         inner_nodes: int = 192) -> Tuple[complex, complex, float]:
    """((u*v)*w)(x0), (u*(v*w))(x0) and their relative difference."""
    uv = StarProduct(u, v, hbar, cfg, inner_nodes)
    vw = StarProduct(v, w, hbar, cfg, inner_nodes)
    left = star_strict(uv, w, x0, hbar, cfg, raise_on_fail=False).value
    right = star_strict(u, vw, x0, hbar, cfg, raise_on_fail=False).value
    return left, right, abs(left - right) / max(abs(left), abs(right), 1e-300)


# -- Moyal reference and the T-map -------------------------------------------------------------------

MOYAL_W = [[0, 1], [-1, 0]]


def moyal_series(u, v, N: int) -> FormalSeries:
    """Moyal product on (a, l) with omega = da ^ dl, coefficients of hbar^k."""
    return bidifferential_star(u, v, cotangent_ops(1), MOYAL_W, N, HALF_OVER_I)


def moyal_reference(u, v, x0, hbar: float, N: int) -> complex:
    if N > 8:
        raise ValueError("N must be at most 8")
    U = u.to_expr() if isinstance(u, TestFunction) else Expr.lift(u)
    V = v.to_expr() if isinstance(v, TestFunction) else Expr.lift(v)
    s = moyal_series(U, V, N)
    return sum(complex(s[k].to_complex(x0)) * hbar ** k for k in range(N + 1))


def _phi_minus_identity(N: int) -> Dict[Tuple[int, int], Fraction]:
    """(2/h) sinh(h alpha/2) - alpha as {(h-power, alpha-power): coeff} through h^N."""
    out = {}
    m = 1
    while 2 * m <= N:
        out[(2 * m, 2 * m + 1)] = Fraction(1, 4 ** m * math.factorial(2 * m + 1))
        m += 1
    return out


@lru_cache(maxsize=None)
def tmap_terms(N: int) -> Tuple[Tuple[Tuple[Fraction, int, int], ...], ...]:
    """T = sum_k h^k T_k with T_k u = sum coef * (-i d_l)^m [(-i l)^n u], listed as (coef, m, n).

    Taylor expansion u^(phi(alpha)) = sum_n (phi - alpha)^n / n! d_alpha^n u^.
    """
    base = _phi_minus_identity(N)
    per_order: List[Dict[Tuple[int, int], Fraction]] = [dict() for _ in range(N + 1)]
    per_order[0][(0, 0)] = Fraction(1)
    power = {(0, 0): Fraction(1)}
    n = 0
    while True:
        n += 1
        nxt = {}
        for (h1, a1), c1 in power.items():
            for (h2, a2), c2 in base.items():
                if h1 + h2 <= N:
                    key = (h1 + h2, a1 + a2)
                    nxt[key] = nxt.get(key, 0) + c1 * c2
        if not nxt:
            break
        power = nxt
        for (hp, ap), c in power.items():
            key = (ap, n)
            per_order[hp][key] = per_order[hp].get(key, 0) + c / math.factorial(n)
    return tuple(tuple((c, m, nn) for (m, nn), c in sorted(d.items())) for d in per_order)


def _apply_tk(terms, e: Expr, lvar: int = 1) -> Expr:
    out = ZERO
    l = var(lvar)
    for c, m, n in terms:
        f = e * l ** n if n else e
        f = f.diff(lvar, m) if m else f
        if f.is_zero():
            continue
        # (-i)^(m+n)
        k = (m + n) % 4
        unit = [1, const(-1j), -1, const(1j)][k]
        f = f * unit if isinstance(unit, Expr) else f.scale(unit)
        out = out + f.scale(c)
    return out


class SeriesOperator:
    """Formal operator sum_k h^k O_k acting on Exprs or FormalSeries."""

    def __init__(self, parts: Sequence[Callable[[Expr], Expr]], order: int):
        self.parts = list(parts)
        self.order = order

    def __call__(self, u) -> FormalSeries:
        N = self.order
        U = u if isinstance(u, FormalSeries) else FormalSeries.constant(Expr.lift(u), N)
        out = [ZERO] * (N + 1)
        for p in range(N + 1):
            if U[p].is_zero():
                continue
            for k in range(N + 1 - p):
                op = self.parts[k]
                if op is None:
                    continue
                out[p + k] = out[p + k] + op(U[p])
        return FormalSeries(out, N)

    def inverse(self) -> "SeriesOperator":
        """Id - R + R^2 - ... with R = (self - Id), truncated."""
        N = self.order

        def inv_apply(u):
            U = u if isinstance(u, FormalSeries) else FormalSeries.constant(Expr.lift(u), N)
            total = U
            cur = U
            sign = -1
            for _ in range(N):
                cur = self._minus_id(cur)
                if all(c.is_zero() for c in cur):
                    break
                total = total + cur.scale(sign)
                sign = -sign
            return total

        return _Wrapped(inv_apply, N)

    def _minus_id(self, U: FormalSeries) -> FormalSeries:
        res = self(U)
        return res - U


class _Wrapped(SeriesOperator):
    def __init__(self, fn, order):
        super().__init__([], order)
        self._fn = fn

    def __call__(self, u):
        return self._fn(u)


def tmap_formal(N: int, lvar: int = 1) -> SeriesOperator:
    terms = tmap_terms(N)
    parts = []
    for k in range(N + 1):
        if k == 0:
            parts.append(lambda e: e)
        elif terms[k]:
            parts.append(lambda e, tk=terms[k]: _apply_tk(tk, e, lvar))
        else:
            parts.append(None)
    return SeriesOperator(parts, N)


def tmap_apply(u, hbar: float, a, l, nodes: int = 512) -> np.ndarray:
    """T(u)(a, l) = F^-1[ F(u)(a, phi(alpha)) ](l) by Gauss-Legendre in alpha."""
    if hbar == 0:
        raise HbarZero("hbar must be nonzero")
    a = np.atleast_1d(np.asarray(a, dtype=float))
    l = np.atleast_1d(np.asarray(l, dtype=float))
    R = u.alpha_radius()
    amax = (2 / abs(hbar)) * math.asinh(abs(hbar) * R / 2)
    x, w = composite_nodes(-amax, amax, max(1, nodes // 32), 32)
    phi = (2 / hbar) * np.sinh(hbar * x / 2)
    A = a.ravel()[:, None]
    L = l.ravel()[:, None]
    vals = u.fourier(A, phi[None, :]) * np.exp(1j * x[None, :] * L)
    return ((vals * w[None, :]).sum(axis=1) / SQRT_2PI).reshape(a.shape)


def axb_formal_star(u, v, N: int) -> FormalSeries:
    """T^-1 (T u *_Moyal T v): the formal expansion of the strict product."""
    T = tmap_formal(N)
    Tinv = T.inverse()
    return Tinv(moyal_series(T(u), T(v), N))


# -- expansion extraction --------------------------------------------------------------------------------

HBAR_SWEEP = (0.4, 0.2, 0.1, 0.05)


def expansion_coefficients(u, v, x0, hbars: Sequence[float] = HBAR_SWEEP, cfg: QuadConfig = QuadConfig(rel_tol=1e-10, abs_tol=1e-14),
                           n_orders: int = 4) -> List[complex]:
    """Leading coefficients c_k of hbar^k in (u*v)(x0).

    The even and odd parts S(h) +- S(-h) are polynomials in h^2, so they are
    fitted (Richardson-style) in h^2 over the sweep.
    """
    hs = np.asarray(hbars, dtype=float)
    plus = np.array([star_strict(u, v, x0, h, cfg, raise_on_fail=False).value for h in hs])
    minus = np.array([star_strict(u, v, x0, -h, cfg, raise_on_fail=False).value for h in hs])
    even = (plus + minus) / 2
    odd = (plus - minus) / (2 * hs)
    deg = len(hs) - 1
    pe = np.polyfit(hs ** 2, even, deg)[::-1]
    po = np.polyfit(hs ** 2, odd, deg)[::-1]
    coeffs = []
    for k in range(n_orders):
        coeffs.append(complex(pe[k // 2] if k % 2 == 0 else po[k // 2]))
    return coeffs


def first_order_richardson(u, v, x0, hbars: Sequence[float] = HBAR_SWEEP,
                           cfg: QuadConfig = QuadConfig(rel_tol=1e-10, abs_tol=1e-14)) -> complex:
    """Slope (u*v - uv)(x0)/hbar on the positive sweep, extrapolated to hbar = 0.

    The difference quotient is c1 + c2 hbar + c3 hbar^2 + ...; a polynomial fit
    through the sweep removes the leading corrections.
    """
    hs = np.asarray(hbars, dtype=float)
    uv = complex(u(x0[0], x0[1]) * v(x0[0], x0[1]))
    q = np.array([(star_strict(u, v, x0, h, cfg, raise_on_fail=False).value - uv) / h for h in hs])
    return complex(np.polyfit(hs, q, len(hs) - 1)[-1])


def poisson_bracket(u, v, x0) -> complex:
    """{u, v} = d_a u d_l v - d_l u d_a v at x0."""
    U = u.to_expr() if isinstance(u, TestFunction) else u
    V = v.to_expr() if isinstance(v, TestFunction) else v
    pb = U.diff(0) * V.diff(1) - U.diff(1) * V.diff(0)
    return complex(pb.to_complex(x0))


@dataclass
class EquivalenceReport:
    strict: List[complex]
    formal: List[complex]
    rel_discrepancy: List[float]

    def to_json(self):
        return {"orders": [
            {"order": k, "strict": [s.real, s.imag], "formal": [f.real, f.imag], "rel_discrepancy": d}
            for k, (s, f, d) in enumerate(zip(self.strict, self.formal, self.rel_discrepancy))]}


def equivalence_check(u, v, x0, N: int = 2, cfg: QuadConfig = QuadConfig(rel_tol=1e-10, abs_tol=1e-14)) -> EquivalenceReport:
    if N > 3:
        raise ValueError("N must be at most 3")
    strict = expansion_coefficients(u, v, x0, cfg=cfg, n_orders=N + 1)
    series = axb_formal_star(u.to_expr(), v.to_expr(), N)
    formal = [complex(series[k].to_complex(x0)) for k in range(N + 1)]
    rel = [abs(s - f) / max(abs(f), 1e-300) for s, f in zip(strict, formal)]
    return EquivalenceReport(strict, formal, rel)
