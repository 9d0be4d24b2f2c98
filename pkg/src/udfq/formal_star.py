"""Formal star products built from exponentials of bidifferential operators.

A product is encoded by a list of pairwise commuting first-order operators
``D_i`` and a matrix ``w``; the order-``k`` coefficient is

    (pref^k / k!) sum w^{i1 j1}...w^{ik jk} (D_i1...D_ik u)(D_j1...D_jk v)

collected over the series degrees of ``u`` and ``v``.  ``pref = 1/(2i)``
gives the Moyal-type product along left-invariant fields.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ_I

from .hopf import SmashElement, Tensor, lambda_structure, lr_smash_multiply
from .lie import (Operator, apply_operator, group_dim, group_law_exprs, left_invariant_frame,
                  operator_commutator, right_invariant_frame)
from .symexpr import ONE, ZERO, Expr, FormalSeries, OrderMismatch, coerce, const, var

HALF_OVER_I = QQ_I(0, Fraction(-1, 2))  # 1/(2i)


class NonCommutingFrame(ValueError):
    pass


@dataclass(frozen=True)
class InvariantFrame:
    """Left- (and right-) invariant fields of a built-in group in global coordinates."""
    group: str
    nvars: int
    left: Tuple[Operator, ...]
    right: Tuple[Operator, ...]
    directions: Tuple[int, ...]

    @classmethod
    def for_group(cls, group: str = "rn", n: int = 2, directions: Optional[Sequence[int]] = None):
        d = group_dim(group, n)
        if directions is None:
            directions = {"book": (1, 2), "heis": (0, 1)}.get(group, tuple(range(d)))
        return cls(group, d, tuple(left_invariant_frame(group, d)),
                   tuple(right_invariant_frame(group, d)), tuple(directions))

    @classmethod
    def from_operators(cls, ops: Sequence[Operator], nvars: int):
        return cls("custom", nvars, tuple(ops), tuple(ops), tuple(range(len(ops))))

    @property
    def ops(self) -> Tuple[Operator, ...]:
        return tuple(self.left[i] for i in self.directions)

    def check_commuting(self) -> None:
        ops = self.ops
        for i, j in itertools.combinations(range(len(ops)), 2):
            com = operator_commutator(ops[i], ops[j])
            if any(not c.is_zero() for c in com):
                raise NonCommutingFrame(f"fields {self.directions[i]} and {self.directions[j]} do not commute")


def _as_series(u, N: int) -> FormalSeries:
    if isinstance(u, FormalSeries):
        if u.order < N:
            raise OrderMismatch(f"series of order {u.order} used at order {N}")
        return FormalSeries(u.coeffs[:N + 1], N)
    return FormalSeries.constant(Expr.lift(u), N)


def _lift_w(w) -> List[List[Expr]]:
    return [[x if isinstance(x, Expr) else Expr.lift(coerce(x)) for x in row] for row in w]


def _power_table(w: List[List[Expr]], N: int):
    """(sum_ij w^ij L_i R_j)^k as {(alpha, beta): Expr} for k = 0..N."""
    m = len(w)
    unit = tuple([0] * m)
    base = {}
    for i in range(m):
        for j in range(m):
            if not w[i][j].is_zero():
                a = list(unit); a[i] += 1
                b = list(unit); b[j] += 1
                base[(tuple(a), tuple(b))] = w[i][j]
    table = [{(unit, unit): ONE}]
    for _ in range(N):
        nxt: Dict[tuple, Expr] = {}
        for (a1, b1), c1 in table[-1].items():
            for (a2, b2), c2 in base.items():
                key = (tuple(x + y for x, y in zip(a1, a2)), tuple(x + y for x, y in zip(b1, b2)))
                s = nxt.get(key, ZERO) + c1 * c2
                if s.is_zero():
                    nxt.pop(key, None)
                else:
                    nxt[key] = s
        table.append(nxt)
    return table


class _Derivs:
    """Memoized D^alpha e for commuting operators."""

    def __init__(self, ops):
        self.ops = ops
        self.cache: Dict[tuple, Expr] = {}

    def get(self, e: Expr, alpha: tuple) -> Expr:
        key = (e, alpha)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if not any(alpha):
            res = e
        else:
            i = max(k for k, a in enumerate(alpha) if a)
            prev = list(alpha); prev[i] -= 1
            inner = self.get(e, tuple(prev))
            res = ZERO if inner.is_zero() else apply_operator(self.ops[i], inner)
        self.cache[key] = res
        return res


def bidifferential_star(u, v, ops: Sequence[Operator], w, N: int, prefactor=HALF_OVER_I) -> FormalSeries:
    """Exponential bidifferential product; no commutation check."""
    U, V = _as_series(u, N), _as_series(v, N)
    W = _lift_w(w)
    table = _power_table(W, N)
    pref = coerce(prefactor)
    D = _Derivs(tuple(ops))
    out = [ZERO] * (N + 1)
    for k in range(N + 1):
        ck = Fraction(1, factorial(k))
        scal = Expr.lift(pref) ** k if k else ONE
        for p in range(N + 1 - k):
            up = U[p]
            if up.is_zero():
                continue
            for q in range(N + 1 - k - p):
                vq = V[q]
                if vq.is_zero():
                    continue
                acc = ZERO
                for (a, b), c in table[k].items():
                    da = D.get(up, a)
                    if da.is_zero():
                        continue
                    db = D.get(vq, b)
                    if db.is_zero():
                        continue
                    acc = acc + c * da * db
                if not acc.is_zero():
                    out[k + p + q] = out[k + p + q] + (acc * scal).scale(ck)
    return FormalSeries(out, N)


def moyal_invariant_star(u, v, frame: InvariantFrame, w, N: int) -> FormalSeries:
    """Moyal-type product along the frame's commuting left-invariant fields."""
    frame.check_commuting()
    ops = frame.ops
    if len(w) != len(ops) or any(len(r) != len(ops) for r in w):
        raise ValueError(f"w must be {len(ops)}x{len(ops)}")
    return bidifferential_star(u, v, ops, w, N, HALF_OVER_I)


def w_from_wedges(pairs: Sequence[Tuple[int, int]], size: int, coeffs=None) -> List[List[Fraction]]:
    """Antisymmetric matrix of sum c * (e_i wedge e_j)."""
    w = [[Fraction(0)] * size for _ in range(size)]
    for idx, (i, j) in enumerate(pairs):
        c = Fraction(1) if coeffs is None else Fraction(coeffs[idx])
        w[i][j] += c
        w[j][i] -= c
    return w


# -- symbols on T*R^n -------------------------------------------------------------------------------

def cotangent_ops(n: int) -> List[Operator]:
    """Partial derivatives on R^{2n} with coordinates (x_0..x_{n-1}, p_0..p_{n-1})."""
    return [tuple(ONE if k == i else ZERO for k in range(2 * n)) for i in range(2 * n)]


def ordering_w(n: int, lam) -> List[List[Fraction]]:
    """Exponent t(lam d_x (x) d_p + (lam-1) d_p (x) d_x) of the lam-ordered product."""
    lam = Fraction(lam)
    w = [[Fraction(0)] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        w[i][n + i] = lam
        w[n + i][i] = lam - 1
    return w


def ordered_symbol_star(u, v, n: int, lam, N: int) -> FormalSeries:
    """Reference lam-ordered product on T*R^n; lam = 1/2 is the Moyal product."""
    return bidifferential_star(u, v, cotangent_ops(n), ordering_w(n, lam), N, prefactor=1)


def moyal_symbol_star(u, v, n: int, N: int) -> FormalSeries:
    """exp((t/2) (d_x (x) d_p - d_p (x) d_x)) on T*R^n."""
    w = [[Fraction(0)] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        w[i][n + i] = Fraction(1)
        w[n + i][i] = Fraction(-1)
    return bidifferential_star(u, v, cotangent_ops(n), w, N, prefactor=Fraction(1, 2))


def smash_to_symbol(el: Tensor, n: int) -> FormalSeries:
    """t^k f (x) X^alpha -> t^k f(x) p^alpha."""
    out = [ZERO] * (el.order + 1)
    for ((k,), (alpha,)), f in el.terms.items():
        mono = ONE
        for i, a in enumerate(alpha):
            if a:
                mono = mono * var(n + i) ** a
        out[k] = out[k] + f * mono
    return FormalSeries(out, el.order)


def symbol_to_smash(s: FormalSeries, n: int) -> SmashElement:
    out = SmashElement(n, s.order)
    for k, e in enumerate(s):
        for mono, c in e.terms.items():
            alpha = [0] * n
            rest = []
            for atom, p in mono:
                if atom[0] == "v" and atom[1] >= n:
                    alpha[atom[1] - n] += p
                else:
                    if atom[0] != "v" and any(v >= n for v in atom[1].variables()):
                        raise ValueError("symbol is not polynomial in the fibre variables")
                    rest.append((atom, p))
            out._add(((k,), (tuple(alpha),)), Expr({tuple(rest): c}))
    return out


def lambda_ordered_star(F: Tensor, G: Tensor, lam=Fraction(1, 2), N: int = 4,
                        group: str = "rn", n: int = 1) -> Tensor:
    return lr_smash_multiply(F, G, lambda_structure(lam, N, group, n))


# -- fiberwise induction ------------------------------------------------------------------------------

def induced_fiberwise_star(u, v, fiber_star: Callable, s_vars: Sequence[int], nvars: int):
    """(u * v)(q, s) = (u(q, .) *_T v(q, .))(s).

    ``fiber_star`` acts on variables ``0..len(s_vars)-1``; the joint variables
    listed in ``s_vars`` are moved there and the remaining (q) variables are
    carried along as parameters.
    """
    s_vars = list(s_vars)
    q_vars = [i for i in range(nvars) if i not in s_vars]
    fwd = {old: new for new, old in enumerate(s_vars + q_vars)}
    back = {new: old for old, new in fwd.items()}

    def move(x, mp):
        if isinstance(x, FormalSeries):
            return x.map(lambda e: e.reindex(mp))
        return Expr.lift(x).reindex(mp)

    res = fiber_star(move(u, fwd), move(v, fwd))
    return move(res, back)


# -- associativity -------------------------------------------------------------------------------------

@dataclass(frozen=True)
class AssociativityResult:
    passed: bool
    first_violation: Optional[int]

    def __bool__(self):
        return self.passed


def _orders_of(x) -> Dict[int, object]:
    if isinstance(x, FormalSeries):
        return {k: e for k, e in enumerate(x)}
    if isinstance(x, Tensor):
        out: Dict[int, dict] = {}
        for (ks, alphas), e in x.terms.items():
            out.setdefault(sum(ks), {})[(ks, alphas)] = e
        return out
    raise TypeError(type(x))


def check_associativity_formal(star: Callable, u, v, w, N: int) -> AssociativityResult:
    """Compare (u*v)*w with u*(v*w) order by order through N."""
    lhs = _orders_of(star(star(u, v), w))
    rhs = _orders_of(star(u, star(v, w)))
    for k in range(N + 1):
        a, b = lhs.get(k, ZERO), rhs.get(k, ZERO)
        if isinstance(a, dict) or isinstance(b, dict):
            a = a if isinstance(a, dict) else {}
            b = b if isinstance(b, dict) else {}
        if a != b:
            return AssociativityResult(False, k)
    return AssociativityResult(True, None)


# -- left translations -----------------------------------------------------------------------------------

def pullback_left(u: Expr, group: str, h: Sequence, n: int = 1) -> Expr:
    """(L_h^* u)(x) = u(h . x) with numeric h."""
    d = group_dim(group, n)
    law = group_law_exprs(group, n)
    sub = {i: const(h[i]) for i in range(d)}
    sub.update({d + i: var(i) for i in range(d)})
    hx = [c.subs(sub) for c in law]
    return u.subs({i: hx[i] for i in range(d)})


def pullback_series(u: FormalSeries, group: str, h, n: int = 1) -> FormalSeries:
    return u.map(lambda e: pullback_left(e, group, h, n))


def monomials(nvars: int, max_degree: int) -> List[Expr]:
    out = []
    for deg in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            e = ONE
            for i in combo:
                e = e * var(i)
            out.append(e)
    return out
