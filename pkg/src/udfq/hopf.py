"""Smash and L-R-smash products over U_t(g), with the Hopf structure on R^n.

Elements of ``(C (x) B)^{(x) m}`` are stored as :class:`Tensor` objects: a map
from ``((k_1..k_m), (alpha_1..alpha_m))`` to an :class:`Expr`.  ``k_j`` is the
power of the deformation parameter in leg ``j`` and ``alpha_j`` a PBW exponent
in leg ``j``.  The coefficient is a single function of all leg coordinates,
leg ``j`` owning variables ``j*n .. j*n+n-1``; a tensor ``f (x) g`` is stored as
``f(x) g(y)``.  A :class:`SmashElement` is the one-leg case.

C-elements (``CElem``) are dicts ``{kvec: Expr}``: formal series in the
per-leg parameters.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .lie import (LieAlgebra, Operator, apply_operator, builtin_algebra_for,
                  group_dim, left_invariant_frame, right_invariant_frame)
from .symexpr import ONE, ZERO, Expr, parse, var

CElem = Dict[tuple, Expr]


class TruncationOverflow(ValueError):
    pass


class MissingAction(ValueError):
    pass


class NotCocommutative(ValueError):
    pass


class NotCoalgebraClosed(ValueError):
    pass


class NotInvertible(ValueError):
    pass


# -- U_t(g): PBW normal ordering ------------------------------------------------------------

def word_of(alpha: Sequence[int]) -> tuple:
    return tuple(i for i, a in enumerate(alpha) for _ in range(a))


def _alpha_of(word: Sequence[int], dim: int) -> tuple:
    out = [0] * dim
    for i in word:
        out[i] += 1
    return tuple(out)


def pbw_normal_order(alg: LieAlgebra, word: Sequence[int], order: int, t_degree: int = 0,
                     chooser: Optional[Callable[[List[int]], int]] = None) -> Dict[tuple, Fraction]:
    """Rewrite a word in U_t(g) into PBW form ``{(k, alpha): coeff}``.

    The rule ``X_i X_j -> X_j X_i + t [X_i, X_j]`` for ``i > j`` moves
    earlier-index letters to the left.  Terms past ``t^order`` are dropped.
    ``chooser`` picks which inversion to rewrite (defaults to the first); any
    choice gives the same result.
    """
    if t_degree > order:
        raise TruncationOverflow(f"t-degree {t_degree} exceeds order {order}")
    if chooser is None:
        res = _normal_order_cached(alg, tuple(word), order - t_degree)
        return {(k + t_degree, a): c for (k, a), c in res.items()}
    out: Dict[tuple, Fraction] = {}
    _normal_order_rec(alg, tuple(word), order, t_degree, Fraction(1), chooser, out)
    return {k: v for k, v in out.items() if v != 0}


def _normal_order_rec(alg, word, order, k, coeff, chooser, out):
    inversions = [i for i in range(len(word) - 1) if word[i] > word[i + 1]]
    if not inversions:
        key = (k, _alpha_of(word, alg.dim))
        out[key] = out.get(key, 0) + coeff
        return
    i = inversions[chooser(inversions)]
    a, b = word[i], word[i + 1]
    _normal_order_rec(alg, word[:i] + (b, a) + word[i + 2:], order, k, coeff, chooser, out)
    if k + 1 <= order:
        for m, c in enumerate(alg.c[a][b]):
            if c != 0:
                _normal_order_rec(alg, word[:i] + (m,) + word[i + 2:], order, k + 1,
                                  coeff * c, chooser, out)


@lru_cache(maxsize=None)
def _normal_order_cached(alg: LieAlgebra, word: tuple, budget: int):
    for i in range(len(word) - 1):
        if word[i] > word[i + 1]:
            break
    else:
        return {(0, _alpha_of(word, alg.dim)): Fraction(1)}
    a, b = word[i], word[i + 1]
    out: Dict[tuple, Fraction] = dict(_normal_order_cached(alg, word[:i] + (b, a) + word[i + 2:], budget))
    if budget >= 1:
        for m, c in enumerate(alg.c[a][b]):
            if c == 0:
                continue
            sub = _normal_order_cached(alg, word[:i] + (m,) + word[i + 2:], budget - 1)
            for (k, al), v in sub.items():
                key = (k + 1, al)
                out[key] = out.get(key, 0) + c * v
    return {key: v for key, v in out.items() if v != 0}


def pbw_multiply(alg: LieAlgebra, alpha: tuple, beta: tuple, order: int) -> Dict[tuple, Fraction]:
    return pbw_normal_order(alg, word_of(alpha) + word_of(beta), order)


def pbw_coproduct(alpha: tuple) -> List[Tuple[tuple, tuple, int]]:
    """Delta(X^alpha) = sum_beta C(alpha, beta) X^beta (x) X^(alpha-beta)."""
    out = []
    for beta in itertools.product(*(range(a + 1) for a in alpha)):
        c = 1
        for a, b in zip(alpha, beta):
            c *= comb(a, b)
        out.append((tuple(beta), tuple(a - b for a, b in zip(alpha, beta)), c))
    return out


def pbw_coproduct3(alpha: tuple) -> List[Tuple[tuple, tuple, tuple, int]]:
    out = []
    for b1, rest, c1 in pbw_coproduct(alpha):
        for b2, b3, c2 in pbw_coproduct(rest):
            out.append((b1, b2, b3, c1 * c2))
    return out


def pbw_antipode(alg: LieAlgebra, alpha: tuple, order: int, sign: int = -1) -> Dict[tuple, Fraction]:
    """J(X^alpha) = (-1)^|alpha| X^reversed, normal ordered (``sign=+1`` corrupts it)."""
    word = word_of(alpha)
    res = pbw_normal_order(alg, tuple(reversed(word)), order)
    s = sign ** len(word)
    return {k: s * v for k, v in res.items()}


# -- C-elements ------------------------------------------------------------------------------

def _cadd_into(acc: CElem, key: tuple, e: Expr):
    if e.is_zero():
        return
    cur = acc.get(key)
    if cur is None:
        acc[key] = e
    else:
        s = cur + e
        if s.is_zero():
            del acc[key]
        else:
            acc[key] = s


def celem_add(*items: CElem) -> CElem:
    out: CElem = {}
    for F in items:
        for k, e in F.items():
            _cadd_into(out, k, e)
    return out


def celem_scale(F: CElem, c) -> CElem:
    if isinstance(c, Expr):
        out = {k: e * c for k, e in F.items()}
    else:
        out = {k: e.scale(c) for k, e in F.items()}
    return {k: e for k, e in out.items() if not e.is_zero()}


def celem_shift(F: CElem, dk: tuple, order: int) -> CElem:
    out = {}
    for k, e in F.items():
        nk = tuple(a + b for a, b in zip(k, dk))
        if max(nk, default=0) <= order:
            out[nk] = e
    return out


# -- structures -------------------------------------------------------------------------------

@dataclass(frozen=True)
class SmashStructure:
    """B = U_t(g) acting on C = C^infty(G)[[t]].

    Untwisted actions: ``X_i -> f = t * left_scale * L_i f`` and
    ``f <- X_i = t * right_scale * R_i f`` with first-order operators
    ``L_i``, ``R_i``.  Set ``right_ops=None`` for a plain left module
    (smash product).  ``twist`` holds ``(T, T_inverse)`` acting on one-leg
    C-elements.
    """
    algebra: LieAlgebra
    nvars: int
    order: int
    left_ops: Optional[Tuple[Operator, ...]]
    right_ops: Optional[Tuple[Operator, ...]]
    left_scale: object = Fraction(-1, 2)
    right_scale: object = Fraction(1, 2)
    twist: Optional[Tuple[Callable, Callable]] = None
    group: str = "rn"
    _shifted: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @property
    def cocommutative(self) -> bool:
        return True  # U_t(g) is always cocommutative

    @property
    def is_lr(self) -> bool:
        return self.right_ops is not None

    def _ops_for_leg(self, which: str, leg: int) -> Tuple[Operator, ...]:
        key = (which, leg)
        hit = self._shifted.get(key)
        if hit is not None:
            return hit
        base = self.left_ops if which == "L" else self.right_ops
        if leg == 0:
            ops = base
        else:
            off = leg * self.nvars
            ops = tuple(tuple(c.reindex(lambda i: i + off) for c in op) for op in base)
        self._shifted[key] = ops
        return ops

    # base (untwisted) operations on C-elements
    def _act(self, which: str, i: int, F: CElem, leg: int) -> CElem:
        ops = self._ops_for_leg(which, leg)
        if ops is None:
            raise MissingAction(f"no {'left' if which == 'L' else 'right'} action registered")
        scale = self.left_scale if which == "L" else self.right_scale
        if scale == 0:
            return {}
        op = ops[i]
        off = leg * self.nvars
        out: CElem = {}
        for k, e in F.items():
            if k[leg] + 1 > self.order:
                continue
            d = apply_operator(op, e, off)
            if d.is_zero():
                continue
            nk = k[:leg] + (k[leg] + 1,) + k[leg + 1:]
            _cadd_into(out, nk, d.scale(scale))
        return out

    def _mul0(self, F: CElem, G: CElem) -> CElem:
        out: CElem = {}
        for k1, e1 in F.items():
            for k2, e2 in G.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                if max(k, default=0) > self.order:
                    continue
                _cadd_into(out, k, e1 * e2)
        return out

    # public (possibly twisted) operations
    def mul(self, F: CElem, G: CElem) -> CElem:
        if self.twist is None:
            return self._mul0(F, G)
        T, Tinv = self.twist
        return Tinv(self._mul0(T(F), T(G)))

    def left(self, i: int, F: CElem, leg: int = 0) -> CElem:
        if self.twist is None:
            return self._act("L", i, F, leg)
        T, Tinv = self.twist
        return Tinv(self._act("L", i, T(F), leg))

    def right(self, F: CElem, i: int, leg: int = 0) -> CElem:
        if self.twist is None:
            return self._act("R", i, F, leg)
        T, Tinv = self.twist
        return Tinv(self._act("R", i, T(F), leg))

    def left_mono(self, alpha: tuple, F: CElem, leg: int = 0) -> CElem:
        for i in reversed(word_of(alpha)):
            if not F:
                break
            F = self.left(i, F, leg)
        return F

    def right_mono(self, F: CElem, alpha: tuple, leg: int = 0) -> CElem:
        for i in word_of(alpha):
            if not F:
                break
            F = self.right(F, i, leg)
        return F


def lambda_structure(lam=Fraction(1, 2), order: int = 4, group: str = "rn", n: int = 1) -> SmashStructure:
    """Actions X -> f = t(lam-1) X~ f and f <- X = t lam X-bar f."""
    lam = Fraction(lam) if not isinstance(lam, float) else lam
    d = group_dim(group, n)
    return SmashStructure(
        algebra=builtin_algebra_for(group, d), nvars=d, order=order,
        left_ops=tuple(left_invariant_frame(group, d)),
        right_ops=tuple(right_invariant_frame(group, d)),
        left_scale=lam - 1, right_scale=lam, group=group)


def left_module_structure(group: str = "axb", order: int = 3, scale=1, n: int = 1) -> SmashStructure:
    """Left action X -> f = t*scale*X~ f only (a smash product).  For a
    non-abelian group this is a U_t(g)-module exactly when scale is 0 or 1."""
    d = group_dim(group, n)
    return SmashStructure(algebra=builtin_algebra_for(group, d), nvars=d, order=order,
                          left_ops=tuple(left_invariant_frame(group, d)), right_ops=None,
                          left_scale=Fraction(scale), right_scale=Fraction(0), group=group)


# -- tensors ------------------------------------------------------------------------------------

class Tensor:
    """Finite sum of ``t^k f (x) X^alpha`` terms in ``legs`` tensor legs."""

    __slots__ = ("legs", "nvars", "order", "terms")

    def __init__(self, legs: int, nvars: int, order: int, terms: Optional[Dict] = None):
        self.legs = legs
        self.nvars = nvars
        self.order = order
        self.terms: Dict[Tuple[tuple, tuple], Expr] = {}
        for key, e in (terms or {}).items():
            self._add(key, e)

    def _add(self, key, e: Expr):
        if e.is_zero():
            return
        ks, _ = key
        if max(ks, default=0) > self.order:
            return
        cur = self.terms.get(key)
        if cur is None:
            self.terms[key] = e
        else:
            s = cur + e
            if s.is_zero():
                del self.terms[key]
            else:
                self.terms[key] = s

    def copy_empty(self, legs: Optional[int] = None) -> "Tensor":
        return Tensor(self.legs if legs is None else legs, self.nvars, self.order)

    def by_alpha(self) -> Dict[tuple, CElem]:
        out: Dict[tuple, CElem] = {}
        for (ks, alphas), e in self.terms.items():
            out.setdefault(alphas, {})[ks] = e
        return out

    @classmethod
    def from_celems(cls, legs, nvars, order, parts: Dict[tuple, CElem]) -> "Tensor":
        t = cls(legs, nvars, order)
        for alphas, F in parts.items():
            for ks, e in F.items():
                t._add((ks, alphas), e)
        return t

    def __add__(self, other: "Tensor") -> "Tensor":
        out = Tensor(self.legs, self.nvars, min(self.order, other.order), self.terms)
        for k, e in other.terms.items():
            out._add(k, e)
        return out

    def __neg__(self):
        return Tensor(self.legs, self.nvars, self.order, {k: -e for k, e in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Tensor":
        return Tensor(self.legs, self.nvars, self.order, {k: e.scale(c) for k, e in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.legs == other.legs and self.terms == other.terms

    def __hash__(self):  # pragma: no cover - mutable-ish container
        return id(self)

    def is_zero(self) -> bool:
        return not self.terms

    def truncate_total(self, order: Optional[int] = None) -> "Tensor":
        order = self.order if order is None else order
        return Tensor(self.legs, self.nvars, self.order,
                      {k: e for k, e in self.terms.items() if sum(k[0]) <= order})

    def to_string(self, alg: Optional[LieAlgebra] = None, names=None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (ks, alphas), e in sorted(self.terms.items(), key=lambda kv: (kv[0], kv[1].key)):
            legs = []
            for j in range(self.legs):
                legs.append(_mono_str(alphas[j], alg))
            tpart = "*".join((f"t{j}^{k}" if self.legs > 1 else f"t^{k}") for j, k in enumerate(ks) if k)
            coeff = e.to_string(names)
            head = f"({coeff})" + (f"*{tpart}" if tpart else "")
            parts.append(head + " ⊗ " + " ⊗ ".join(legs))
        return " + ".join(parts)

    def __repr__(self):
        return f"Tensor(legs={self.legs}, {self.to_string()})"


def _mono_str(alpha, alg=None):
    if not any(alpha):
        return "1"
    names = alg.basis_names if alg is not None else [f"X{i}" for i in range(len(alpha))]
    return "*".join(names[i] + (f"^{a}" if a > 1 else "") for i, a in enumerate(alpha) if a)


class SmashElement(Tensor):
    """One-leg tensor: sum of ``t^k f (x) X^alpha``."""

    def __init__(self, nvars: int, order: int, terms: Optional[Dict] = None):
        super().__init__(1, nvars, order, terms)

    @classmethod
    def term(cls, f, alpha: Sequence[int], nvars: int, order: int, k: int = 0) -> "SmashElement":
        e = f if isinstance(f, Expr) else Expr.lift(f)
        return cls(nvars, order, {((k,), (tuple(alpha),)): e})

    @classmethod
    def one(cls, dim: int, nvars: int, order: int) -> "SmashElement":
        return cls.term(ONE, (0,) * dim, nvars, order)

    @classmethod
    def wrap(cls, t: Tensor) -> "SmashElement":
        assert t.legs == 1
        out = cls(t.nvars, t.order)
        out.terms = dict(t.terms)
        return out


# -- products --------------------------------------------------------------------------------

def _splits(alphas: tuple) -> List[Tuple[tuple, tuple, int]]:
    """Per-leg Sweedler splits of a multi-leg PBW monomial."""
    per_leg = [pbw_coproduct(a) for a in alphas]
    out = []
    for combo in itertools.product(*per_leg):
        c = 1
        for _, _, ci in combo:
            c *= ci
        out.append((tuple(x[0] for x in combo), tuple(x[1] for x in combo), c))
    return out


def _b_product(st: SmashStructure, a2: tuple, b2: tuple) -> Dict[Tuple[tuple, tuple], Fraction]:
    """Per-leg PBW products a2_j b2_j -> {(kvec, gammavec): coeff}."""
    result = {((), ()): Fraction(1)}
    for x, y in zip(a2, b2):
        prod = pbw_multiply(st.algebra, x, y, st.order)
        nxt = {}
        for (ks, gs), c in result.items():
            for (k, g), c2 in prod.items():
                key = (ks + (k,), gs + (g,))
                nxt[key] = nxt.get(key, 0) + c * c2
        result = nxt
    return {k: v for k, v in result.items() if v != 0}


def _left_multi(st, alphas: tuple, F: CElem) -> CElem:
    for leg, a in enumerate(alphas):
        if any(a):
            F = st.left_mono(a, F, leg)
    return F


def _right_multi(st, F: CElem, alphas: tuple) -> CElem:
    for leg, a in enumerate(alphas):
        if any(a):
            F = st.right_mono(F, a, leg)
    return F


def lr_smash_multiply(u: Tensor, v: Tensor, st: SmashStructure) -> Tensor:
    """(f (x) a)(g (x) b) = sum (f <- b(1)) (a(1) -> g) (x) a(2) b(2), leg-wise."""
    if not st.cocommutative:
        raise NotCocommutative("the L-R-smash product needs a cocommutative B")
    legs = u.legs
    out = Tensor(legs, st.nvars, st.order)
    U, V = u.by_alpha(), v.by_alpha()
    for alpha_b, G in V.items():
        bsplits = _splits(alpha_b) if st.is_lr else [(tuple((0,) * len(a) for a in alpha_b), alpha_b, 1)]
        for alpha_a, F in U.items():
            asplits = _splits(alpha_a)
            left_cache: Dict[tuple, CElem] = {}
            for b1, b2, cb in bsplits:
                Fb = _right_multi(st, F, b1) if st.is_lr else F
                if not Fb:
                    continue
                for a1, a2, ca in asplits:
                    Ga = left_cache.get(a1)
                    if Ga is None:
                        Ga = _left_multi(st, a1, G)
                        left_cache[a1] = Ga
                    if not Ga:
                        continue
                    H = st.mul(Fb, Ga)
                    if not H:
                        continue
                    for (kb, gam), c in _b_product(st, a2, b2).items():
                        coeff = c * ca * cb
                        for ks, e in H.items():
                            nk = tuple(x + y for x, y in zip(ks, kb))
                            if max(nk) > st.order:
                                continue
                            out._add((nk, gam), e.scale(coeff))
    return SmashElement.wrap(out) if legs == 1 else out


def smash_multiply(u: Tensor, v: Tensor, st: SmashStructure) -> Tensor:
    """Def 3.1 smash product: the right action is ignored."""
    if st.left_ops is None and st.twist is None:
        raise MissingAction("smash product needs a left action")
    plain = SmashStructure(st.algebra, st.nvars, st.order, st.left_ops, None, st.left_scale,
                           Fraction(0), st.twist, st.group)
    return lr_smash_multiply(u, v, plain)


def lambda_ordered_star(F: Tensor, G: Tensor, lam=Fraction(1, 2), order: int = 4,
                        group: str = "rn", n: int = 1) -> Tensor:
    return lr_smash_multiply(F, G, lambda_structure(lam, order, group, n))


def commutator(u: Tensor, v: Tensor, st: SmashStructure) -> Tensor:
    return lr_smash_multiply(u, v, st) - lr_smash_multiply(v, u, st)


def check_module_axioms(st: SmashStructure, samples: Sequence[Expr]) -> List[str]:
    """Return violated identities among: left/right module relations of
    U_t(g) and the commuting of the two actions."""
    bad = []
    dim = st.algebra.dim
    for f in samples:
        F = {(0,): f}
        for i in range(dim):
            for j in range(dim):
                if st.left_ops is not None:
                    lhs = celem_add(st.left(i, st.left(j, F)), celem_scale(st.left(j, st.left(i, F)), -1))
                    rhs = {}
                    for k, c in enumerate(st.algebra.c[i][j]):
                        if c:
                            rhs = celem_add(rhs, celem_scale(celem_shift(st.left(k, F), (1,), st.order), c))
                    if celem_add(lhs, celem_scale(rhs, -1)):
                        bad.append(f"left module relation fails for ({i},{j})")
                if st.right_ops is not None:
                    # f <- (X_i X_j - X_j X_i) = f <- t[X_i, X_j]
                    lhs = celem_add(st.right(st.right(F, i), j), celem_scale(st.right(st.right(F, j), i), -1))
                    rhs = {}
                    for k, c in enumerate(st.algebra.c[i][j]):
                        if c:
                            rhs = celem_add(rhs, celem_scale(celem_shift(st.right(F, k), (1,), st.order), c))
                    if celem_add(lhs, celem_scale(rhs, -1)):
                        bad.append(f"right module relation fails for ({i},{j})")
                if st.left_ops is not None and st.right_ops is not None:
                    a = st.right(st.left(i, F), j)
                    b = st.left(i, st.right(F, j))
                    if celem_add(a, celem_scale(b, -1)):
                        bad.append(f"actions do not commute for ({i},{j})")
    return sorted(set(bad))


# -- Hopf structure on C^infty(R^n)[[t]] natural S(R^n) -------------------------------------------

def _check_coalgebra_closed(e: Expr):
    for mono in e.terms:
        for atom, _ in mono:
            if atom[0] == "v":
                continue
            if atom[0] != "exp" or not atom[1].is_linear_form():
                raise NotCoalgebraClosed(
                    f"{atom[0]}({atom[1]}) has no finite coproduct expansion")


def _require_abelian(st: SmashStructure):
    if any(x != 0 for a in st.algebra.c for b in a for x in b) or st.group != "rn":
        raise ValueError("the Hopf structure is implemented for G = R^n only")


def coproduct(T: Tensor, leg: int = 0, check: bool = True) -> Tensor:
    """Delta_* on ``leg``: f(x) -> f(x + y), t -> t1 + t2, X -> 1(x)X + X(x)1."""
    n, m = T.nvars, T.legs
    out = Tensor(m + 1, n, T.order)
    off = leg * n
    shift_map = {i: var(i + n) for i in range((leg + 1) * n, m * n)}
    split_map = {off + i: var(off + i) + var(off + n + i) for i in range(n)}
    memo: Dict[Expr, Expr] = {}
    for (ks, alphas), e in T.terms.items():
        if check:
            _check_coalgebra_closed(e)
        e2 = memo.get(e)
        if e2 is None:
            # later legs move up by one slot first, then leg splits
            e2 = e.subs(shift_map) if shift_map else e
            e2 = e2.subs(split_map)
            memo[e] = e2
        k = ks[leg]
        for j in range(k + 1):
            nks = ks[:leg] + (j, k - j) + ks[leg + 1:]
            ck = comb(k, j)
            for b1, b2, cb in pbw_coproduct(alphas[leg]):
                nal = alphas[:leg] + (b1, b2) + alphas[leg + 1:]
                out._add((nks, nal), e2.scale(ck * cb))
    return SmashElement.wrap(out) if out.legs == 1 else out


def counit(T: Tensor, leg: int = 0) -> Tensor:
    """epsilon on ``leg``: f t^k X^alpha -> f(0) if k = 0 and alpha = 0, else 0."""
    n, m = T.nvars, T.legs
    out = Tensor(m - 1, n, T.order)
    off = leg * n
    sub = {off + i: ZERO for i in range(n)}
    sub.update({i: var(i - n) for i in range((leg + 1) * n, m * n)})
    for (ks, alphas), e in T.terms.items():
        if ks[leg] != 0 or any(alphas[leg]):
            continue
        out._add((ks[:leg] + ks[leg + 1:], alphas[:leg] + alphas[leg + 1:]), e.subs(sub))
    return SmashElement.wrap(out) if out.legs == 1 else out


def antipode(T: Tensor, st: SmashStructure, leg: int = 0, sign: int = -1) -> Tensor:
    """J(f (x) a) = sum J_B(a(1)) -> J_C(f) <- J_B(a(2)) (x) J_B(a(3)) on ``leg``.

    J_C(f t^k)(x) = f(-x) (-t)^k; ``sign=+1`` gives the corrupted J_B(X) = X.
    """
    n = T.nvars
    off = leg * n
    flip = {off + i: -var(off + i) for i in range(n)}
    out = T.copy_empty()
    for (ks, alphas), e in T.terms.items():
        k = ks[leg]
        F = {ks: e.subs(flip).scale((-1) ** k)}
        for b1, b2, b3, c in pbw_coproduct3(alphas[leg]):
            G = F
            for (kb, a1), c1 in pbw_antipode(st.algebra, b1, st.order, sign).items():
                G1 = celem_shift(st.left_mono(a1, G, leg), _unit(leg, T.legs, kb), st.order)
                for (kb2, a2), c2 in pbw_antipode(st.algebra, b2, st.order, sign).items():
                    G2 = celem_shift(st.right_mono(G1, a2, leg), _unit(leg, T.legs, kb2), st.order)
                    for (kb3, a3), c3 in pbw_antipode(st.algebra, b3, st.order, sign).items():
                        G3 = celem_shift(G2, _unit(leg, T.legs, kb3), st.order)
                        nal = alphas[:leg] + (a3,) + alphas[leg + 1:]
                        for nks, ee in G3.items():
                            out._add((nks, nal), ee.scale(c * c1 * c2 * c3))
    return SmashElement.wrap(out) if out.legs == 1 else out


def _unit(leg: int, legs: int, k: int) -> tuple:
    return tuple(k if j == leg else 0 for j in range(legs))


def merge_legs(T: Tensor, st: SmashStructure, leg: int = 0) -> Tensor:
    """Multiply leg ``leg`` into leg ``leg+1``: m(f (x) a (x) g (x) b) = (f (x) a)(g (x) b)."""
    n, m = T.nvars, T.legs
    out = Tensor(m - 1, n, T.order)
    off = leg * n
    sub = {off + n + i: var(off + i) for i in range(n)}
    sub.update({i: var(i - n) for i in range((leg + 2) * n, m * n)})
    for alphas, F in T.by_alpha().items():
        a, b = alphas[leg], alphas[leg + 1]
        for b1, b2, cb in pbw_coproduct(b):
            Fb = st.right_mono(F, b1, leg) if st.is_lr else (F if not any(b1) else {})
            if not Fb:
                continue
            for a1, a2, ca in pbw_coproduct(a):
                Fa = st.left_mono(a1, Fb, leg + 1)
                if not Fa:
                    continue
                prod = pbw_multiply(st.algebra, a2, b2, st.order)
                for ks, e in Fa.items():
                    e2 = e.subs(sub)
                    base = ks[:leg] + (ks[leg] + ks[leg + 1],) + ks[leg + 2:]
                    for (kb, gam), c in prod.items():
                        nks = base[:leg] + (base[leg] + kb,) + base[leg + 1:]
                        nal = alphas[:leg] + (gam,) + alphas[leg + 2:]
                        out._add((nks, nal), e2.scale(c * ca * cb))
    return SmashElement.wrap(out) if out.legs == 1 else out


def coproduct_star(el: Tensor) -> Tensor:
    return coproduct(el, 0)


def antipode_star(el: Tensor, st: SmashStructure, sign: int = -1) -> Tensor:
    _require_abelian(st)
    return antipode(el, st, 0, sign)


def counit_star(el: Tensor) -> Expr:
    res = counit(el, 0)
    return res.terms.get(((), ()), ZERO)


def split_tensor(e: Expr, n: int) -> List[Tuple[Expr, Expr]]:
    """Write f(x, y) as sum f1(x) f2(y); raises NotCoalgebraClosed if impossible."""
    pieces: Dict[Expr, Dict[Expr, Expr]] = {}
    for mono, c in e.terms.items():
        left, right = [], []
        for atom, p in mono:
            vs = {atom[1]} if atom[0] == "v" else atom[1].variables()
            if all(v < n for v in vs):
                left.append((atom, p))
            elif all(v >= n for v in vs):
                right.append((atom, p))
            elif atom[0] == "exp":
                arg = atom[1]
                lx = Expr({m: cc for m, cc in arg.terms.items() if all(a[1] < n for a, _ in m)})
                rx = arg - lx
                if not all(v >= n for v in rx.variables()):
                    raise NotCoalgebraClosed(str(atom[1]))
                left.append((("exp", lx), 1))
                right.append((("exp", rx), 1))
            else:
                raise NotCoalgebraClosed(f"{atom[0]}({atom[1]}) does not split")
        le = ONE
        for atom, p in left:
            le = le * (Expr({((atom, 1),): 1}) ** p if atom[0] != "v" else var(atom[1]) ** p)
        re = ONE
        for atom, p in right:
            re = re * (Expr({((atom, 1),): 1}) ** p if atom[0] != "v" else var(atom[1] - n) ** p)
        re = re.reindex(lambda i: i - n if i >= n else i) if any(v >= n for v in re.variables()) else re
        pieces.setdefault(le, {})
        pieces[le][re] = pieces[le].get(re, ZERO) + Expr.lift(c)
    out = []
    for le, rights in pieces.items():
        for re, c in rights.items():
            if not c.is_zero():
                out.append((le * c, re))
    return out


# -- twist by a linear automorphism of C ------------------------------------------------------------

def series_operator_twist(D: Callable[[Expr], Expr], power: int, order: int):
    """T = Id + t^power D and its inverse sum_m (-t^power D)^m on one-leg C-elements."""

    def T(F: CElem) -> CElem:
        out = dict(F)
        for (k,), e in F.items():
            if k + power <= order:
                _cadd_into(out, (k + power,), D(e))
        return out

    def Tinv(F: CElem) -> CElem:
        out: CElem = {}
        cur = F
        sign = 1
        m = 0
        while cur and m * power <= order:
            for key, e in cur.items():
                _cadd_into(out, key, e.scale(sign))
            nxt: CElem = {}
            for (k,), e in cur.items():
                if k + power <= order:
                    _cadd_into(nxt, (k + power,), D(e))
            cur = nxt
            sign = -sign
            m += 1
        return out

    return T, Tinv


def twist_by_T(st: SmashStructure, T: Callable, Tinv: Callable, check_samples: Sequence[Expr] = ()) -> SmashStructure:
    """Structure with product, actions transported by T (one-leg only)."""
    if st.twist is not None:
        raise ValueError("structure is already twisted")
    for f in check_samples:
        F = {(0,): f}
        if celem_add(Tinv(T(F)), celem_scale(F, -1)):
            raise NotInvertible("T^-1 T != Id on a sample")
    return SmashStructure(st.algebra, st.nvars, st.order, st.left_ops, st.right_ops,
                          st.left_scale, st.right_scale, (T, Tinv), st.group)


def bold_T(el: Tensor, T: Callable) -> Tensor:
    """T (x) Id applied to a one-leg element."""
    parts = {alphas: T(F) for alphas, F in el.by_alpha().items()}
    return SmashElement.wrap(Tensor.from_celems(1, el.nvars, el.order, parts))


def twisted_product_direct(u: Tensor, v: Tensor, st: SmashStructure, T: Callable, Tinv: Callable) -> Tensor:
    """T^-1 (T u * T v), the conjugated L-R-smash product."""
    return bold_T(lr_smash_multiply(bold_T(u, T), bold_T(v, T), st), Tinv)


def twisted_coproduct(el: Tensor, T: Callable, Tinv: Callable) -> Tensor:
    """(T^-1 (x) T^-1) o (23) o (Delta_C (x) Delta_B) o T on a one-leg element."""
    d = coproduct(bold_T(el, T))
    return _apply_per_leg_2(d, Tinv)


def _apply_per_leg_2(d: Tensor, op: Callable) -> Tensor:
    """Apply a one-leg C-map to both legs of a separable two-leg tensor."""
    n = d.nvars
    out = Tensor(2, n, d.order)
    for (ks, alphas), e in d.terms.items():
        for f1, f2 in split_tensor(e, n):
            A = op({(ks[0],): f1})
            B = op({(ks[1],): f2})
            for (k1,), e1 in A.items():
                for (k2,), e2 in B.items():
                    out._add(((k1, k2), alphas), e1 * e2.reindex(lambda i: i + n))
    return out


# -- Hopf axiom battery ------------------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    element: str
    passed: bool


def unit_tensor(st: SmashStructure, legs: int = 1) -> Tensor:
    key = ((0,) * legs, ((0,) * st.algebra.dim,) * legs)
    t = Tensor(legs, st.nvars, st.order, {key: ONE})
    return SmashElement.wrap(t) if legs == 1 else t


def words_up_to(gens: Sequence[Tensor], cutoff: int, st: SmashStructure):
    out = [("1", unit_tensor(st))]
    frontier = [("", None)]
    for _ in range(cutoff):
        nxt = []
        for name, el in frontier:
            for gi, g in enumerate(gens):
                nm = f"{name}*g{gi}" if name else f"g{gi}"
                val = g if el is None else lr_smash_multiply(el, g, st)
                out.append((nm, val))
                nxt.append((nm, val))
        frontier = nxt
    return out


def verify_hopf_axioms(st: SmashStructure, generators: Sequence[Tensor], cutoff: int = 2,
                       antipode_sign: int = -1) -> List[CheckResult]:
    _require_abelian(st)
    N = st.order
    report: List[CheckResult] = []
    elems = words_up_to(generators, cutoff, st)
    for name, u in elems:
        du = coproduct(u)
        lhs = coproduct(du, 0).truncate_total(N)
        rhs = coproduct(du, 1).truncate_total(N)
        report.append(CheckResult("coassociativity", name, lhs == rhs))
        report.append(CheckResult("counit-left", name, counit(du, 0) == u))
        report.append(CheckResult("counit-right", name, counit(du, 1) == u))
        eps = counit_star(u)
        target = unit_tensor(st).scale(1) if not eps.is_zero() else None
        expect = Tensor(1, st.nvars, N)
        if not eps.is_zero():
            expect._add(((0,), ((0,) * st.algebra.dim,)), eps)
        left = merge_legs(antipode(du, st, 0, antipode_sign), st, 0).truncate_total(N)
        right = merge_legs(antipode(du, st, 1, antipode_sign), st, 0).truncate_total(N)
        report.append(CheckResult("antipode-left", name, left == expect))
        report.append(CheckResult("antipode-right", name, right == expect))
        del target
    by_len = [(nm, el) for nm, el in elems]
    for (n1, u), (n2, v) in itertools.product(by_len, by_len):
        l1 = 0 if n1 == "1" else n1.count("g")
        l2 = 0 if n2 == "1" else n2.count("g")
        if l1 + l2 > cutoff or l1 == 0 or l2 == 0:
            continue
        lhs = coproduct(lr_smash_multiply(u, v, st)).truncate_total(N)
        rhs = lr_smash_multiply(coproduct(u), coproduct(v), st).truncate_total(N)
        report.append(CheckResult("bialgebra", f"{n1}|{n2}", lhs == rhs))
        e_uv = counit_star(lr_smash_multiply(u, v, st))
        report.append(CheckResult("counit-multiplicative", f"{n1}|{n2}",
                                  e_uv == counit_star(u) * counit_star(v)))
    return report


# -- text grammar for tensor elements ---------------------------------------------------------------

def parse_smash(text: str, st: SmashStructure, coord_names=None) -> SmashElement:
    """Parse ``"x⊗X + t*x^2⊗X*Y"`` (``@`` may replace ``⊗``).

    Left of ``⊗`` is a coefficient (``t`` is the deformation parameter),
    right of it a product of generator names of ``st.algebra``.
    """
    import ast

    if coord_names is None:
        coord_names = ["x"] if st.nvars == 1 else [f"x{i}" for i in range(st.nvars)]
    src = text.replace("⊗", "@").replace("^", "**")
    tree = ast.parse(src, mode="eval").body
    gens = {nm: i for i, nm in enumerate(st.algebra.basis_names)}
    dim = st.algebra.dim
    N = st.order

    def coeff(node) -> CElem:
        # returns {(k,): Expr}; t tracked as a series variable
        if isinstance(node, ast.Name) and node.id == "t":
            return {(1,): ONE}
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Mult, ast.Add, ast.Sub)):
            a, b = coeff(node.left), coeff(node.right)
            if isinstance(node.op, ast.Mult):
                return SmashStructure._mul0(st, a, b)
            if isinstance(node.op, ast.Add):
                return celem_add(a, b)
            return celem_add(a, celem_scale(b, -1))
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
            base = coeff(node.left)
            p = ast.literal_eval(node.right)
            out = {(0,): ONE}
            for _ in range(p):
                out = SmashStructure._mul0(st, out, base)
            return out
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return celem_scale(coeff(node.operand), -1)
        text_node = ast.unparse(node).replace("**", "^")
        return {(0,): parse(text_node, coord_names)}

    def mono(node) -> Dict[tuple, Fraction]:
        if isinstance(node, ast.Constant) and node.value == 1:
            return {(0, (0,) * dim): Fraction(1)}
        if isinstance(node, ast.Name):
            a = [0] * dim
            a[gens[node.id]] = 1
            return {(0, tuple(a)): Fraction(1)}
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
            base = mono(node.left)
            out = {(0, (0,) * dim): Fraction(1)}
            for _ in range(ast.literal_eval(node.right)):
                out = _bmul(out, base)
            return out
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
            return _bmul(mono(node.left), mono(node.right))
        raise ValueError(f"bad monomial {ast.unparse(node)!r}")

    def _bmul(x, y):
        out = {}
        for (k1, a1), c1 in x.items():
            for (k2, a2), c2 in y.items():
                if k1 + k2 > N:
                    continue
                for (k, g), c in pbw_multiply(st.algebra, a1, a2, N - k1 - k2).items():
                    key = (k + k1 + k2, g)
                    out[key] = out.get(key, 0) + c * c1 * c2
        return out

    def _mult_chain(node):
        # flatten a left-associated chain of * and @ (same precedence)
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Mult, ast.MatMult)):
            return _mult_chain(node.left) + [("@" if isinstance(node.op, ast.MatMult) else "*", node.right)]
        return [("*", node)]

    def term(node) -> SmashElement:
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Add):
            return SmashElement.wrap(term(node.left) + term(node.right))
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Sub):
            return SmashElement.wrap(term(node.left) - term(node.right))
        chain = _mult_chain(node)
        split = [i for i, (op, _) in enumerate(chain) if op == "@"]
        if split:
            i = split[0]
            C = {(0,): ONE}
            for _, f in chain[:i]:
                C = SmashStructure._mul0(st, C, coeff(f))
            B = {(0, (0,) * dim): Fraction(1)}
            for _, f in chain[i:]:
                B = _bmul(B, mono(f))
        else:
            C = coeff(node)
            B = {(0, (0,) * dim): Fraction(1)}
        out = SmashElement(st.nvars, N)
        for (k,), e in C.items():
            for (kb, a), c in B.items():
                if k + kb <= N:
                    out._add(((k + kb,), (a,)), e.scale(c))
        return out

    return term(tree)
