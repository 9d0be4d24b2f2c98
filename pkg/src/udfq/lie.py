"""Lie algebra data, the three-dimensional case tree, and the built-in groups.

Structure constants are stored as ``c[i][j][k]`` meaning
``[e_i, e_j] = sum_k c[i][j][k] e_k``.  Exact mode keeps them as
:class:`fractions.Fraction`; any float entry switches the algebra to double
mode, where identities are checked to ``1e-12``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .symexpr import Expr, ZERO, exp, var

TOL_ALGEBRAIC = 1e-12
TOL_FD = 1e-9

Vector = Tuple


class NotSubalgebra(ValueError):
    pass


class UnsupportedDimension(ValueError):
    pass


class NotSolvable(ValueError):
    pass


class VariantMismatch(TypeError):
    pass


def _num(x):
    if isinstance(x, (Fraction, float)):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, np.floating):
        return float(x)
    return Fraction(x)


def _is_zero(x, exact: bool) -> bool:
    return x == 0 if exact else abs(x) <= TOL_ALGEBRAIC


# -- exact / float linear algebra ---------------------------------------------------

def rref(rows: Sequence[Sequence], exact: bool = True):
    """Row-reduce; returns (reduced nonzero rows, pivot columns).

    Pivot: largest absolute numerator (exact) or magnitude (float) in the
    column, ties to the lowest row index.
    """
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for col in range(ncols):
        best, best_val = None, None
        for i in range(r, len(m)):
            v = m[i][col]
            if _is_zero(v, exact):
                continue
            mag = abs(v.numerator) if exact else abs(v)
            if best is None or mag > best_val:
                best, best_val = i, mag
        if best is None:
            continue
        m[r], m[best] = m[best], m[r]
        piv = m[r][col]
        m[r] = [x / piv for x in m[r]]
        for i in range(len(m)):
            if i != r and not _is_zero(m[i][col], exact):
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    out = m[:r]
    if not exact:
        out = [[0.0 if abs(x) <= TOL_ALGEBRAIC else x for x in row] for row in out]
    return [tuple(row) for row in out], pivots


def span_basis(vectors: Sequence[Sequence], exact: bool = True) -> List[tuple]:
    return rref(vectors, exact)[0]


def rank(vectors: Sequence[Sequence], exact: bool = True) -> int:
    return len(rref(vectors, exact)[0])


def coordinates(v: Sequence, basis: Sequence[Sequence], exact: bool = True):
    """Coordinates of ``v`` in ``basis`` or ``None`` when ``v`` is outside the span."""
    if not basis:
        return () if all(_is_zero(x, exact) for x in v) else None
    n = len(basis)
    # columns are basis vectors; augmented with v
    aug = [[basis[j][i] for j in range(n)] + [v[i]] for i in range(len(v))]
    red, piv = rref(aug, exact)
    if n in piv:
        return None
    sol = [Fraction(0) if exact else 0.0] * n
    for row, p in zip(red, piv):
        sol[p] = row[-1]
    # the basis is assumed independent
    return tuple(sol)


def in_span(v, basis, exact=True) -> bool:
    return coordinates(v, basis, exact) is not None


def nullspace(matrix: Sequence[Sequence], exact: bool = True) -> List[tuple]:
    if not matrix:
        return []
    ncols = len(matrix[0])
    red, piv = rref(matrix, exact)
    free = [c for c in range(ncols) if c not in piv]
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    out = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for row, p in zip(red, piv):
            v[p] = -row[f]
        out.append(tuple(v))
    return out


def intersect(U: Sequence[Sequence], V: Sequence[Sequence], exact: bool = True) -> List[tuple]:
    if not U or not V:
        return []
    n = len(U[0])
    cols = [list(u) for u in U] + [[-x for x in v] for v in V]
    mat = [[cols[j][i] for j in range(len(cols))] for i in range(n)]
    out = []
    for sol in nullspace(mat, exact):
        out.append(tuple(sum(sol[j] * U[j][i] for j in range(len(U))) for i in range(n)))
    return span_basis(out, exact)


# -- Lie algebras -----------------------------------------------------------------------

@dataclass(frozen=True)
class LieAlgebra:
    basis_names: Tuple[str, ...]
    c: Tuple  # c[i][j][k]

    def __post_init__(self):
        n = len(self.basis_names)
        if not 1 <= n <= 8:
            raise UnsupportedDimension(f"dimension {n} outside 1..8")

    @property
    def dim(self) -> int:
        return len(self.basis_names)

    @property
    def exact(self) -> bool:
        return all(not isinstance(x, float) for a in self.c for b in a for x in b)

    @property
    def zero(self):
        return Fraction(0) if self.exact else 0.0

    @classmethod
    def from_brackets(cls, names: Sequence[str],
                      brackets: Mapping[Tuple[int, int], Mapping[int, object]],
                      antisymmetrize: bool = True) -> "LieAlgebra":
        """Build from ``{(i, j): {k: coeff}}``; unlisted brackets are zero."""
        n = len(names)
        exact = all(not isinstance(v, float) for d in brackets.values() for v in d.values())
        z = Fraction(0) if exact else 0.0
        c = [[[z] * n for _ in range(n)] for _ in range(n)]
        for (i, j), coeffs in brackets.items():
            for k, v in coeffs.items():
                v = _num(v)
                c[i][j][k] = v
                if antisymmetrize:
                    c[j][i][k] = -v
        return cls(tuple(names), tuple(tuple(tuple(r) for r in row) for row in c))

    def vec(self, **coords) -> tuple:
        out = [self.zero] * self.dim
        for name, v in coords.items():
            out[self.basis_names.index(name)] = _num(v)
        return tuple(out)

    def unit(self, i: int) -> tuple:
        out = [self.zero] * self.dim
        out[i] = Fraction(1) if self.exact else 1.0
        return tuple(out)

    def bracket(self, u: Sequence, v: Sequence) -> tuple:
        n = self.dim
        out = [self.zero] * n
        for i in range(n):
            if u[i] == 0:
                continue
            for j in range(n):
                if v[j] == 0:
                    continue
                f = u[i] * v[j]
                cij = self.c[i][j]
                for k in range(n):
                    if cij[k] != 0:
                        out[k] += f * cij[k]
        return tuple(out)

    def ad(self, u: Sequence) -> List[list]:
        """Matrix of ad(u): column j is [u, e_j]."""
        cols = [self.bracket(u, self.unit(j)) for j in range(self.dim)]
        return [[cols[j][i] for j in range(self.dim)] for i in range(self.dim)]

    def change_basis(self, P: Sequence[Sequence]) -> "LieAlgebra":
        """New basis b'_i = sum_j P[i][j] b_j."""
        exact = self.exact and all(not isinstance(x, float) for r in P for x in r)
        P = [[_num(x) for x in r] for r in P]
        n = self.dim
        new = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                br = self.bracket(P[i], P[j])
                co = coordinates(br, P, exact)
                if co is None:
                    raise ValueError("P is not invertible")
                new[i][j] = tuple(co)
        names = tuple(f"{nm}'" for nm in self.basis_names)
        return LieAlgebra(names, tuple(tuple(r) for r in new))

    def subalgebra(self, basis: Sequence[Sequence], names: Sequence[str]) -> "LieAlgebra":
        """Structure constants of a subalgebra given by a basis (must be closed)."""
        m = len(basis)
        c = [[None] * m for _ in range(m)]
        for i in range(m):
            for j in range(m):
                co = coordinates(self.bracket(basis[i], basis[j]), basis, self.exact)
                if co is None:
                    raise NotSubalgebra(f"[{names[i]}, {names[j]}] leaves the span")
                c[i][j] = tuple(co)
        return LieAlgebra(tuple(names), tuple(tuple(r) for r in c))

    def to_json(self, w=None) -> dict:
        br = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                if any(x != 0 for x in self.c[i][j]):
                    br.append({"i": i, "j": j, "coeffs": [str(x) for x in self.c[i][j]]})
        out = {"dim": self.dim, "basis": list(self.basis_names), "brackets": br}
        if w is not None:
            out["w"] = [[str(x) for x in row] for row in w]
        return out


def algebra_from_json(data: dict | str):
    """Parse the JSON algebra schema; returns (LieAlgebra, w or None)."""
    if isinstance(data, str):
        data = json.loads(data)
    n = int(data["dim"])
    names = data.get("basis") or [f"e{i}" for i in range(n)]
    if len(names) != n:
        raise ValueError("basis length differs from dim")
    brackets = {}
    for b in data.get("brackets", []):
        coeffs = [_num(x) for x in b["coeffs"]]
        if len(coeffs) != n:
            raise ValueError("bracket coefficient vector has wrong length")
        brackets[(int(b["i"]), int(b["j"]))] = dict(enumerate(coeffs))
    alg = LieAlgebra.from_brackets(names, brackets)
    w = data.get("w")
    if w is not None:
        w = tuple(tuple(_num(x) for x in row) for row in w)
    return alg, w


@dataclass(frozen=True)
class Violation:
    kind: str  # "antisymmetry" or "jacobi"
    indices: tuple
    value: object


def validate(alg: LieAlgebra) -> List[Violation]:
    """Brute-force antisymmetry and Jacobi check; empty list means valid."""
    n, c, exact = alg.dim, alg.c, alg.exact
    report = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                s = c[i][j][k] + c[j][i][k]
                if not _is_zero(s, exact):
                    report.append(Violation("antisymmetry", (i, j, k), s))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    s = 0
                    for m in range(n):
                        s += (c[i][j][m] * c[m][k][l] + c[j][k][m] * c[m][i][l]
                              + c[k][i][m] * c[m][j][l])
                    if not _is_zero(s, exact):
                        report.append(Violation("jacobi", (i, j, k, l), s))
    return report


# -- built-in algebras --------------------------------------------------------------------

def abelian(n: int = 3) -> LieAlgebra:
    return LieAlgebra.from_brackets([f"X{i}" for i in range(n)], {})


def axb() -> LieAlgebra:
    """'ax+b': [A, E] = E."""
    return LieAlgebra.from_brackets(["A", "E"], {(0, 1): {1: 1}})


def book() -> LieAlgebra:
    """rho(A) = Id on d = span{X, Y}."""
    return LieAlgebra.from_brackets(["A", "X", "Y"], {(0, 1): {1: 1}, (0, 2): {2: 1}})


def heisenberg() -> LieAlgebra:
    return LieAlgebra.from_brackets(["X", "Y", "Z"], {(0, 1): {2: 1}})


def axb_plus_line() -> LieAlgebra:
    """'ax+b' + R Z with Z central."""
    return LieAlgebra.from_brackets(["A", "E", "Z"], {(0, 1): {1: 1}})


def jordan_book(lam=1) -> LieAlgebra:
    """rho(A) = [[1, lam], [0, 1]] on span{X, Y}: [A,X] = X, [A,Y] = lam X + Y."""
    lam = _num(lam)
    return LieAlgebra.from_brackets(["A", "X", "Y"], {(0, 1): {1: 1}, (0, 2): {1: lam, 2: 1}})


def builtin_algebras() -> Dict[str, LieAlgebra]:
    return {
        "r1": abelian(1), "r2": abelian(2), "r3": abelian(3),
        "axb": axb(), "book": book(), "heisenberg": heisenberg(),
        "axb+r": axb_plus_line(), "jordan1": jordan_book(1),
    }


def wedge(alg: LieAlgebra, u: Sequence, v: Sequence) -> tuple:
    """Bivector components of u ^ v = u (x) v - v (x) u."""
    n = alg.dim
    return tuple(tuple(_num(u[i]) * _num(v[j]) - _num(v[i]) * _num(u[j]) for j in range(n))
                 for i in range(n))


def parse_wedge(alg: LieAlgebra, text: str) -> tuple:
    """``"A^X"`` or ``"A^X + 2*E^Z"`` into bivector components."""
    n = alg.dim
    total = [[Fraction(0)] * n for _ in range(n)]
    for part in text.replace("-", "+-").split("+"):
        part = part.strip()
        if not part:
            continue
        sign = 1
        if part.startswith("-"):
            sign, part = -1, part[1:].strip()
        coef = Fraction(1)
        if "*" in part:
            cs, part = part.split("*", 1)
            coef = Fraction(cs.strip())
        a, b = [s.strip() for s in part.split("^")]
        w = wedge(alg, alg.vec(**{a: 1}), alg.vec(**{b: 1}))
        for i in range(n):
            for j in range(n):
                total[i][j] += sign * coef * w[i][j]
    return tuple(tuple(r) for r in total)


# -- pre-symplectic pairs and the case tree -----------------------------------------------

@dataclass(frozen=True)
class PreSymplecticPair:
    algebra: LieAlgebra
    w_e: Tuple

    def __post_init__(self):
        n = self.algebra.dim
        w = tuple(tuple(_num(x) for x in row) for row in self.w_e)
        object.__setattr__(self, "w_e", w)
        if len(w) != n or any(len(r) != n for r in w):
            raise ValueError("w_e has the wrong shape")
        exact = self.exact
        for i in range(n):
            for j in range(n):
                if not _is_zero(w[i][j] + w[j][i], exact):
                    raise ValueError("w_e is not antisymmetric")
        if rank(w, exact) % 2:
            raise ValueError("w_e has odd rank")

    @property
    def exact(self) -> bool:
        return self.algebra.exact and all(not isinstance(x, float) for r in self.w_e for x in r)


@dataclass(frozen=True)
class DerivedAlgebra:
    basis: Tuple[tuple, ...]
    abelian: bool

    @property
    def dim(self) -> int:
        return len(self.basis)


def derived_algebra(alg: LieAlgebra) -> DerivedAlgebra:
    n = alg.dim
    vecs = [alg.c[i][j] for i in range(n) for j in range(i + 1, n)]
    basis = span_basis(vecs, alg.exact)
    ab = all(_is_zero(x, alg.exact) for u in basis for v in basis for x in alg.bracket(u, v))
    return DerivedAlgebra(tuple(basis), ab)


def _check_closed(alg: LieAlgebra, basis) -> bool:
    for u in basis:
        for v in basis:
            if not in_span(alg.bracket(u, v), basis, alg.exact):
                return False
    return True


def radical_orthodual(pair: PreSymplecticPair) -> List[tuple]:
    """Basis of s = image of the map g* -> g defined by w_e (its column space)."""
    alg, w = pair.algebra, pair.w_e
    n = alg.dim
    cols = [tuple(w[i][j] for i in range(n)) for j in range(n)]
    basis = span_basis(cols, pair.exact)
    if not _check_closed(alg, basis):
        raise NotSubalgebra("the orthodual of rad(w_e) is not closed; w_e is not Poisson here")
    return basis


def is_solvable(alg: LieAlgebra) -> bool:
    current = [alg.unit(i) for i in range(alg.dim)]
    while current:
        vecs = [alg.bracket(u, v) for u in current for v in current]
        nxt = span_basis(vecs, alg.exact)
        if len(nxt) == len(current):
            return False
        current = nxt
    return True


CASE1_SEMISIMPLE = "Case1-s!=d-semisimple"
CASE1_NONSEMISIMPLE = "Case1-s!=d-nonsemisimple"
CASE1_ABELIAN = "Case1-s=d-abelian"
CASE2_HEISENBERG = "Case2-Heisenberg"
CASE2_L = "Case2-s=L"
CASE2_ABELIAN = "Case2-s-abelian"
TRIVIAL = "trivial"
ABELIAN_G = "abelian-g"


@dataclass(frozen=True)
class Classification:
    tag: str
    d: Tuple[tuple, ...]
    s: Tuple[tuple, ...]
    p: Optional[Tuple[tuple, ...]] = None
    q: Optional[Tuple[tuple, ...]] = None
    a: Optional[Tuple[tuple, ...]] = None
    lam: Optional[object] = None
    adapted_basis: Optional[Tuple[tuple, ...]] = None
    notes: Tuple[str, ...] = ()

    def to_json(self) -> dict:
        def fmt(b):
            return None if b is None else [[str(x) for x in v] for v in b]
        return {"tag": self.tag, "d": fmt(self.d), "s": fmt(self.s), "p": fmt(self.p),
                "q": fmt(self.q), "a": fmt(self.a),
                "lambda": None if self.lam is None else str(self.lam),
                "adapted_basis": fmt(self.adapted_basis), "notes": list(self.notes)}


def classify(pair: PreSymplecticPair) -> Classification:
    alg = pair.algebra
    exact = pair.exact
    if alg.dim != 3:
        raise UnsupportedDimension("classification is only defined for dim g = 3")
    if not is_solvable(alg):
        raise NotSolvable("g is not solvable")
    d = derived_algebra(alg)
    s = radical_orthodual(pair)
    if len(s) == 0:
        msg = "w_e = 0: the undeformed product"
        warnings.warn(msg)
        return Classification(TRIVIAL, d.basis, (), notes=(msg,))
    if d.dim == 0:
        return Classification(ABELIAN_G, d.basis, tuple(s),
                              notes=("g abelian: Moyal formula along s",))
    if d.dim == 2:
        if len(intersect(s, d.basis, exact)) == 2:
            return Classification(CASE1_ABELIAN, d.basis, tuple(s))
        p = intersect(s, d.basis, exact)
        X = p[0]
        Y = next(v for v in d.basis if not in_span(v, [X], exact))
        A = next(v for v in s if not in_span(v, d.basis, exact))
        cx = coordinates(alg.bracket(A, X), [X, Y], exact)
        cy = coordinates(alg.bracket(A, Y), [X, Y], exact)
        mu, nu, b = cx[0], cy[1], cy[0]
        # [A, X] = mu X because p is rho(A)-invariant
        if not _is_zero(mu - nu, exact):
            c = -b / (mu - nu)
            Yq = tuple(y + c * x for x, y in zip(X, Y))
            return Classification(CASE1_SEMISIMPLE, d.basis, tuple(s), p=(X,), q=(Yq,), a=(A,),
                                  adapted_basis=(A, X, Yq))
        if _is_zero(b, exact):
            return Classification(CASE1_SEMISIMPLE, d.basis, tuple(s), p=(X,), q=(Y,), a=(A,),
                                  adapted_basis=(A, X, Y))
        An = tuple(x / mu for x in A)
        lam = b / mu
        return Classification(CASE1_NONSEMISIMPLE, d.basis, tuple(s), p=(X,), a=(An,), lam=lam,
                              adapted_basis=(An, X, Y),
                              notes=("lambda depends on the normalisation of Y; "
                                     "Y is the first derived-algebra basis vector outside p",))
    # dim d == 1
    Z = d.basis[0]
    central = all(_is_zero(x, exact) for i in range(3) for x in alg.bracket(alg.unit(i), Z))
    if central:
        return Classification(CASE2_HEISENBERG, d.basis, tuple(s))
    s_abelian = all(_is_zero(x, exact) for u in s for v in s for x in alg.bracket(u, v))
    return Classification(CASE2_ABELIAN if s_abelian else CASE2_L, d.basis, tuple(s))


def transvection_algebra(lam=1) -> LieAlgebra:
    """Six-dimensional transvection algebra with basis k1, k2, e1, f1, e2, f2."""
    lam = _num(lam)
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    k1, k2, e1, f1, e2, f2 = range(6)
    return LieAlgebra.from_brackets(
        ["k1", "k2", "e1", "f1", "e2", "f2"],
        {(f1, k1): {e1: 1},
         (f1, k2): {e2: 1, e1: lam},
         (f1, e1): {k1: 1},
         (f1, e2): {k2: 1, k1: lam}})


def transvection_embed(lam=1):
    """Return (transvection algebra, embedding rows for A, X, Y, embedded subalgebra)."""
    big = transvection_algebra(lam)
    h = Fraction(1, 2)
    A = big.vec(f1=1)
    X = big.vec(k1=h, e1=h)
    Y = big.vec(k2=h, e2=h)
    sub = big.subalgebra([A, X, Y], ["A", "X", "Y"])
    return big, (A, X, Y), sub


# -- groups -------------------------------------------------------------------------------

@dataclass(frozen=True)
class AxB:
    a: float
    l: float

    @property
    def coords(self):
        return (self.a, self.l)


@dataclass(frozen=True)
class Book:
    a: float
    v: Tuple[float, float]

    @property
    def coords(self):
        return (self.a, self.v[0], self.v[1])


@dataclass(frozen=True)
class Rn:
    x: Tuple[float, ...]

    @property
    def coords(self):
        return tuple(self.x)


@dataclass(frozen=True)
class Heis:
    x: float
    y: float
    z: float

    @property
    def coords(self):
        return (self.x, self.y, self.z)


@dataclass(frozen=True, eq=False)
class SU2:
    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=complex)
        object.__setattr__(self, "m", m)
        if (np.linalg.norm(m @ m.conj().T - np.eye(2)) > TOL_ALGEBRAIC * 10
                or abs(np.linalg.det(m) - 1) > TOL_ALGEBRAIC * 10):
            raise ValueError("not an SU(2) matrix")


@dataclass(frozen=True, eq=False)
class SL2C:
    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=complex)
        object.__setattr__(self, "m", m)
        if abs(np.linalg.det(m) - 1) > 1e-12 * max(1.0, np.abs(m).max() ** 2):
            raise ValueError("determinant is not 1")


GroupElement = object  # AxB | Book | Rn | Heis | SU2 | SL2C

GROUP_KINDS = {"rn": Rn, "axb": AxB, "book": Book, "heis": Heis}


def _from_coords(kind: str, c: Sequence[float]):
    if kind == "axb":
        return AxB(c[0], c[1])
    if kind == "book":
        return Book(c[0], (c[1], c[2]))
    if kind == "heis":
        return Heis(c[0], c[1], c[2])
    return Rn(tuple(c))


def kind_of(g) -> str:
    for k, cls in GROUP_KINDS.items():
        if isinstance(g, cls):
            return k
    if isinstance(g, SU2):
        return "su2"
    if isinstance(g, SL2C):
        return "sl2c"
    raise TypeError(f"not a group element: {g!r}")


def group_op(x, y):
    if type(x) is not type(y):
        raise VariantMismatch(f"cannot multiply {type(x).__name__} by {type(y).__name__}")
    if isinstance(x, AxB):
        return AxB(x.a + y.a, math.exp(-y.a) * x.l + y.l)
    if isinstance(x, Book):
        f = math.exp(-y.a)
        return Book(x.a + y.a, (f * x.v[0] + y.v[0], f * x.v[1] + y.v[1]))
    if isinstance(x, Rn):
        if len(x.x) != len(y.x):
            raise VariantMismatch("dimension mismatch")
        return Rn(tuple(a + b for a, b in zip(x.x, y.x)))
    if isinstance(x, Heis):
        return Heis(x.x + y.x, x.y + y.y, x.z + y.z + x.x * y.y)
    if isinstance(x, SU2):
        return SU2(x.m @ y.m)
    if isinstance(x, SL2C):
        return SL2C(x.m @ y.m)
    raise TypeError(f"unknown group element {x!r}")


def inverse(x):
    if isinstance(x, AxB):
        return AxB(-x.a, -math.exp(x.a) * x.l)
    if isinstance(x, Book):
        f = math.exp(x.a)
        return Book(-x.a, (-f * x.v[0], -f * x.v[1]))
    if isinstance(x, Rn):
        return Rn(tuple(-a for a in x.x))
    if isinstance(x, Heis):
        return Heis(-x.x, -x.y, -x.z + x.x * x.y)
    if isinstance(x, SU2):
        return SU2(x.m.conj().T)
    if isinstance(x, SL2C):
        m = x.m
        return SL2C(np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]))
    raise TypeError(f"unknown group element {x!r}")


def identity(kind: str, n: int = 1):
    if kind == "axb":
        return AxB(0.0, 0.0)
    if kind == "book":
        return Book(0.0, (0.0, 0.0))
    if kind == "heis":
        return Heis(0.0, 0.0, 0.0)
    if kind == "rn":
        return Rn((0.0,) * n)
    if kind == "su2":
        return SU2(np.eye(2))
    if kind == "sl2c":
        return SL2C(np.eye(2))
    raise ValueError(f"unknown group kind {kind!r}")


def group_exp(kind: str, X: Sequence[float]):
    """Exponential of a Lie algebra element for the built-in coordinate groups."""
    X = [float(x) for x in X]
    if kind == "rn":
        return Rn(tuple(X))
    if kind in ("axb", "book"):
        al = X[0]
        f = 1.0 if al == 0 else -math.expm1(-al) / al
        rest = [f * b for b in X[1:]]
        return _from_coords(kind, [al] + rest)
    if kind == "heis":
        return Heis(X[0], X[1], X[2] + X[0] * X[1] / 2)
    raise ValueError(f"no exponential for {kind!r}")


def builtin_algebra_for(kind: str, n: int = 1) -> LieAlgebra:
    return {"axb": axb, "book": book, "heis": heisenberg}.get(kind, lambda: abelian(n))()


def group_dim(kind: str, n: int = 1) -> int:
    return {"axb": 2, "book": 3, "heis": 3}.get(kind, n)


def group_law_exprs(kind: str, n: int = 1) -> List[Expr]:
    """Coordinates of g.g' as Exprs in x_0..x_{d-1} (g) and x_d..x_{2d-1} (g')."""
    d = group_dim(kind, n)
    g = [var(i) for i in range(d)]
    h = [var(d + i) for i in range(d)]
    if kind == "rn":
        return [g[i] + h[i] for i in range(d)]
    if kind in ("axb", "book"):
        f = exp(-h[0])
        return [g[0] + h[0]] + [f * g[i] + h[i] for i in range(1, d)]
    if kind == "heis":
        return [g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1]]
    raise ValueError(f"unknown group kind {kind!r}")


# A first-order differential operator is a tuple of Expr coefficients of d/dx_k.
Operator = Tuple[Expr, ...]


def apply_operator(op: Operator, f: Expr, offset: int = 0) -> Expr:
    out = ZERO
    for k, c in enumerate(op):
        if c.is_zero():
            continue
        df = f.diff(k + offset)
        if not df.is_zero():
            out = out + c * df
    return out


def operator_commutator(op1: Operator, op2: Operator) -> Operator:
    return tuple(apply_operator(op1, op2[k]) - apply_operator(op2, op1[k]) for k in range(len(op1)))


def left_invariant_frame(kind: str, n: int = 1) -> List[Operator]:
    """X~_m = d/dt g.exp(t e_m) at t = 0, derived from the group law."""
    d = group_dim(kind, n)
    law = group_law_exprs(kind, n)
    at_e = {d + i: ZERO for i in range(d)}
    return [tuple(law[k].diff(d + m).subs(at_e) for k in range(d)) for m in range(d)]


def right_invariant_frame(kind: str, n: int = 1) -> List[Operator]:
    """X-bar_m = d/dt exp(t e_m).g at t = 0, in the coordinates of g."""
    d = group_dim(kind, n)
    law = group_law_exprs(kind, n)
    sub = {i: ZERO for i in range(d)}
    sub.update({d + i: var(i) for i in range(d)})
    return [tuple(law[k].diff(m).subs(sub) for k in range(d)) for m in range(d)]


def _fd_derivative(fun: Callable[[float], float], h: float = 1e-3) -> float:
    return (-fun(2 * h) + 8 * fun(h) - 8 * fun(-h) + fun(-2 * h)) / (12 * h)


def left_invariant_derivative(X: Sequence, f, g, right: bool = False, h: float = 1e-3):
    """(d/dt) f(g.exp(tX)) at t = 0 (or f(exp(tX).g) with ``right=True``).

    ``f`` may be an :class:`Expr` in the group coordinates (exact frame route)
    or a callable taking a group element (fourth-order finite differences).
    """
    kind = kind_of(g)
    d = len(g.coords)
    if isinstance(f, Expr):
        frame = (right_invariant_frame if right else left_invariant_frame)(kind, d)
        total = ZERO
        for m, xm in enumerate(X):
            if xm:
                total = total + apply_operator(frame[m], f).scale(_num(xm) if not isinstance(xm, float) else xm)
        return total.evaluate(g.coords)

    def curve(t):
        e = group_exp(kind, [t * float(x) for x in X])
        return f(group_op(e, g) if right else group_op(g, e))
    return _fd_derivative(curve, h)


def right_invariant_derivative(X, f, g, h: float = 1e-3):
    return left_invariant_derivative(X, f, g, right=True, h=h)
