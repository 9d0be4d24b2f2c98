"""Closed symbolic expressions over numbered coordinates, plus truncated series.

An :class:`Expr` is kept in a canonical sum-of-products form.  Each term is a
coefficient times a monomial, and a monomial is a sorted product of atoms
raised to positive integer powers.  Atoms are coordinates ``x_i`` or one of the
transcendental functions ``exp``, ``sinh``, ``cosh``, ``sin``, ``cos`` applied
to an arbitrary sub-expression.  Inside a monomial all exponentials are merged
into a single ``exp`` of the summed argument, and odd/even functions are
normalised by the sign of their argument.  There is no division node, so
evaluation is total and differentiation is closed.

Coefficients are exact Gaussian rationals (``QQ_I``) unless a float enters, in
which case the affected coefficients become Python ``complex`` values.
"""
from __future__ import annotations

import ast
import numbers
import random
from fractions import Fraction
from typing import Callable, Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np
from sympy.polys.domains import QQ, QQ_I

__all__ = [
    "Expr", "FormalSeries", "DimensionMismatch", "OrderMismatch",
    "const", "var", "exp", "sinh", "cosh", "sin", "cos",
    "parse", "coerce", "I", "ZERO", "ONE",
]


class DimensionMismatch(ValueError):
    pass


class OrderMismatch(ValueError):
    pass


_QZERO = QQ_I(0, 0)
_QONE = QQ_I(1, 0)
_FUNCS = ("cos", "cosh", "exp", "sin", "sinh")
_ODD = {"sinh", "sin"}
_EVEN = {"cosh", "cos"}


def coerce(c):
    """Return ``c`` as an exact ``QQ_I`` element, or a ``complex`` for floats."""
    if isinstance(c, type(_QZERO)):
        return c
    if isinstance(c, bool):
        c = int(c)
    if isinstance(c, int):
        return QQ_I(c, 0)
    if isinstance(c, Fraction):
        return QQ_I(QQ(c.numerator, c.denominator), 0)
    if isinstance(c, numbers.Rational):
        return QQ_I(QQ(int(c.numerator), int(c.denominator)), 0)
    if isinstance(c, (float, complex, np.floating, np.complexfloating)):
        return complex(c)
    try:
        return QQ_I.from_sympy(c)
    except Exception as exc:  # pragma: no cover - defensive
        raise TypeError(f"cannot use {c!r} as a coefficient") from exc


def _to_complex(c) -> complex:
    if type(c) is complex:
        return c
    return complex(float(c.x), float(c.y))


def _cadd(a, b):
    if type(a) is complex or type(b) is complex:
        return _to_complex(a) + _to_complex(b)
    return a + b


def _cmul(a, b):
    if type(a) is complex or type(b) is complex:
        return _to_complex(a) * _to_complex(b)
    return a * b


def _is_zero(c) -> bool:
    return c == 0 if type(c) is complex else not c


def _ckey(c):
    if type(c) is complex:
        return (1, c.real, c.imag)
    return (0, c.x, c.y)


def _is_exact(c) -> bool:
    return type(c) is not complex


# An atom is ("v", i) or (name, Expr).  Monomials are tuples of (atom, power).

def _atom_key(atom):
    if atom[0] == "v":
        return (0, atom[1])
    return (1, atom[0], atom[1].key)


class Expr:
    """Immutable canonical expression.  Build with :func:`var`, :func:`const`,
    the function constructors and ordinary arithmetic operators."""

    __slots__ = ("_terms", "_key", "_hash", "_dcache")

    def __init__(self, terms: Mapping | None = None):
        self._terms: Dict[tuple, object] = dict(terms) if terms else {}
        self._key = None
        self._hash = None
        self._dcache = None

    # -- construction helpers -------------------------------------------------
    @staticmethod
    def _from_terms(terms: Dict[tuple, object]) -> "Expr":
        e = Expr.__new__(Expr)
        e._terms = terms
        e._key = None
        e._hash = None
        e._dcache = None
        return e

    @classmethod
    def lift(cls, x) -> "Expr":
        if isinstance(x, Expr):
            return x
        c = coerce(x)
        if _is_zero(c):
            return ZERO
        return cls._from_terms({(): c})

    # -- canonical identity -----------------------------------------------------
    @property
    def key(self):
        if self._key is None:
            items = []
            for mono, c in self._terms.items():
                mk = tuple((_atom_key(a), p) for a, p in mono)
                items.append((mk, _ckey(c)))
            items.sort()
            self._key = tuple(items)
        return self._key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Expr):
            try:
                other = Expr.lift(other)
            except TypeError:
                return NotImplemented
        if len(self._terms) != len(other._terms):
            return False
        return self.key == other.key

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    # -- inspection ---------------------------------------------------------------
    @property
    def terms(self):
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and () in self._terms)

    def constant_value(self):
        return self._terms.get((), _QZERO)

    def is_exact(self) -> bool:
        for mono, c in self._terms.items():
            if not _is_exact(c):
                return False
            for a, _ in mono:
                if a[0] != "v" and not a[1].is_exact():
                    return False
        return True

    def variables(self) -> set:
        out = set()
        for mono in self._terms:
            for a, _ in mono:
                if a[0] == "v":
                    out.add(a[1])
                else:
                    out |= a[1].variables()
        return out

    def atoms(self) -> set:
        out = set()
        for mono in self._terms:
            for a, _ in mono:
                out.add(a)
        return out

    def max_var(self) -> int:
        vs = self.variables()
        return max(vs) if vs else -1

    def is_polynomial(self) -> bool:
        return all(a[0] == "v" for mono in self._terms for a, _ in mono)

    def is_linear_form(self) -> bool:
        """True for c0 + sum c_i x_i."""
        for mono in self._terms:
            if len(mono) > 1 or (mono and (mono[0][0][0] != "v" or mono[0][1] != 1)):
                return False
        return True

    def degree(self, i: int | None = None) -> int:
        """Polynomial degree (total, or in x_i), ignoring transcendental atoms."""
        best = 0
        for mono in self._terms:
            d = sum(p for a, p in mono if a[0] == "v" and (i is None or a[1] == i))
            best = max(best, d)
        return best

    # -- arithmetic ---------------------------------------------------------------
    def __add__(self, other):
        other = Expr.lift(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        terms = dict(self._terms)
        for m, c in other._terms.items():
            if m in terms:
                s = _cadd(terms[m], c)
                if _is_zero(s):
                    del terms[m]
                else:
                    terms[m] = s
            else:
                terms[m] = c
        return Expr._from_terms(terms)

    __radd__ = __add__

    def __neg__(self):
        return Expr._from_terms({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-Expr.lift(other))

    def __rsub__(self, other):
        return Expr.lift(other) + (-self)

    def scale(self, k) -> "Expr":
        k = coerce(k)
        if _is_zero(k):
            return ZERO
        return Expr._from_terms({m: _cmul(c, k) for m, c in self._terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Expr):
            return self.scale(other)
        if not self._terms or not other._terms:
            return ZERO
        if other.is_constant():
            return self.scale(other.constant_value())
        if self.is_constant():
            return other.scale(self.constant_value())
        terms: Dict[tuple, object] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m, extra = _mono_mul(m1, m2)
                c = _cmul(c1, c2)
                if extra is not None:
                    c = _cmul(c, extra)
                if m in terms:
                    s = _cadd(terms[m], c)
                    if _is_zero(s):
                        del terms[m]
                    else:
                        terms[m] = s
                else:
                    terms[m] = c
        return Expr._from_terms(terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        # division only by numeric constants; there is no division node
        if isinstance(other, Expr):
            if not other.is_constant() or other.is_zero():
                raise TypeError("Expr supports division by nonzero constants only")
            other = other.constant_value()
        c = coerce(other)
        if _is_zero(c):
            raise ZeroDivisionError("division by zero")
        inv = 1 / c if type(c) is complex else _QONE / c
        return self.scale(inv)

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise TypeError("Expr powers must be nonnegative integers")
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- calculus -----------------------------------------------------------------
    def diff(self, i: int, times: int = 1) -> "Expr":
        e = self
        for _ in range(times):
            e = e._diff1(i)
        return e

    def _diff1(self, i: int) -> "Expr":
        if self._dcache is None:
            self._dcache = {}
        hit = self._dcache.get(i)
        if hit is not None:
            return hit
        acc: Dict[tuple, object] = {}
        pieces = []
        for mono, c in self._terms.items():
            for idx, (atom, p) in enumerate(mono):
                d_atom = _atom_diff(atom, i)
                if d_atom.is_zero():
                    continue
                rest = list(mono)
                if p == 1:
                    del rest[idx]
                else:
                    rest[idx] = (atom, p - 1)
                coeff = c if p == 1 else _cmul(c, QQ_I(p, 0))
                rest_e = Expr._from_terms({tuple(rest): coeff})
                pieces.append(rest_e * d_atom)
        for piece in pieces:
            for m, c in piece._terms.items():
                if m in acc:
                    s = _cadd(acc[m], c)
                    if _is_zero(s):
                        del acc[m]
                    else:
                        acc[m] = s
                else:
                    acc[m] = c
        out = Expr._from_terms(acc)
        self._dcache[i] = out
        return out

    def subs(self, mapping: Mapping[int, "Expr"]) -> "Expr":
        """Substitute coordinates ``x_i -> mapping[i]`` (simultaneously)."""
        mapping = {k: Expr.lift(v) for k, v in mapping.items()}
        return self._subs(mapping, {})

    def _subs(self, mapping, memo) -> "Expr":
        out = ZERO
        for mono, c in self._terms.items():
            t = Expr._from_terms({(): c})
            for atom, p in mono:
                if atom[0] == "v":
                    base = mapping.get(atom[1])
                    if base is None:
                        base = var(atom[1])
                else:
                    arg = atom[1]
                    new_arg = memo.get(arg)
                    if new_arg is None:
                        new_arg = arg._subs(mapping, memo)
                        memo[arg] = new_arg
                    base = _FUNC_BUILD[atom[0]](new_arg)
                t = t * (base ** p)
            out = out + t
        return out

    def reindex(self, shift: Mapping[int, int] | Callable[[int], int]) -> "Expr":
        f = shift if callable(shift) else (lambda i: shift.get(i, i))
        return self.subs({i: var(f(i)) for i in self.variables()})

    # -- numerics -----------------------------------------------------------------
    def evaluate(self, x: Sequence):
        """Evaluate at a point (sequence of numbers or broadcastable arrays)."""
        need = self.max_var() + 1
        if need > len(x):
            raise DimensionMismatch(f"expression uses x{need - 1}, point has dim {len(x)}")
        return self._eval(x, {})

    __call__ = evaluate

    def _eval(self, x, memo):
        total = 0
        for mono, c in self._terms.items():
            cc = _to_complex(c)
            val = cc if cc.imag else cc.real
            for atom, p in mono:
                if atom[0] == "v":
                    base = x[atom[1]]
                else:
                    arg = atom[1]
                    av = memo.get(arg)
                    if av is None:
                        av = arg._eval(x, memo)
                        memo[arg] = av
                    base = _NUMPY[atom[0]](av)
                val = val * (base if p == 1 else base ** p)
            total = total + val
        return total

    def to_complex(self, x: Sequence) -> complex:
        return complex(self.evaluate(x))

    # -- printing -----------------------------------------------------------------
    def to_string(self, names: Sequence[str] | None = None) -> str:
        if not self._terms:
            return "0"
        items = sorted(self._terms.items(), key=lambda mc: tuple((_atom_key(a), p) for a, p in mc[0]))
        parts = []
        for mono, c in items:
            factors = [_atom_str(a, p, names) for a, p in mono]
            cs = _coeff_str(c)
            if not factors:
                parts.append(cs)
            elif cs == "1":
                parts.append("*".join(factors))
            elif cs == "-1":
                parts.append("-" + "*".join(factors))
            else:
                parts.append(cs + "*" + "*".join(factors))
        s = parts[0]
        for p in parts[1:]:
            s += (" - " + p[1:]) if p.startswith("-") else (" + " + p)
        return s

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"Expr({self.to_string()!r})"


def _mono_mul(m1: tuple, m2: tuple):
    """Multiply monomials; returns (monomial, extra coefficient or None)."""
    powers: Dict[tuple, int] = {}
    exp_arg = None
    for mono in (m1, m2):
        for a, p in mono:
            if a[0] == "exp":
                arg = a[1] if p == 1 else a[1].scale(p)
                exp_arg = arg if exp_arg is None else exp_arg + arg
            else:
                powers[a] = powers.get(a, 0) + p
    items = list(powers.items())
    if exp_arg is not None and not exp_arg.is_zero():
        items.append((("exp", exp_arg), 1))
    items.sort(key=lambda ap: _atom_key(ap[0]))
    return tuple(items), None


def _atom_diff(atom, i: int) -> Expr:
    if atom[0] == "v":
        return ONE if atom[1] == i else ZERO
    name, arg = atom
    darg = arg._diff1(i)
    if darg.is_zero():
        return ZERO
    if name == "exp":
        outer = _atom_expr(atom)
    elif name == "sinh":
        outer = cosh(arg)
    elif name == "cosh":
        outer = sinh(arg)
    elif name == "sin":
        outer = cos(arg)
    else:
        outer = -sin(arg)
    return outer * darg


def _atom_expr(atom) -> Expr:
    return Expr._from_terms({((atom, 1),): _QONE})


def _coeff_str(c) -> str:
    if type(c) is complex:
        if c.imag == 0:
            return repr(c.real)
        return f"({c.real!r}+{c.imag!r}*I)"
    re, im = c.x, c.y
    if not im:
        return str(re)
    if not re:
        if im == 1:
            return "I"
        if im == -1:
            return "-I"
        return f"{im}*I"
    return f"({re}+{im}*I)" if im > 0 else f"({re}-{-im}*I)"


def _atom_str(atom, p, names) -> str:
    if atom[0] == "v":
        i = atom[1]
        s = names[i] if names is not None and i < len(names) else f"x{i}"
    else:
        s = f"{atom[0]}({atom[1].to_string(names)})"
    return s if p == 1 else f"{s}^{p}"


# -- public constructors ------------------------------------------------------------

def const(c) -> Expr:
    return Expr.lift(c)


def var(i: int) -> Expr:
    return Expr._from_terms({((("v", int(i)), 1),): _QONE})


def _float_const(arg: Expr):
    return arg.is_constant() and not arg.is_zero() and not _is_exact(arg.constant_value())


def exp(e) -> Expr:
    e = Expr.lift(e)
    if e.is_zero():
        return ONE
    if _float_const(e):
        return Expr.lift(complex(np.exp(_to_complex(e.constant_value()))))
    return _atom_expr(("exp", e))


def _parity_fn(name: str, e) -> Expr:
    e = Expr.lift(e)
    if e.is_zero():
        return ZERO if name in _ODD else ONE
    if _float_const(e):
        return Expr.lift(complex(_NUMPY[name](_to_complex(e.constant_value()))))
    ne = -e
    if ne.key < e.key:
        if name in _ODD:
            return -_atom_expr((name, ne))
        return _atom_expr((name, ne))
    return _atom_expr((name, e))


def sinh(e) -> Expr:
    return _parity_fn("sinh", e)


def cosh(e) -> Expr:
    return _parity_fn("cosh", e)


def sin(e) -> Expr:
    return _parity_fn("sin", e)


def cos(e) -> Expr:
    return _parity_fn("cos", e)


_FUNC_BUILD = {"exp": exp, "sinh": sinh, "cosh": cosh, "sin": sin, "cos": cos}
_NUMPY = {"exp": np.exp, "sinh": np.sinh, "cosh": np.cosh, "sin": np.sin, "cos": np.cos}

ZERO = Expr._from_terms({})
ONE = Expr._from_terms({(): _QONE})
I = Expr._from_terms({(): QQ_I(0, 1)})


# -- parsing --------------------------------------------------------------------------

def _default_names(names):
    table = {"I": I}
    if names is None:
        names = {"a": 0, "l": 1}
    if isinstance(names, (list, tuple)):
        names = {n: k for k, n in enumerate(names)}
    for n, k in names.items():
        table[n] = var(k)
    return table


def parse(text: str, names=None) -> Expr:
    """Parse infix text such as ``"3/2*x0^2*exp(-a) + sinh(a - l)"``.

    ``names`` maps identifiers to variable indices (default ``a -> 0``,
    ``l -> 1``); ``x0, x1, ...`` are always accepted.  ``^`` is a power with a
    nonnegative integer exponent and ``/`` is allowed only by constants.
    """
    table = _default_names(names)
    tree = ast.parse(text.replace("^", "**"), mode="eval")
    return _ast_to_expr(tree.body, table)


def _ast_to_expr(node, table) -> Expr:
    if isinstance(node, ast.Constant):
        v = node.value
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValueError(f"bad constant {v!r}")
        return Expr.lift(Fraction(str(v)) if isinstance(v, float) else v)
    if isinstance(node, ast.Name):
        if node.id in table:
            return table[node.id]
        if node.id.startswith("x") and node.id[1:].isdigit():
            return var(int(node.id[1:]))
        raise ValueError(f"unknown symbol {node.id!r}")
    if isinstance(node, ast.UnaryOp):
        x = _ast_to_expr(node.operand, table)
        if isinstance(node.op, ast.USub):
            return -x
        if isinstance(node.op, ast.UAdd):
            return x
    if isinstance(node, ast.BinOp):
        lhs = _ast_to_expr(node.left, table)
        if isinstance(node.op, ast.Pow):
            rhs = _ast_to_expr(node.right, table)
            if not rhs.is_constant():
                raise ValueError("exponent must be a constant integer")
            c = rhs.constant_value()
            if not _is_exact(c) or c.y or c.x.denominator != 1 or c.x < 0:
                raise ValueError("exponent must be a nonnegative integer")
            return lhs ** int(c.x)
        rhs = _ast_to_expr(node.right, table)
        if isinstance(node.op, ast.Add):
            return lhs + rhs
        if isinstance(node.op, ast.Sub):
            return lhs - rhs
        if isinstance(node.op, ast.Mult):
            return lhs * rhs
        if isinstance(node.op, ast.Div):
            return lhs / rhs
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
        fn = _FUNC_BUILD.get(node.func.id)
        if fn is None or len(node.args) != 1:
            raise ValueError(f"unknown function {node.func.id!r}")
        return fn(_ast_to_expr(node.args[0], table))
    raise ValueError(f"unsupported syntax: {ast.dump(node)}")


# -- equality with probabilistic fallback -------------------------------------------

def equivalent(e1: Expr, e2: Expr, points: int = 20, tol: float = 1e-10,
               seed: int = 0) -> bool:
    """Canonical-form comparison, falling back to evaluation at random points."""
    if e1 == e2:
        return True
    n = max(e1.max_var(), e2.max_var()) + 1
    rng = random.Random(seed)
    for _ in range(points):
        x = [rng.randint(-8, 8) / 7 for _ in range(n)]
        a, b = complex(e1.evaluate(x)), complex(e2.evaluate(x))
        if abs(a - b) > tol * max(1.0, abs(a), abs(b)):
            return False
    return True


# -- truncated formal series ----------------------------------------------------------

class FormalSeries:
    """Truncated power series ``sum_k c_k h^k`` (k <= order) with Expr coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable, order: int | None = None):
        cs = [Expr.lift(c) for c in coeffs]
        if order is not None:
            cs = (cs + [ZERO] * (order + 1))[: order + 1]
        if not cs:
            raise ValueError("a series needs at least one coefficient")
        self.coeffs: Tuple[Expr, ...] = tuple(cs)

    @classmethod
    def constant(cls, e, order: int) -> "FormalSeries":
        return cls([Expr.lift(e)], order)

    @classmethod
    def zero(cls, order: int) -> "FormalSeries":
        return cls([ZERO], order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> Expr:
        return self.coeffs[k]

    def __iter__(self):
        return iter(self.coeffs)

    def _check(self, other: "FormalSeries"):
        if not isinstance(other, FormalSeries):
            raise TypeError("expected a FormalSeries")
        if other.order != self.order:
            raise OrderMismatch(f"orders {self.order} and {other.order} differ")

    def __add__(self, other):
        self._check(other)
        return FormalSeries([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        self._check(other)
        return FormalSeries([a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return FormalSeries([-a for a in self.coeffs])

    def __mul__(self, other):
        if not isinstance(other, FormalSeries):
            return self.scale(other)
        self._check(other)
        n = self.order
        out = []
        for k in range(n + 1):
            acc = ZERO
            for i in range(k + 1):
                a, b = self.coeffs[i], other.coeffs[k - i]
                if a.is_zero() or b.is_zero():
                    continue
                acc = acc + a * b
            out.append(acc)
        return FormalSeries(out)

    def scale(self, k) -> "FormalSeries":
        if isinstance(k, Expr):
            return FormalSeries([c * k for c in self.coeffs])
        return FormalSeries([c.scale(k) for c in self.coeffs])

    __rmul__ = scale

    def shift(self, k: int = 1) -> "FormalSeries":
        """Multiply by h^k, truncating."""
        return FormalSeries([ZERO] * k + list(self.coeffs), self.order)

    def map(self, fn: Callable[[Expr], Expr]) -> "FormalSeries":
        return FormalSeries([fn(c) for c in self.coeffs])

    def apply_operator(self, ops: Sequence[Callable[[Expr], Expr] | None]) -> "FormalSeries":
        """Apply the operator series ``sum_k h^k ops[k]`` (None means zero)."""
        n = self.order
        out = [ZERO] * (n + 1)
        for k, op in enumerate(ops):
            if op is None or k > n:
                continue
            for m in range(n + 1 - k):
                if not self.coeffs[m].is_zero():
                    out[k + m] = out[k + m] + op(self.coeffs[m])
        return FormalSeries(out)

    def __eq__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def evaluate(self, x) -> list:
        return [complex(c.evaluate(x)) for c in self.coeffs]

    def to_strings(self, names=None) -> list:
        return [c.to_string(names) for c in self.coeffs]

    def __repr__(self):
        return "FormalSeries([" + ", ".join(repr(c.to_string()) for c in self.coeffs) + "])"
