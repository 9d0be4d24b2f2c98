"""Dressing action of the book group AN on SU(2) inside SL(2, C).

The book algebra sits in sl(2, C) as ``A = diag(1/2, -1/2)``, ``X = E``,
``Y = iE`` (``E`` the upper nilpotent), so ``[A, X] = X`` and ``[A, Y] = Y``.
Book coordinates ``(a, v1, v2)`` map to ``[[e^{a/2}, e^{a/2} z], [0, e^{-a/2}]]``
with ``z = v1 + i v2``, which realises the law
``(a, v)(a', v') = (a + a', e^{-a'} v + v')``.

Tangent vectors to SU(2) are left-trivialized and written in the basis
``(i sigma_1, i sigma_2, i sigma_3)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from .symexpr import Expr

SIGMA = (np.array([[0, 1], [1, 0]], dtype=complex),
         np.array([[0, -1j], [1j, 0]], dtype=complex),
         np.array([[1, 0], [0, -1]], dtype=complex))
K_BASIS = tuple(1j * s for s in SIGMA)
H = np.diag([0.5, -0.5]).astype(complex)
E = np.array([[0, 1], [0, 0]], dtype=complex)
BOOK_BASIS = (H, E, 1j * E)  # A, X, Y
SL2_BASIS = K_BASIS + BOOK_BASIS


class Singular(ValueError):
    pass


class ChartOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class IwasawaSplit:
    k: np.ndarray
    g: np.ndarray


def iwasawa_decompose(gamma: np.ndarray) -> IwasawaSplit:
    """gamma = k g with k in SU(2), g upper triangular with positive diagonal."""
    gamma = np.asarray(gamma, dtype=complex)
    col = gamma[:, 0]
    norm = np.linalg.norm(col)
    if norm < 1e-300:
        raise Singular("first column vanishes")
    p, q = col / norm
    k = np.array([[p, -np.conj(q)], [q, np.conj(p)]])
    g = k.conj().T @ gamma
    g[1, 0] = 0.0
    return IwasawaSplit(k, g)


def book_matrix(a: float, v1: float, v2: float) -> np.ndarray:
    s = np.exp(a / 2)
    return np.array([[s, s * (v1 + 1j * v2)], [0, 1 / s]], dtype=complex)


def book_coords(g: np.ndarray) -> Tuple[float, float, float]:
    a = 2 * np.log(g[0, 0].real)
    z = g[0, 1] / g[0, 0]
    return float(a), float(z.real), float(z.imag)


def algebra_matrix(coords: Sequence[float]) -> np.ndarray:
    """Element of the book algebra from coordinates on (A, X, Y)."""
    return sum(c * b for c, b in zip(coords, BOOK_BASIS))


def k_matrix(coords: Sequence[float]) -> np.ndarray:
    return sum(c * b for c, b in zip(coords, K_BASIS))


def dress(g: np.ndarray, k: np.ndarray) -> np.ndarray:
    """tau_g(k) = (g k)_K."""
    return iwasawa_decompose(np.asarray(g) @ np.asarray(k)).k


@lru_cache(maxsize=1)
def _projector() -> np.ndarray:
    """Pseudo-inverse of the real 8x6 matrix sending basis coordinates to entries."""
    cols = [np.concatenate([b.real.ravel(), b.imag.ravel()]) for b in SL2_BASIS]
    M = np.stack(cols, axis=1)
    return np.linalg.pinv(M)


def sl2_coordinates(Z: np.ndarray) -> np.ndarray:
    """Real coordinates of a traceless Z on su(2) + a + n."""
    Z = np.asarray(Z, dtype=complex)
    return _projector() @ np.concatenate([Z.real.ravel(), Z.imag.ravel()])


def project_k(Z: np.ndarray) -> np.ndarray:
    """(Z)_K, the su(2) component parallel to a + n, as coordinates.

    Closed-form solution of the same linear system as :func:`sl2_coordinates`:
    Z = K + G with G = [[x, y], [0, -x]], x real, forces
    K = [[i Im z11, -conj(z21)], [z21, -i Im z11]].
    """
    Z = np.asarray(Z, dtype=complex)
    return np.array([Z[1, 0].imag, -Z[1, 0].real, Z[0, 0].imag])


def infinitesimal_dressing(X: Sequence[float], k: np.ndarray) -> np.ndarray:
    """X*_k = -(Ad(k^-1) X)_K, left-trivialized: d/dt tau_{exp(-tX)}(k) at 0."""
    k = np.asarray(k, dtype=complex)
    Z = k.conj().T @ algebra_matrix(X) @ k
    return -project_k(Z)


def su2_log(m: np.ndarray) -> np.ndarray:
    """Coordinates y with m = exp(sum y_i i sigma_i), rotation angle below pi."""
    m = np.asarray(m, dtype=complex)
    c = float(np.clip(np.trace(m).real / 2, -1.0, 1.0))
    theta = np.arccos(c)
    if theta > np.pi - 1e-6:
        raise ChartOutOfRange("point is at the cut locus of the exponential chart")
    s = np.array([-0.5 * np.trace(b @ m).real for b in K_BASIS])
    if theta < 1e-12:
        return s
    return s * theta / np.sin(theta)


def su2_exp(y: Sequence[float]) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    theta = np.linalg.norm(y)
    if theta < 1e-300:
        return np.eye(2, dtype=complex)
    return np.cos(theta) * np.eye(2) + np.sin(theta) / theta * k_matrix(y)


def chart_point(x: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Coordinates of k in the exponential chart centred at x."""
    return su2_log(np.asarray(x).conj().T @ np.asarray(k))


def _stencil(f: Callable[[float], np.ndarray], h: float) -> np.ndarray:
    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)


def dressing_by_differences(X: Sequence[float], k: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Chart velocity of t -> tau_{exp(-tX)}(k) at 0 (fourth-order stencil)."""
    Xm = algebra_matrix(X)
    return _stencil(lambda t: chart_point(k, dress(expm(-t * Xm), k)), h)


def _wedge(c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
    return np.outer(c1, c2) - np.outer(c2, c1)


@dataclass(frozen=True)
class TangentBivector:
    base: np.ndarray
    components: np.ndarray  # antisymmetric 3x3 in the left-trivialized su(2) frame

    def pair(self, du: np.ndarray, dv: np.ndarray) -> complex:
        return complex(du @ self.components @ dv)


def poisson_bivector_ws(S1: Sequence[float], S2: Sequence[float], k: np.ndarray) -> TangentBivector:
    """(Ad(k^-1) S1)_K wedge (Ad(k^-1) S2)_K."""
    k = np.asarray(k, dtype=complex)
    c1 = project_k(k.conj().T @ algebra_matrix(S1) @ k)
    c2 = project_k(k.conj().T @ algebra_matrix(S2) @ k)
    return TangentBivector(k, _wedge(c1, c2))


def poisson_bivector_fundamental(w_e: np.ndarray, k: np.ndarray, h: float = 1e-3) -> TangentBivector:
    """w_e^{ij} X_i* wedge X_j* (as sum over ordered pairs of X_i* (x) X_j*),
    with the fundamental fields taken from finite differences of the action."""
    w_e = np.asarray(w_e, dtype=float)
    fields = [dressing_by_differences(e, k, h) for e in np.eye(3)]
    W = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            if w_e[i, j]:
                W += w_e[i, j] * np.outer(fields[i], fields[j])
    return TangentBivector(np.asarray(k), W)


def wedge_matrix(S1: Sequence[float], S2: Sequence[float]) -> np.ndarray:
    return _wedge(np.asarray(S1, dtype=float), np.asarray(S2, dtype=float))


def chart_function(U: Expr, center: np.ndarray) -> Callable[[np.ndarray], complex]:
    """k -> U(log(center^-1 k)) for an Expr U in chart coordinates y0, y1, y2."""
    def f(k):
        return complex(U.to_complex(chart_point(center, k)))
    return f


def transported_star_first_order(U: Expr, V: Expr, x: np.ndarray, S1: Sequence[float], S2: Sequence[float],
                                 h: float = 1e-3) -> complex:
    """Order-hbar coefficient of (alpha^x(u) * alpha^x(v))(e), alpha^x(u)(g) = u(tau_{g^-1} x).

    The group product is the Moyal-type one along S1, S2 with w_e = S1 wedge S2:
    (1/2i) w_e^{ij} (X~_i alpha^x u)(e) (X~_j alpha^x v)(e); left-invariant
    derivatives at e are finite differences along exp(t S).
    """
    x = np.asarray(x, dtype=complex)
    u = chart_function(U, x)
    v = chart_function(V, x)
    basis = [np.asarray(S1, dtype=float), np.asarray(S2, dtype=float)]

    def deriv(f, S):
        Sm = algebra_matrix(S)
        return _stencil(lambda t: np.array(f(dress(expm(-t * Sm), x))), h)

    du = [deriv(u, S) for S in basis]
    dv = [deriv(v, S) for S in basis]
    w = np.array([[0.0, 1.0], [-1.0, 0.0]])
    total = sum(w[i, j] * du[i] * dv[j] for i in range(2) for j in range(2))
    return complex(total / 2j)


def bivector_first_order(U: Expr, V: Expr, x: np.ndarray, S1, S2) -> complex:
    """(1/2i) w^s(du, dv)(x) with exact chart derivatives at the chart centre."""
    W = poisson_bivector_ws(S1, S2, x)
    zero = [0.0, 0.0, 0.0]
    du = np.array([complex(U.diff(i).to_complex(zero)) for i in range(3)])
    dv = np.array([complex(V.diff(i).to_complex(zero)) for i in range(3)])
    return W.pair(du, dv) / 2j


# -- random samples ----------------------------------------------------------------------------------

def random_sl2c(rng: np.random.Generator, bound: float = 10.0) -> np.ndarray:
    while True:
        m = rng.uniform(-bound, bound, (2, 2)) + 1j * rng.uniform(-bound, bound, (2, 2))
        d = np.linalg.det(m)
        if abs(d) > 1e-3:
            return m / np.sqrt(d)


def random_su2(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    p, r = q[0] + 1j * q[1], q[2] + 1j * q[3]
    return np.array([[p, -np.conj(r)], [r, np.conj(p)]])


def random_book(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a, v1, v2 = rng.uniform(-scale, scale, 3)
    return book_matrix(a, v1, v2)
