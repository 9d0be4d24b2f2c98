"""Verification batteries shared by the command line and the acceptance tests.

Every check returns a :class:`Check`; suites return them in declaration order.
"""
from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Dict, List

import numpy as np

from . import dressing as dr
from . import formal_star as fs
from . import hopf
from . import lie
from . import strict_axb as sx
from .symexpr import ONE, Expr, parse, sinh, var


@dataclass
class Check:
    name: str
    passed: bool
    measured: object = None
    tolerance: object = None
    runtime_ms: float = 0.0
    detail: str = ""

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self, timing: bool = True) -> dict:
        d = asdict(self)
        d.pop("passed")
        d["status"] = self.status
        d["measured"] = _jsonable(self.measured)
        d["tolerance"] = _jsonable(self.tolerance)
        if timing:
            d["runtime_ms"] = round(self.runtime_ms, 3)
        else:
            d.pop("runtime_ms")
        return d


def _jsonable(x):
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, complex):
        return [float(f"{x.real:.12g}"), float(f"{x.imag:.12g}")]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return str(x)


def timed(name: str, fn: Callable[[], tuple]) -> Check:
    t0 = time.perf_counter()
    passed, measured, tol, *detail = fn()
    return Check(name, bool(passed), measured, tol, (time.perf_counter() - t0) * 1e3,
                 detail[0] if detail else "")


def threads() -> int:
    try:
        return max(1, int(os.environ.get("UDFQ_THREADS", "1")))
    except ValueError:
        return 1


def run_parallel(jobs: List[Callable[[], Check]]) -> List[Check]:
    """Run independent checks; results keep declaration order."""
    n = threads()
    if n == 1:
        return [j() for j in jobs]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(lambda j: j(), jobs))


# -- algebra -------------------------------------------------------------------------------------------

def check_algebra_validity() -> Check:
    def run():
        algs = dict(lie.builtin_algebras())
        for lam in (Fraction(1, 2), Fraction(1), Fraction(2)):
            algs[f"transvection(lam={lam})"] = lie.transvection_algebra(lam)
            algs[f"embedded-book(lam={lam})"] = lie.transvection_embed(lam)[2]
        bad = {k: len(lie.validate(a)) for k, a in algs.items() if lie.validate(a)}
        return not bad, sorted(algs), "exact", f"violations: {bad}" if bad else f"{len(algs)} algebras valid"
    return timed("algebra: antisymmetry and Jacobi", run)


def check_classification() -> Check:
    def run():
        got = {}
        b = lie.book()
        got["book + A^X"] = lie.classify(lie.PreSymplecticPair(b, lie.parse_wedge(b, "A^X"))).tag
        j = lie.jordan_book(1)
        c = lie.classify(lie.PreSymplecticPair(j, lie.parse_wedge(j, "A^X")))
        got["jordan + A^X"] = f"{c.tag} lambda={c.lam}"
        h = lie.heisenberg()
        got["heisenberg + X^Z"] = lie.classify(lie.PreSymplecticPair(h, lie.parse_wedge(h, "X^Z"))).tag
        want = {"book + A^X": lie.CASE1_SEMISIMPLE,
                "jordan + A^X": f"{lie.CASE1_NONSEMISIMPLE} lambda=1",
                "heisenberg + X^Z": lie.CASE2_HEISENBERG}
        return got == want, got, want
    return timed("algebra: classification", run)


def suite_algebra(quick: bool = False, seed: int = 0) -> List[Check]:
    return [check_algebra_validity(), check_classification()]


# -- formal ---------------------------------------------------------------------------------------------

def check_moyal_associativity(group: str = "rn", degree: int = 3, order: int = 4) -> Check:
    def run():
        if group == "rn":
            frame = fs.InvariantFrame.for_group("rn", 2)
            mons = fs.monomials(2, degree)
        else:
            frame = fs.InvariantFrame.for_group("book")
            mons = fs.monomials(3, degree)
        w = fs.w_from_wedges([(0, 1)], 2)

        def star(a, b):
            return fs.moyal_invariant_star(a, b, frame, w, order)

        cache = {}

        def cstar(a, b):
            key = (a, b) if isinstance(a, Expr) else None
            if key is not None and key in cache:
                return cache[key]
            r = star(a, b)
            if key is not None:
                cache[key] = r
            return r

        fails = 0
        for u, v, x in itertools.product(mons, repeat=3):
            left = star(cstar(u, v), x)
            right = star(u, cstar(v, x))
            if any(left[k] != right[k] for k in range(order + 1)):
                fails += 1
        return fails == 0, f"{fails} failing of {len(mons) ** 3} triples", "exact"
    label = "R^2" if group == "rn" else "book-group d-frame"
    return timed(f"formal: Moyal-type associativity on {label}, degree<={degree}, order {order}", run)


def check_corrupted_w(order: int = 3) -> Check:
    """A non-antisymmetric, position-dependent w must break associativity at order 2."""
    def run():
        frame = fs.InvariantFrame.for_group("rn", 2)
        w = [[0, ONE + var(1)], [-1, 0]]
        samples = [parse("x0^3*x1"), parse("x1^3 + x0*x1"), parse("exp(x0)*x1^2"), var(0), var(1)]

        def star(a, b):
            return fs.bidifferential_star(a, b, frame.ops, w, order)

        first = None
        for u, v, x in itertools.product(samples, repeat=3):
            r = fs.check_associativity_formal(star, u, v, x, order)
            if not r.passed:
                first = r.first_violation if first is None else min(first, r.first_violation)
        return first == 2, first, 2, "lowest failing order (negative control)"
    return timed("formal: corrupted w fails associativity", run)


def _sym_monomials(n: int, degree: int):
    """All monomials in x and p of total degree <= degree (x: 0..n-1, p: n..2n-1)."""
    return fs.monomials(2 * n, degree)


def check_lambda_half_is_moyal(n: int = 2, degree: int = 3, order: int = 3) -> Check:
    def run():
        st = hopf.lambda_structure(Fraction(1, 2), order, "rn", n)
        syms = _sym_monomials(n, degree)
        bad = 0
        count = 0
        for a, b in itertools.product(syms, repeat=2):
            if a.degree() + b.degree() > degree:
                continue
            count += 1
            F, G = fs.symbol_to_smash(fs.FormalSeries.constant(a, order), n), fs.symbol_to_smash(
                fs.FormalSeries.constant(b, order), n)
            prod = fs.smash_to_symbol(hopf.lr_smash_multiply(F, G, st), n)
            ref = fs.moyal_symbol_star(a, b, n, order)
            if any(prod[k] != ref[k] for k in range(order + 1)):
                bad += 1
        return bad == 0, f"{bad} mismatches of {count} symbol pairs", "exact"
    return timed("formal: lambda=1/2 L-R smash equals Moyal on symbols", run)


def check_ordering_identity(order: int = 4, max_power: int = 3) -> Check:
    """lambda = 0: p^m acts by derivatives only when it stands on the left;
    lambda = 1: only when it stands on the right."""
    def run():
        fails = []
        for lam in (Fraction(0), Fraction(1)):
            st = hopf.lambda_structure(lam, order, "rn", 1)
            for f in (parse("x^4", ["x"]), parse("exp(x)*x", ["x"]), parse("sinh(x)", ["x"])):
                F = hopf.SmashElement.term(f, (0,), 1, order)
                for m in range(1, max_power + 1):
                    P = hopf.SmashElement.term(ONE, (m,), 1, order)
                    left = hopf.lr_smash_multiply(P, F, st)
                    right = hopf.lr_smash_multiply(F, P, st)
                    deriv = hopf.SmashElement(1, order)
                    sign, derived_side = (-1, "left") if lam == 0 else (1, "right")
                    for k in range(0, min(m, order) + 1):
                        deriv._add(((k,), ((m - k,),)), f.diff(0, k).scale(comb(m, k) * sign ** k))
                    plain = hopf.SmashElement.term(f, (m,), 1, order)
                    lhs_expect = deriv if derived_side == "left" else plain
                    rhs_expect = plain if derived_side == "left" else deriv
                    if left != lhs_expect or right != rhs_expect:
                        fails.append(f"lambda={lam} m={m} f={f}")
                    # and against the reference ordered product of symbols
                    ref = fs.ordered_symbol_star(fs.smash_to_symbol(P, 1), fs.smash_to_symbol(F, 1), 1, lam, order)
                    got = fs.smash_to_symbol(left, 1)
                    if any(ref[k] != got[k] for k in range(order + 1)):
                        fails.append(f"reference mismatch lambda={lam} m={m}")
        return not fails, fails or "all identities hold", "exact"
    return timed("formal: lambda=0/1 standard and anti-standard ordering", run)


def check_book_left_invariance(order: int = 2, points: int = 10, seed: int = 0) -> Check:
    def run():
        rng = np.random.default_rng(seed)
        frame = fs.InvariantFrame.for_group("book")
        w = fs.w_from_wedges([(0, 1)], 2)
        names = ["a", "v1", "v2"]
        u = parse("v1^2*exp(a) + a*v2", names)
        v = parse("v2*v1 + exp(-a)*v1^3", names)
        worst = 0.0
        for _ in range(3):
            h = rng.uniform(-1, 1, 3)
            lhs = fs.moyal_invariant_star(fs.pullback_left(u, "book", h), fs.pullback_left(v, "book", h),
                                          frame, w, order)
            rhs = fs.pullback_series(fs.moyal_invariant_star(u, v, frame, w, order), "book", h)
            for _ in range(points):
                x = rng.uniform(-1, 1, 3)
                for k in range(order + 1):
                    worst = max(worst, abs(lhs[k].to_complex(x) - rhs[k].to_complex(x)))
        return worst <= 1e-9, worst, 1e-9
    return timed("formal: left-invariance on the book group", run)


def check_fiberwise_induction(order: int = 3) -> Check:
    """Book group, chart (q, s) = (y, (a, x)); fibre product is the formal 'ax+b' product."""
    def run():
        names = ["y", "a", "x"]
        fns = [parse("y*x*exp(-a^2/2 - x^2/2)", names),
               parse("(1 + x^2)*exp(-(a - 1/5)^2/2 - x^2/2)*y^2", names),
               parse("exp(-a^2/2 - (x - 1/10)^2/2)", names)]

        def fiber(a, b):
            return sx.axb_formal_star(a, b, order)

        def star(a, b):
            return fs.induced_fiberwise_star(a, b, fiber, s_vars=[1, 2], nvars=3)

        r = fs.check_associativity_formal(star, fns[0], fns[1], fns[2], order)
        unit = star(fns[0], ONE)
        unit_ok = unit[0] == fns[0] and all(unit[k].is_zero() for k in range(1, order + 1))
        return r.passed and unit_ok, f"associative={r.passed} unit={unit_ok}", "exact"
    return timed("formal: fibrewise induced product on the book group", run)


def suite_formal(quick: bool = False, seed: int = 0) -> List[Check]:
    out = [check_moyal_associativity("rn"), check_moyal_associativity("book", 2 if quick else 3),
           check_corrupted_w(), check_lambda_half_is_moyal(), check_ordering_identity(),
           check_book_left_invariance(seed=seed)]
    if not quick:
        out.append(check_fiberwise_induction())
    return out


# -- hopf --------------------------------------------------------------------------------------------------

def check_hopf_axioms(lam=Fraction(1, 2), order: int = 3, cutoff: int = 2) -> Check:
    def run():
        st = hopf.lambda_structure(lam, order)
        gens = [hopf.parse_smash("x@1", st), hopf.parse_smash("1@X0", st)]
        rep = hopf.verify_hopf_axioms(st, gens, cutoff)
        bad = [f"{r.name}[{r.element}]" for r in rep if not r.passed]
        return not bad, f"{len(rep) - len(bad)}/{len(rep)} identities", "exact", ", ".join(bad)
    return timed(f"hopf: axioms at lambda={lam}", run)


def check_hopf_negative_controls(order: int = 3) -> Check:
    def run():
        st = hopf.lambda_structure(Fraction(1, 2), order)
        gens = [hopf.parse_smash("x@1", st), hopf.parse_smash("1@X0", st)]
        rep = hopf.verify_hopf_axioms(st, gens, 2, antipode_sign=1)
        antipode_caught = any(not r.passed for r in rep if r.name.startswith("antipode"))
        try:
            hopf.coproduct(hopf.SmashElement.term(sinh(var(0)) * var(0), (0,), 1, order))
            closed_caught = False
        except hopf.NotCoalgebraClosed:
            closed_caught = True
        ok = antipode_caught and closed_caught
        return ok, {"corrupted antipode detected": antipode_caught,
                    "non-closed coefficient rejected": closed_caught}, "both detected"
    return timed("hopf: negative controls", run)


def check_twist_paths(order: int = 3) -> Check:
    def run():
        st = hopf.lambda_structure(Fraction(1, 2), order)
        T, Tinv = hopf.series_operator_twist(lambda e: e.diff(0, 3).scale(Fraction(1, 6)), 2, order)
        tw = hopf.twist_by_T(st, T, Tinv, [parse("x0^5")])
        els = [hopf.parse_smash(s, st) for s in
               ("x^3@1", "x^4@X0", "exp(x)@X0^2", "x^2 + t*x@X0", "1@X0^3", "sinh(x)@X0")]
        bad = 0
        for u, v in itertools.product(els, repeat=2):
            if hopf.lr_smash_multiply(u, v, tw) != hopf.twisted_product_direct(u, v, st, T, Tinv):
                bad += 1
        return bad == 0, f"{bad} mismatches of {len(els) ** 2} pairs", "exact"
    return timed("hopf: twist dual-path coherence", run)


def suite_hopf(quick: bool = False, seed: int = 0) -> List[Check]:
    out = [check_hopf_axioms(lam) for lam in (Fraction(0), Fraction(1, 2), Fraction(1))]
    out += [check_hopf_negative_controls(), check_twist_paths()]
    return out


# -- strict --------------------------------------------------------------------------------------------------

def check_phase_invariance(samples: int = 1000, seed: int = 0) -> Check:
    def run():
        a = [var(i) for i in range(6)]
        x0, x1, x2 = (a[0], a[1]), (a[2], a[3]), (a[4], a[5])

        def phi(p, q, r):
            return sinh(p[0] - q[0]) * r[1] + sinh(q[0] - r[0]) * p[1] + sinh(r[0] - p[0]) * q[1]

        cyclic = phi(x0, x1, x2) == phi(x1, x2, x0)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(samples):
            g, p, q, r = (tuple(rng.uniform(-1.5, 1.5, 2)) for _ in range(4))
            base = sx.phase(p, q, r)
            moved = sx.phase(sx.group_mul(g, p), sx.group_mul(g, q), sx.group_mul(g, r))
            worst = max(worst, abs(moved - base) / max(1.0, abs(base)))
        return cyclic and worst <= 1e-11, {"cyclic_exact": cyclic, "max_translation_defect": float(worst)}, 1e-11
    return timed("strict: phase cyclic and left-translation invariance", run)


def _random_gaussian(rng, center=(0.0, 0.0)) -> sx.TestFunction:
    return sx.TestFunction.gaussian(center[0] + rng.uniform(-0.4, 0.4), rng.uniform(0.7, 1.2),
                                    center[1] + rng.uniform(-0.4, 0.4), rng.uniform(0.7, 1.2),
                                    pl=(1.0, rng.uniform(-0.3, 0.3)))


def check_semiclassical(pairs: int = 10, seed: int = 1, tol: float = 0.02) -> Check:
    def run():
        rng = np.random.default_rng(seed)
        x0 = (0.1, -0.2)
        jobs = []
        for _ in range(pairs):
            u, v = _random_gaussian(rng, x0), _random_gaussian(rng, x0)
            jobs.append((u, v))

        def one(uv):
            u, v = uv
            slope = sx.first_order_richardson(u, v, x0)
            want = sx.poisson_bracket(u, v, x0) / 2j
            return abs(slope - want) / abs(want)

        n = threads()
        if n > 1:
            with ThreadPoolExecutor(max_workers=n) as ex:
                errs = list(ex.map(one, jobs))
        else:
            errs = [one(j) for j in jobs]
        worst = max(errs)
        return worst <= tol, worst, tol
    return timed("strict: first-order coefficient is (1/2i){u,v}", run)


def check_strict_associativity(points: int = 5, hbar: float = 0.5, tol: float = 1e-3, seed: int = 2) -> Check:
    def run():
        rng = np.random.default_rng(seed)
        u = sx.TestFunction.gaussian(0.2, 1.0, 0.1, 1.0, pl=(1.0, 0.2))
        v = sx.TestFunction.gaussian(-0.1, 0.8, -0.3, 1.2)
        w = sx.TestFunction.gaussian(0.0, 0.9, 0.2, 0.8, pl=(1.0, 0.0, 0.1))
        pts = [tuple(rng.uniform(-0.6, 0.6, 2)) for _ in range(points)]

        def one(x0):
            return sx.associativity_defect(u, v, w, x0, hbar)[2]

        n = threads()
        if n > 1:
            with ThreadPoolExecutor(max_workers=n) as ex:
                defects = list(ex.map(one, pts))
        else:
            defects = [one(p) for p in pts]
        worst = max(defects)
        return worst <= tol, worst, tol
    return timed("strict: associativity at hbar=0.5", run)


def check_equivalence(pairs: int = 3, seed: int = 3, tols=(1e-6, 0.02, 0.05)) -> Check:
    def run():
        rng = np.random.default_rng(seed)
        x0 = (0.1, -0.2)
        worst = [0.0, 0.0, 0.0]
        for _ in range(pairs):
            u, v = _random_gaussian(rng, x0), _random_gaussian(rng, x0)
            rep = sx.equivalence_check(u, v, x0, 2)
            worst = [max(a, b) for a, b in zip(worst, rep.rel_discrepancy)]
        ok = all(w <= t for w, t in zip(worst, tols))
        return ok, worst, list(tols)
    return timed("strict: expansion equals T-transported Moyal (orders 0/1/2)", run)


def suite_strict(quick: bool = False, seed: int = 0) -> List[Check]:
    if quick:
        return [check_phase_invariance(seed=seed), check_semiclassical(pairs=2, seed=seed + 1),
                check_equivalence(pairs=1, seed=seed + 3)]
    return [check_phase_invariance(seed=seed), check_semiclassical(seed=seed + 1),
            check_strict_associativity(seed=seed + 2), check_equivalence(seed=seed + 3)]


# -- dressing -------------------------------------------------------------------------------------------------

def check_iwasawa(samples: int = 10_000, triples: int = 500, seed: int = 4) -> Check:
    def run():
        rng = np.random.default_rng(seed)
        rec = 0.0
        for _ in range(samples):
            g = dr.random_sl2c(rng)
            s = dr.iwasawa_decompose(g)
            rec = max(rec, np.linalg.norm(s.k @ s.g - g))
        law = 0.0
        for _ in range(triples):
            g, h, k = dr.random_book(rng), dr.random_book(rng), dr.random_su2(rng)
            law = max(law, np.linalg.norm(dr.dress(g, dr.dress(h, k)) - dr.dress(g @ h, k)))
        return rec <= 1e-12 and law <= 1e-10, {"reconstruction": float(rec), "action_law": float(law)}, [1e-12, 1e-10]
    return timed("dressing: Iwasawa reconstruction and action law", run)


def check_udf_consistency(points: int = 10, seed: int = 5, tol: float = 0.01) -> Check:
    def run():
        rng = np.random.default_rng(seed)
        names = ["y0", "y1", "y2"]
        pairs = [("y0", "y1"), ("y0 + y1*y2", "y2 - y0*y1 + y1^2"), ("y2^2 + y0", "y1 + y0*y2"),
                 ("y0*y1*y2 + y1", "y0^2 - y2"), ("y1 + 2*y2", "y0 + y2^2 - y1")]
        S1, S2 = [1, 0, 0], [0, 1, 0]
        worst = 0.0
        for _ in range(points):
            x = dr.random_su2(rng)
            for a, b in pairs:
                U, V = parse(a, names), parse(b, names)
                r1 = dr.transported_star_first_order(U, V, x, S1, S2)
                r2 = dr.bivector_first_order(U, V, x, S1, S2)
                worst = max(worst, abs(r1 - r2) / max(abs(r2), 1e-300))
        at_e = dr.poisson_bivector_ws(S1, S2, np.eye(2, dtype=complex)).components
        zero_exact = bool(np.all(at_e == 0))
        return worst <= tol and zero_exact, {"max_rel": float(worst), "w_s(e)==0": zero_exact}, tol
    return timed("dressing: transported first order equals (1/2i) w_s(du,dv)", run)


def suite_dressing(quick: bool = False, seed: int = 0) -> List[Check]:
    return [check_iwasawa(seed=seed + 4), check_udf_consistency(seed=seed + 5)]


SUITES: Dict[str, Callable[..., List[Check]]] = {
    "algebra": suite_algebra,
    "formal": suite_formal,
    "hopf": suite_hopf,
    "strict": suite_strict,
    "dressing": suite_dressing,
}


def run_suite(name: str, quick: bool = False, seed: int = 0) -> List[Check]:
    """Run one suite (or ``all``); random batteries derive their seeds from ``seed``."""
    if name == "all":
        out = []
        for key in SUITES:
            out.extend(SUITES[key](quick=quick, seed=seed))
        return out
    return SUITES[name](quick=quick, seed=seed)
