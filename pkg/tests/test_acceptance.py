"""Acceptance battery: one pass/fail line per criterion.

Run directly (``python tests/test_acceptance.py``) or through pytest; in the
latter case the lines are collected and repeated in the terminal summary.
"""
from __future__ import annotations

from fractions import Fraction

import pytest

from udfq import suites

RESULTS: dict = {}


def _record(number: int, title: str, checks, budget_s=None):
    elapsed = sum(c.runtime_ms for c in checks) / 1000.0
    ok = all(c.passed for c in checks)
    within = budget_s is None or elapsed <= budget_s
    parts = "; ".join(f"{c.name} -> {c.status} (measured={c.measured!r}, tol={c.tolerance!r})" for c in checks)
    budget = f", budget {budget_s:g} s" if budget_s is not None else ""
    line = (f"[{'PASS' if ok and within else 'FAIL'}] criterion {number:2d}: {title} "
            f"({elapsed:.2f} s{budget}) | {parts}")
    RESULTS[number] = line
    print(line)
    assert ok, line
    assert within, f"criterion {number} exceeded its time budget: {elapsed:.2f} s > {budget_s} s"


def test_criterion_01_algebraic_validity():
    _record(1, "antisymmetry and Jacobi for built-in and transvection algebras",
            [suites.check_algebra_validity()], budget_s=1.0)


def test_criterion_02_classification():
    _record(2, "case classification of the built-in examples", [suites.check_classification()], budget_s=1.0)


def test_criterion_03_formal_associativity():
    _record(3, "formal associativity on R^2 and the book-group frame, degree 3, order 4",
            [suites.check_moyal_associativity("rn", 3, 4), suites.check_moyal_associativity("book", 3, 4)],
            budget_s=30.0)


def test_criterion_04_orderings():
    _record(4, "Weyl smash symbol product is Moyal; standard/anti-standard ordering identity",
            [suites.check_lambda_half_is_moyal(), suites.check_ordering_identity()])


def test_criterion_05_hopf():
    checks = [suites.check_hopf_axioms(lam) for lam in (Fraction(0), Fraction(1, 2), Fraction(1))]
    checks.append(suites.check_hopf_negative_controls())
    _record(5, "Hopf axioms to degree 2, t-order 3, with negative controls", checks)


def test_criterion_06_twist():
    _record(6, "twist dual-path coherence at t-order 3", [suites.check_twist_paths()])


def test_criterion_07_phase_invariance():
    _record(7, "phase cyclic and left-translation invariance", [suites.check_phase_invariance()], budget_s=1.0)


@pytest.mark.slow
def test_criterion_08_semiclassical():
    _record(8, "first-order coefficient within 2% over 10 pairs", [suites.check_semiclassical()])


@pytest.mark.slow
def test_criterion_09_strict_associativity():
    _record(9, "strict associativity defect at hbar=0.5, 5 points",
            [suites.check_strict_associativity()], budget_s=600.0)


@pytest.mark.slow
def test_criterion_10_equivalence():
    _record(10, "strict expansion equals transported Moyal at orders 0/1/2", [suites.check_equivalence()])


def test_criterion_11_iwasawa():
    _record(11, "Iwasawa reconstruction and dressing action law", [suites.check_iwasawa()], budget_s=10.0)


def test_criterion_12_udf_consistency():
    _record(12, "transported first order equals the projected bivector", [suites.check_udf_consistency()],
            budget_s=60.0)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    raise SystemExit(1 if failed else 0)
