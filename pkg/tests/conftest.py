"""Shared fixtures: seeded random expression generation and the ODE corpus."""

import random

import pytest
import sympy as sp

from jetlin.expr import P, Q, U, X, cbrt, is_rational_expr, ln, normalize

ATOMS = [
    X, U, P, Q,
    sp.Integer(1), sp.Integer(2), sp.Integer(3), sp.Integer(-1),
    sp.Rational(1, 2), sp.Rational(-3, 2), sp.Rational(2, 3),
]


def random_expr(rng: random.Random, depth=2, allow_formal=False):
    """Small random expression over the jet variables; never a zero denominator."""
    if depth == 0 or rng.random() < 0.3:
        return rng.choice(ATOMS)
    roll = rng.random()
    a = random_expr(rng, depth - 1, allow_formal)
    if roll < 0.08 and allow_formal:
        return cbrt(a) if rng.random() < 0.5 else ln(a * a + 1)
    b = random_expr(rng, depth - 1, allow_formal)
    if roll < 0.45:
        return a + b
    if roll < 0.72:
        return a * b
    if roll < 0.9:
        if is_rational_expr(b) and normalize(b).is_zero_form:
            b = b + 1
        return a / b
    return a ** rng.randint(1, 3)


def random_rational_f(rng: random.Random):
    """Random bounded-degree rational right-hand side for identity checks."""
    num = random_expr(rng, 2)
    den = rng.choice([sp.Integer(1), P, X, Q + 2, P**2, X * P, U + 2])
    e = num / den
    if not is_rational_expr(e):
        return num if is_rational_expr(num) else X * U
    return e


# right-hand sides used across the oracle and acceptance tests
EXAMPLE_1 = "3*u''^2/u' + x*u'^4"
EXAMPLE_2 = "-3/x*u'' + (8*x^2 + 3/x^2)*u' + 8*x*(x^2 + 2)*u"
EXAMPLE_3 = "u/x^6"
EXAMPLE_4 = "3/2*u''^2/u'"

ORACLE_CORPUS = [
    EXAMPLE_1,
    EXAMPLE_2,
    EXAMPLE_3,
    EXAMPLE_4,
    "x*u",
    "2*u' + u",
    "17/5*u' + u",
    "4*u' + 8*u",
    "5*u",
    "x",
    "u''^4",
    "u'*u''",
    "x*u'' + u",
]


@pytest.fixture
def rng():
    return random.Random(20240811)
