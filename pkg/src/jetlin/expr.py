"""Exact symbolic kernel over the second-order jet coordinates (x, u, p, q).

Expressions are immutable sympy trees restricted to: exact rational constants,
the four jet variables, sums, products, quotients, integer powers, and the two
formal nodes ``cbrt`` (real odd cube root) and ``ln``.  Everything rational is
decided exactly through :class:`RationalForm`; expressions carrying formal
nodes fall back to seeded high-precision sampling.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import sympy as sp

from .errors import EvaluationDomainError, NonRationalError, SingularPointError

X, U, P, Q = sp.symbols("x u p q", real=True)
JET_VARS = (X, U, P, Q)

#: sympy generator order realizing graded lex with x < u < p < q (q most significant)
_POLY_GENS = (Q, P, U, X)
_MONOMIAL_ORDER = "grlex"


class cbrt(sp.Function):
    """Formal real cube root: the odd root, so cbrt(-8) == -2.

    Only exact perfect-cube rationals evaluate; everything else stays formal.
    Integer powers that are multiples of 3 collapse (cbrt(g)**3 == g), which is
    an identity of the real odd root.
    """

    nargs = 1

    @classmethod
    def eval(cls, a):
        if a.is_Rational:
            if a.is_zero:
                return sp.S.Zero
            if a.is_negative:
                return -cls(-a)
            rn, exact_n = sp.integer_nthroot(a.p, 3)
            rd, exact_d = sp.integer_nthroot(a.q, 3)
            if exact_n and exact_d:
                return sp.Rational(rn, rd)
        return None

    def fdiff(self, argindex=1):
        return 1 / (3 * cbrt(self.args[0]) ** 2)

    def _eval_power(self, other):
        if other.is_Integer and other % 3 == 0:
            return self.args[0] ** (other // 3)
        return None

    def _eval_is_real(self):
        return self.args[0].is_extended_real

    def _eval_evalf(self, prec):
        arg = self.args[0]._eval_evalf(prec + 8)
        if arg is None or not arg.is_Number or arg.is_extended_real is False:
            return None
        with mpmath.workprec(prec + 8):
            v = mpmath.mpf(sp.Float(arg, precision=prec + 8)._mpf_)
            r = mpmath.cbrt(abs(v))
            if v < 0:
                r = -r
        return sp.Float(r, precision=prec)


class ln(sp.Function):
    """Formal natural logarithm, transcendentally independent of rational parts.

    No log identities are applied; only ln(1) == 0 evaluates.  Real evaluation
    is defined for positive arguments only.
    """

    nargs = 1

    @classmethod
    def eval(cls, a):
        if a is sp.S.One:
            return sp.S.Zero
        return None

    def fdiff(self, argindex=1):
        return 1 / self.args[0]

    def _eval_evalf(self, prec):
        arg = self.args[0]._eval_evalf(prec + 8)
        if arg is None or not arg.is_Number or arg.is_extended_real is False:
            return None
        if not arg.is_positive:
            return None
        with mpmath.workprec(prec + 8):
            v = mpmath.mpf(sp.Float(arg, precision=prec + 8)._mpf_)
            r = mpmath.log(v)
        return sp.Float(r, precision=prec)


FORMAL_NODES = (cbrt, ln)

Expression = sp.Expr


def is_rational_expr(e: sp.Expr) -> bool:
    """True when e carries no formal cbrt/ln nodes."""
    return not e.has(*FORMAL_NODES)


def _require_jet_expr(e):
    extra = e.free_symbols - set(JET_VARS)
    if extra:
        raise ValueError(f"expression uses non-jet symbols: {sorted(map(str, extra))}")
    return e


@dataclass(frozen=True)
class RationalForm:
    """Fully cancelled numerator/denominator pair with a fixed normalization.

    The denominator is monic under graded lex with x < u < p < q; zero is
    always stored as (0, 1).
    """

    numerator: sp.Expr
    denominator: sp.Expr

    def as_expr(self) -> sp.Expr:
        return self.numerator / self.denominator

    @property
    def is_zero_form(self) -> bool:
        return self.numerator == 0

    def __str__(self):
        if self.denominator == 1:
            return to_source(self.numerator)
        num = to_source(self.numerator)
        den = to_source(self.denominator)
        if self.numerator.is_Add:
            num = f"({num})"
        if self.denominator.is_Add or self.denominator.is_Mul:
            den = f"({den})"
        return f"{num}/{den}"


def _leading_coeff(poly_expr: sp.Expr) -> sp.Rational:
    if poly_expr.is_Rational:
        return poly_expr
    return sp.Poly(poly_expr, *_POLY_GENS).LC(order=_MONOMIAL_ORDER)


def normalize(e: sp.Expr) -> RationalForm:
    """Canonical rational form of e; raises NonRational on formal nodes.

    normalize(e1) == normalize(e2) iff e1 - e2 is identically zero as a
    rational function of (x, u, p, q).
    """
    e = sp.sympify(e)
    if not is_rational_expr(e):
        raise NonRationalError(f"not a rational expression: {e}")
    _require_jet_expr(e)
    num, den = sp.fraction(sp.cancel(sp.together(e)))
    num = sp.expand(num)
    den = sp.expand(den)
    if num == 0:
        return RationalForm(sp.S.Zero, sp.S.One)
    lc = _leading_coeff(den)
    return RationalForm(sp.expand(num / lc), sp.expand(den / lc))


def diff(e: sp.Expr, v) -> sp.Expr:
    """Partial derivative with respect to one jet variable (cbrt/ln by chain rule)."""
    v = as_jet_var(v)
    return sp.diff(sp.sympify(e), v)


def substitute(e: sp.Expr, bindings: dict) -> sp.Expr:
    """Simultaneous substitution followed by re-simplification."""
    e = sp.sympify(e)
    if bindings:
        subs = {as_jet_var(k): sp.sympify(v) for k, v in bindings.items()}
        e = e.subs(subs, simultaneous=True)
    result = simplify_rational(e)
    if result.has(sp.zoo, sp.nan, sp.oo, -sp.oo):
        raise ZeroDivisionError(f"substitution produced a zero denominator: {e}")
    return result


def simplify_rational(e: sp.Expr) -> sp.Expr:
    """cancel() with formal nodes treated as opaque generators."""
    return sp.cancel(sp.together(sp.sympify(e)))


def as_jet_var(v) -> sp.Symbol:
    if isinstance(v, str):
        try:
            return {"x": X, "u": U, "p": P, "q": Q}[v]
        except KeyError:
            raise ValueError(f"unknown jet variable {v!r}") from None
    if v in JET_VARS:
        return v
    raise ValueError(f"unknown jet variable {v!r}")


# ---------------------------------------------------------------------------
# zero decision
# ---------------------------------------------------------------------------


class Verdict(enum.Enum):
    ZERO = "zero"
    NONZERO = "nonzero"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ZeroTestConfig:
    """Sampling protocol for the probabilistic zero test on formal expressions.

    Coordinates are drawn uniformly from [-high, -low] U [low, high] to stay
    clear of the singular loci that cluster at 0.  Borderline magnitudes are
    re-evaluated at ``confirm_digits`` decimal digits before a verdict.
    """

    samples: int = 20
    eps_zero: float = 1e-9
    eps_nonzero: float = 1e-6
    seed: int = 0
    low: float = 0.25
    high: float = 3.0
    confirm_digits: int = 50


DEFAULT_ZERO_CONFIG = ZeroTestConfig()


def _real_cbrt(t: float) -> float:
    return math.copysign(abs(t) ** (1.0 / 3.0), t)


_LAMBDIFY_MODULES = [{"cbrt": _real_cbrt, "ln": math.log}, "math"]

_COMPILE_CACHE: dict = {}


def compile_fn(e: sp.Expr):
    """Fast float evaluator (x, u, p, q) -> float for an expression."""
    key = e
    fn = _COMPILE_CACHE.get(key)
    if fn is None:
        fn = sp.lambdify(JET_VARS, e, modules=_LAMBDIFY_MODULES)
        if len(_COMPILE_CACHE) > 4096:
            _COMPILE_CACHE.clear()
        _COMPILE_CACHE[key] = fn
    return fn


def draw_sample_point(rng: random.Random, cfg: ZeroTestConfig = DEFAULT_ZERO_CONFIG):
    """One random jet point as exact rationals inside the sampling box."""
    pt = []
    for _ in range(4):
        mag = Fraction(rng.randint(int(cfg.low * 4096), int(cfg.high * 4096)), 4096)
        pt.append(mag if rng.random() < 0.5 else -mag)
    return tuple(pt)


def _evalf_at(e: sp.Expr, point, digits: int):
    subs = {v: sp.Rational(c) for v, c in zip(JET_VARS, point)}
    val = e.subs(subs).evalf(digits)
    if val.is_Number and val.is_extended_real:
        return float(val)
    return None


def is_zero(e: sp.Expr, cfg: ZeroTestConfig = DEFAULT_ZERO_CONFIG) -> Verdict:
    """Exact verdict for rational expressions, sampled verdict otherwise."""
    e = sp.sympify(e)
    if is_rational_expr(e):
        return Verdict.ZERO if normalize(e).is_zero_form else Verdict.NONZERO
    return sampled_is_zero(e, cfg)


def sampled_is_zero(e: sp.Expr, cfg: ZeroTestConfig = DEFAULT_ZERO_CONFIG) -> Verdict:
    """Probabilistic zero test at cfg.samples nonsingular points."""
    rng = random.Random(cfg.seed)
    fn = compile_fn(e)
    values = []
    attempts = 0
    max_attempts = 200 * max(cfg.samples, 1)
    while len(values) < cfg.samples and attempts < max_attempts:
        attempts += 1
        pt = draw_sample_point(rng, cfg)
        try:
            v = fn(*(float(c) for c in pt))
        except (ZeroDivisionError, ValueError, OverflowError):
            continue
        if isinstance(v, complex) or not math.isfinite(v):
            continue
        if cfg.eps_zero <= abs(v) <= cfg.eps_nonzero:
            # borderline: confirm at higher precision before trusting it
            confirmed = _evalf_at(e, pt, cfg.confirm_digits)
            if confirmed is None:
                continue
            v = confirmed
        values.append(v)
    if len(values) < cfg.samples:
        return Verdict.UNKNOWN
    if all(abs(v) < cfg.eps_zero for v in values):
        return Verdict.ZERO
    if any(abs(v) > cfg.eps_nonzero for v in values):
        return Verdict.NONZERO
    return Verdict.UNKNOWN


# ---------------------------------------------------------------------------
# printing (the same grammar the parser accepts)
# ---------------------------------------------------------------------------

from sympy.printing.precedence import precedence  # noqa: E402
from sympy.printing.str import StrPrinter  # noqa: E402


class _SourcePrinter(StrPrinter):
    """Emits the CLI grammar: ^ for powers, cbrt(.)/ln(.) calls, grlex term order."""

    def __init__(self):
        super().__init__(settings={"order": "grlex"})

    def _print_Pow(self, expr, rational=False):
        b, e = expr.base, expr.exp
        if not e.is_Integer:
            raise ValueError(f"non-integer power cannot be printed: {expr}")
        base = self.parenthesize(b, precedence(expr), strict=False)
        if e == -1:
            return f"1/{self.parenthesize(b, precedence(expr), strict=True)}"
        if e < 0:
            return f"1/{self.parenthesize(b, precedence(expr), strict=True)}^{-e}"
        return f"{base}^{e}"

    def _print_cbrt(self, expr):
        return f"cbrt({self._print(expr.args[0])})"

    def _print_ln(self, expr):
        return f"ln({self._print(expr.args[0])})"

    def _print_Float(self, expr):
        raise ValueError(f"floating-point literal cannot be printed exactly: {expr}")


_PRINTER = _SourcePrinter()


def to_source(e: sp.Expr) -> str:
    """Deterministic text form that re-parses to an equal expression."""
    return _PRINTER.doprint(sp.sympify(e))


# ---------------------------------------------------------------------------
# pointwise evaluation
# ---------------------------------------------------------------------------


def evaluate_at(e: sp.Expr, point, precision_bits: int = 53) -> float:
    """Evaluate at a jet point with the real cube root convention.

    Raises SingularPoint on poles and EvaluationDomain on ln of a
    non-positive argument.
    """
    e = sp.sympify(e)
    for node in e.atoms(ln):
        fn = compile_fn(node.args[0])
        try:
            a = fn(*(float(c) for c in point))
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise SingularPointError(f"singular ln argument at {tuple(point)}") from exc
        if a <= 0:
            raise EvaluationDomainError(f"ln of non-positive value {a} at {tuple(point)}")
    if precision_bits <= 53:
        fn = compile_fn(e)
        try:
            v = fn(*(float(c) for c in point))
        except ZeroDivisionError as exc:
            raise SingularPointError(f"zero denominator at {tuple(point)}") from exc
        except (ValueError, OverflowError) as exc:
            raise SingularPointError(f"evaluation failed at {tuple(point)}") from exc
        if isinstance(v, complex) or not math.isfinite(v):
            raise SingularPointError(f"non-finite value at {tuple(point)}")
        return v
    digits = max(17, int(precision_bits * 0.30103) + 2)
    v = _evalf_at(e, [Fraction(c) if not isinstance(c, Fraction) else c for c in point], digits)
    if v is None or not math.isfinite(v):
        raise SingularPointError(f"high-precision evaluation failed at {tuple(point)}")
    return v
