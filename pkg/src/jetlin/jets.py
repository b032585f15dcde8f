"""Total derivative on the second-order jet space with u''' replaced by f."""

from __future__ import annotations

from dataclasses import dataclass

import sympy as sp

from . import expr as ex


@dataclass(frozen=True)
class JetContext:
    """The ODE right-hand side f(x, u, p, q) driving the total derivative."""

    f: sp.Expr

    def __post_init__(self):
        object.__setattr__(self, "f", sp.sympify(self.f))
        extra = self.f.free_symbols - set(ex.JET_VARS)
        if extra:
            raise ValueError(f"f uses non-jet symbols: {sorted(map(str, extra))}")

    @property
    def is_rational(self) -> bool:
        return ex.is_rational_expr(self.f)


def total_derivative(ctx: JetContext, e: sp.Expr) -> sp.Expr:
    """D_x e = e_x + p*e_u + q*e_p + f*e_q, simplified."""
    e = sp.sympify(e)
    d = (
        sp.diff(e, ex.X)
        + ex.P * sp.diff(e, ex.U)
        + ex.Q * sp.diff(e, ex.P)
        + ctx.f * sp.diff(e, ex.Q)
    )
    return ex.simplify_rational(d)


def total_derivative_n(ctx: JetContext, e: sp.Expr, n: int) -> sp.Expr:
    """n-fold application of the total derivative; n = 0 is the identity."""
    if n < 0:
        raise ValueError("n must be non-negative")
    e = sp.sympify(e)
    for _ in range(n):
        e = total_derivative(ctx, e)
    return e
