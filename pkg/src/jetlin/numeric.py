"""Floating-point evaluation and ODE-integration cross-checks.

Numeric results never decide a branch; they corroborate the exact residual
certificates.  The integrator is a classical fixed-step RK4 on the first
order system (u, p, q)' = (p, q, f).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import sympy as sp

from . import expr as ex
from .errors import BlowUpError, NonMonotoneImageError, SingularPointError
from .jets import JetContext
from .linearize import PointTransformation, transformed_jet


@dataclass(frozen=True)
class JetPoint:
    x: float
    u: float
    p: float
    q: float

    def as_tuple(self):
        return (self.x, self.u, self.p, self.q)


@dataclass(frozen=True)
class Trajectory:
    """Uniform-step samples (x, u, u', u'') with strictly increasing x."""

    samples: tuple
    step: float
    method: str = "rk4"


def evaluate(e: sp.Expr, point, precision_bits: int = 53) -> float:
    """Evaluate an expression at a jet point (real cube root convention)."""
    if isinstance(point, JetPoint):
        point = point.as_tuple()
    return ex.evaluate_at(e, tuple(point), precision_bits)


def rk4_solve(ctx: JetContext, ic, span, step, state_bound: float = 1e6) -> Trajectory:
    """Classical fourth-order integration of u''' = f from ic over span.

    ic = (x0, u0, u'0, u''0) with x0 == span[0]; raises BlowUp when the state
    norm exceeds state_bound.
    """
    x0, u0, p0, q0 = (float(c) for c in ic)
    a, b = (float(c) for c in span)
    step = float(step)
    if step <= 0:
        raise ValueError("step must be positive")
    if abs(x0 - a) > 1e-12:
        raise ValueError("ic abscissa must match the start of the span")
    f = ex.compile_fn(ctx.f)

    def rhs(x, state):
        u, p, q = state
        return (p, q, f(x, u, p, q))

    n = max(1, round((b - a) / step))
    state = (u0, p0, q0)
    samples = [(a, u0, p0, q0)]
    for i in range(n):
        x = a + i * step
        try:
            k1 = rhs(x, state)
            k2 = rhs(x + step / 2, _axpy(state, k1, step / 2))
            k3 = rhs(x + step / 2, _axpy(state, k2, step / 2))
            k4 = rhs(x + step, _axpy(state, k3, step))
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise SingularPointError(f"f became singular near x = {x}") from exc
        state = tuple(
            s + step / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
            for s, a1, a2, a3, a4 in zip(state, k1, k2, k3, k4)
        )
        if any(not math.isfinite(c) or abs(c) > state_bound for c in state):
            raise BlowUpError(f"state exceeded {state_bound} near x = {x + step}")
        samples.append((a + (i + 1) * step, *state))
    return Trajectory(samples=tuple(samples), step=step)


def _axpy(state, k, h):
    return tuple(s + h * c for s, c in zip(state, k))


def _hermite(x, x0, x1, y0, y1, d0, d1):
    h = x1 - x0
    t = (x - x0) / h
    t2, t3 = t * t, t * t * t
    return (
        (2 * t3 - 3 * t2 + 1) * y0
        + (t3 - 2 * t2 + t) * h * d0
        + (-2 * t3 + 3 * t2) * y1
        + (t3 - t2) * h * d1
    )


def numeric_transform_check(
    ctx: JetContext,
    t: PointTransformation,
    s,
    traj: Trajectory,
) -> float:
    """Max |ubar| discrepancy between the mapped trajectory and an
    independently integrated canonical solution u''' = s*u' + u."""
    return transform_check_data(ctx, t, s, traj)[3]


def transform_check_data(
    ctx: JetContext,
    t: PointTransformation,
    s,
    traj: Trajectory,
):
    """(xbars, mapped u, canonical u, max gap) for the transform check.

    The canonical solution is interpolated at the mapped abscissae with cubic
    Hermite polynomials, matching the integrator's order.
    """
    s = float(sp.sympify(s))
    pbar_e, qbar_e = transformed_jet(ctx, t)
    fns = [ex.compile_fn(e) for e in (t.phi, t.psi, pbar_e, qbar_e)]
    mapped = []
    for sample in traj.samples:
        args = tuple(float(c) for c in sample)
        try:
            mapped.append(tuple(fn(*args) for fn in fns))
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise SingularPointError(f"transformation singular at {args}") from exc

    xs = [m[0] for m in mapped]
    increasing = all(b > a for a, b in zip(xs, xs[1:]))
    decreasing = all(b < a for a, b in zip(xs, xs[1:]))
    if not (increasing or decreasing):
        raise NonMonotoneImageError("xbar is not strictly monotone along the trajectory")
    if decreasing:
        mapped.reverse()
        xs.reverse()

    xb0, ub0, pb0, qb0 = mapped[0]
    span = xs[-1] - xs[0]
    n = max(2 * len(xs), 200)
    h = span / n

    def rhs(state):
        u, v, w = state
        return (v, w, s * v + u)

    nodes = [(xs[0], ub0, pb0)]
    state = (ub0, pb0, qb0)
    for i in range(n):
        k1 = rhs(state)
        k2 = rhs(_axpy(state, k1, h / 2))
        k3 = rhs(_axpy(state, k2, h / 2))
        k4 = rhs(_axpy(state, k3, h))
        state = tuple(
            c + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
            for c, a1, a2, a3, a4 in zip(state, k1, k2, k3, k4)
        )
        nodes.append((xs[0] + (i + 1) * h, state[0], state[1]))

    worst = 0.0
    u_mapped, u_canon = [], []
    for xb, ub, _, _ in mapped:
        k = min(max(int((xb - xs[0]) / h), 0), n - 1)
        x0, y0, d0 = nodes[k]
        x1, y1, d1 = nodes[k + 1]
        pred = _hermite(xb, x0, x1, y0, y1, d0, d1)
        u_mapped.append(ub)
        u_canon.append(pred)
        worst = max(worst, abs(ub - pred))
    return xs, u_mapped, u_canon, worst
