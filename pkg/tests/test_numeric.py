"""RK4 integration and numeric transformation corroboration tests."""

import math

import pytest
import sympy as sp

from jetlin.errors import (
    BlowUpError,
    NonMonotoneImageError,
    SingularPointError,
)
from jetlin.expr import P, Q, U, X, cbrt
from jetlin.invariants import compute_invariants
from jetlin.jets import JetContext
from jetlin.linearize import PointTransformation, linearize
from jetlin.numeric import (
    JetPoint,
    evaluate,
    numeric_transform_check,
    rk4_solve,
)
from jetlin.parse import parse_ode
from conftest import EXAMPLE_1, EXAMPLE_2, EXAMPLE_3


class TestEvaluate:
    def test_real_odd_root(self):
        assert evaluate(cbrt(X), JetPoint(-8.0, 0.0, 0.0, 0.0)) == -2.0

    def test_example_2_rhs(self):
        f = parse_ode(EXAMPLE_2).f
        assert abs(evaluate(f, (1.0, 0.0, 1.0, 0.0)) - 11.0) < 1e-12

    def test_example_1_i3_and_j(self):
        rep = compute_invariants(JetContext(parse_ode(EXAMPLE_1).f))
        pt = (1.0, 1.0, 2.0, 0.0)
        assert abs(evaluate(rep.i3, pt) + 8.0) < 1e-12
        assert abs(evaluate(rep.j, pt) + 2.0) < 1e-12

    def test_agrees_with_exact_on_rational(self):
        e = (3 * Q**2 + P) / (X - 5)
        pt = (1.0, 2.0, -1.5, 0.5)
        exact = (3 * sp.Rational(1, 4) - sp.Rational(3, 2)) / sp.Integer(-4)
        assert abs(evaluate(e, pt) - float(exact)) < 1e-14


class TestRK4:
    def test_exponential_solution(self):
        # u''' = u with ic (0, 1, 1, 1): the solution is e^x
        traj = rk4_solve(JetContext(U), (0, 1, 1, 1), (0, 1), 1e-3)
        x, u, p, q = traj.samples[-1]
        assert abs(x - 1.0) < 1e-12
        assert abs(u - math.e) < 1e-8

    def test_linear_solution_exact(self):
        traj = rk4_solve(JetContext(sp.S.Zero), (0, 1, 1, 0), (0, 2), 1e-3)
        assert abs(traj.samples[-1][1] - 3.0) < 1e-12

    def test_fourth_order_convergence(self):
        ctx = JetContext(U)
        errs = []
        for step in (2e-3, 1e-3):
            traj = rk4_solve(ctx, (0, 1, 1, 1), (0, 1), step)
            errs.append(abs(traj.samples[-1][1] - math.e))
        ratio = errs[0] / errs[1]
        assert 8 < ratio < 32  # ~16x per halving, within a factor of 2

    def test_blow_up_detected(self):
        with pytest.raises(BlowUpError):
            rk4_solve(JetContext(U), (0, 1, 1, 1), (0, 1), 1e-2, state_bound=1.5)

    def test_singular_rhs_detected(self):
        # f = 1/x with a grid node landing exactly on the pole
        with pytest.raises((SingularPointError, BlowUpError)):
            rk4_solve(JetContext(1 / X), (-0.05, 0, 1, 0), (-0.05, 0.05), 1e-2)

    def test_uniform_increasing_grid(self):
        traj = rk4_solve(JetContext(sp.S.Zero), (0, 0, 0, 0), (0, 0.1), 0.02)
        xs = [s[0] for s in traj.samples]
        steps = {round(b - a, 12) for a, b in zip(xs, xs[1:])}
        assert steps == {0.02}


class TestTransformCheck:
    def test_identity_on_canonical(self):
        ctx = JetContext(2 * P + U)
        traj = rk4_solve(ctx, (0, 1, 0, 0), (0, 1), 1e-3)
        worst = numeric_transform_check(ctx, PointTransformation(X, U), 2, traj)
        assert worst < 1e-9

    @pytest.mark.parametrize(
        "source, span, ic",
        [
            (EXAMPLE_1, (1.0, 1.5), (1, 1, 1, 0)),
            (EXAMPLE_2, (1.0, 2.0), (1, 0.5, 1, 0)),
            (EXAMPLE_3, (1.0, 2.0), (1, 1, 1, 0)),
        ],
    )
    def test_worked_examples_within_tolerance(self, source, span, ic):
        ctx = JetContext(parse_ode(source).f)
        result = linearize(ctx, compute_invariants(ctx))
        traj = rk4_solve(ctx, ic, span, 1e-3)
        worst = numeric_transform_check(
            ctx, result.transformation, result.s, traj
        )
        assert worst < 1e-6, (source, worst)

    def test_corrupted_psi_fails_loudly(self):
        ctx = JetContext(parse_ode(EXAMPLE_2).f)
        traj = rk4_solve(ctx, (1, 0.5, 1, 0), (1.0, 2.0), 1e-3)
        worst = numeric_transform_check(
            ctx, PointTransformation(X**2, X**3 * U), 2, traj
        )
        assert worst > 1e-3

    def test_non_monotone_image(self):
        # u''' = 0 with p(x) = 0.4 - x: xbar = x + 2u folds at x = 0.9, which
        # sits between grid nodes so every mapped value stays finite and the
        # monotonicity check is what trips
        ctx = JetContext(sp.S.Zero)
        traj = rk4_solve(ctx, (0, 0, 0.4, -1), (0, 1.3), 1.3e-2)
        with pytest.raises(NonMonotoneImageError):
            numeric_transform_check(ctx, PointTransformation(X + 2 * U, U), 0, traj)

    def test_decreasing_image_handled(self):
        # phi = -u with increasing u: the mapped abscissa decreases
        ctx = JetContext(parse_ode(EXAMPLE_1).f)
        result = linearize(ctx, compute_invariants(ctx))
        traj = rk4_solve(ctx, (1, 1, 1, 0), (1.0, 1.4), 1e-3)
        worst = numeric_transform_check(ctx, result.transformation, 0, traj)
        assert worst < 1e-6
