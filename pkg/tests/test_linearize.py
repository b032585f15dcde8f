"""Transformation recovery and residual certification tests."""

import pytest
import sympy as sp

from jetlin.errors import (
    IntegrationUnsupportedError,
    ManualCompletionNeededError,
    NoGaugeWorksError,
    NotClosedError,
    RhsNotBaseError,
)
from jetlin.expr import (
    P,
    Q,
    U,
    Verdict,
    X,
    cbrt,
    compile_fn,
    is_zero,
    ln,
    normalize,
)
from jetlin.invariants import compute_invariants
from jetlin.jets import JetContext, total_derivative
from jetlin.linearize import (
    GaugeFunction,
    PointTransformation,
    gauge_search,
    integrate_restricted,
    linearize,
    recover_a1,
    recover_phi,
    recover_psi,
    verify_linearization,
)
from jetlin.parse import parse_ode
from conftest import EXAMPLE_1, EXAMPLE_2, EXAMPLE_3

ZERO = Verdict.ZERO


def setup_case(source):
    ctx = JetContext(parse_ode(source).f)
    return ctx, compute_invariants(ctx)


class TestIntegrateRestricted:
    def test_polynomial(self):
        assert integrate_restricted(3 * X**2, X) == X**3

    def test_inverse_gives_ln(self):
        assert integrate_restricted(-1 / P, P) == -ln(P)

    def test_negative_power(self):
        assert integrate_restricted(X ** (-2), X) == -1 / X

    def test_accepts_rational_form(self):
        form = normalize(3 * X**2)
        assert integrate_restricted(form, "x") == X**3

    def test_coefficients_ride_along(self):
        out = integrate_restricted(cbrt(5) * U * X, X)
        assert sp.simplify(out - cbrt(5) * U * X**2 / 2) == 0

    @pytest.mark.parametrize(
        "e, v",
        [
            (1 / (P + 1), P),
            (1 / (P + 1) ** 2, P),
            (P / (P + 1), P),
            ((X + U) / (X - U) ** 2, X),
            (1 / (Q - 2 * U), Q),
        ],
    )
    def test_shifted_pole(self, e, v):
        out = integrate_restricted(e, v)
        assert sp.cancel(sp.diff(out, v) - e) == 0

    def test_non_laurent_rejected(self):
        # two distinct poles are outside the supported class
        with pytest.raises(IntegrationUnsupportedError):
            integrate_restricted(1 / (X + 1) / X, X)
        with pytest.raises(IntegrationUnsupportedError):
            integrate_restricted(cbrt(X), X)


class TestRecoverPhi:
    @pytest.mark.parametrize(
        "source, phi",
        [
            (EXAMPLE_1, -U),
            (EXAMPLE_2, X**2),
            (EXAMPLE_3, -1 / X),
        ],
    )
    def test_worked_examples(self, source, phi):
        _, rep = setup_case(source)
        assert sp.cancel(recover_phi(rep) - phi) == 0

    @pytest.mark.parametrize("source", [EXAMPLE_1, EXAMPLE_2, EXAMPLE_3])
    def test_dxphi_cubed_is_i3(self, source):
        ctx, rep = setup_case(source)
        phi = recover_phi(rep)
        certificate = total_derivative(ctx, phi) ** 3 - rep.i3
        assert is_zero(certificate) is ZERO


class TestRecoverA1:
    @pytest.mark.parametrize(
        "source, a1",
        [
            (EXAMPLE_1, 1 / P),
            (EXAMPLE_2, X**2),
            (EXAMPLE_3, 1 / X**2),
        ],
    )
    def test_worked_examples(self, source, a1):
        ctx, rep = setup_case(source)
        phi = recover_phi(rep)
        gauge = recover_a1(ctx, rep, phi)
        # defined up to a nonzero multiplicative constant
        ratio = sp.cancel(gauge.a1 / a1)
        assert ratio.is_Rational and ratio != 0

    def test_inconsistent_phi_rejected(self):
        ctx, rep = setup_case(EXAMPLE_2)
        with pytest.raises(NotClosedError):
            recover_a1(ctx, rep, X**3)


class TestRecoverPsi:
    @pytest.mark.parametrize(
        "source, psi",
        [
            (EXAMPLE_1, -X),  # sign gauge fixed later by the orbit search
            (EXAMPLE_2, X**2 * U),
            (EXAMPLE_3, U / X**2),
        ],
    )
    def test_worked_examples_up_to_sign(self, source, psi):
        ctx, rep = setup_case(source)
        phi = recover_phi(rep)
        gauge = recover_a1(ctx, rep, phi)
        got = recover_psi(rep, phi, gauge)
        assert sp.cancel(got - psi) == 0 or sp.cancel(got + psi) == 0

    def test_mixed_phi_raises_manual_completion(self):
        _, rep = setup_case(EXAMPLE_2)
        with pytest.raises(ManualCompletionNeededError) as err:
            recover_psi(rep, X + U, GaugeFunction(sp.S.One))
        assert "psi_u" in err.value.pde

    def test_rhs_with_jet_vars_rejected(self):
        _, rep = setup_case(EXAMPLE_2)
        with pytest.raises(RhsNotBaseError):
            recover_psi(rep, X**2, GaugeFunction(P))


class TestVerify:
    def test_example_1_known_map(self):
        ctx, _ = setup_case(EXAMPLE_1)
        residual, verdict = verify_linearization(
            ctx, PointTransformation(-U, X), 0
        )
        assert residual == 0 and verdict is ZERO

    def test_identity_on_canonical_form(self):
        ctx = JetContext(2 * P + U)
        residual, verdict = verify_linearization(ctx, PointTransformation(X, U), 2)
        assert residual == 0 and verdict is ZERO

    def test_wrong_s_fails(self):
        # oracle: the residual is visibly nonzero at a sample point
        ctx, _ = setup_case(EXAMPLE_2)
        residual, verdict = verify_linearization(
            ctx, PointTransformation(X**2, X**2 * U), 0
        )
        assert verdict is Verdict.NONZERO
        assert abs(compile_fn(residual)(1.0, 1.0, 1.0, 1.0)) > 1e-6


class TestGaugeSearch:
    def test_sign_flip_corrected(self):
        # candidates start from the psi = -x recovery output; the orbit must
        # land on a verified transformation
        ctx, rep = setup_case(EXAMPLE_1)
        candidates = [
            PointTransformation(-U, -X),
            PointTransformation(-U, X),
        ]
        accepted, residual = gauge_search(ctx, candidates, 0)
        assert residual == 0
        assert accepted.psi in (-X, X)

    def test_canonical_identity_accepted_immediately(self):
        ctx = JetContext(P + U)
        accepted, residual = gauge_search(ctx, [PointTransformation(X, U)], 1)
        assert accepted.phi == X and residual == 0

    def test_corrupted_phi_exhausts_orbit(self):
        ctx, _ = setup_case(EXAMPLE_1)
        candidates = [PointTransformation(U, X), PointTransformation(U, -X)]
        with pytest.raises(NoGaugeWorksError) as err:
            gauge_search(ctx, candidates, 0)
        assert len(err.value.residuals) == 2


class TestEndToEnd:
    @pytest.mark.parametrize(
        "source, s, phi, psi",
        [
            (EXAMPLE_1, 0, -U, X),
            (EXAMPLE_2, 2, X**2, X**2 * U),
            (EXAMPLE_3, 0, -1 / X, U / X**2),
        ],
    )
    def test_worked_examples_end_to_end(self, source, s, phi, psi):
        ctx, rep = setup_case(source)
        result = linearize(ctx, rep)
        assert result.s == s
        assert result.residual == 0
        assert result.residual_verdict is ZERO
        assert result.certificate_ok
        # gauge-equivalent to the known map: same phi, psi up to sign
        assert sp.cancel(result.transformation.phi - phi) == 0
        assert (
            sp.cancel(result.transformation.psi - psi) == 0
            or sp.cancel(result.transformation.psi + psi) == 0
        )
        assert is_zero(result.transformation.jacobian_condition) is Verdict.NONZERO

    def test_formal_cbrt_constant_branch(self):
        # u''' = 5u: J = cbrt(5) stays formal yet the chain closes exactly
        ctx = JetContext(5 * U)
        rep = compute_invariants(ctx)
        result = linearize(ctx, rep)
        assert result.s == 0
        assert result.residual == 0
        assert sp.simplify(result.transformation.phi - cbrt(5) * X) == 0
        assert result.transformation.psi == U

    def test_canonical_family_identity_map(self):
        ctx = JetContext(sp.Rational(17, 5) * P + U)
        result = linearize(ctx, compute_invariants(ctx))
        assert result.transformation.phi == X
        assert result.transformation.psi == U
        assert result.gauge.a1 == 1
