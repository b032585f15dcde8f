"""Exception hierarchy shared across the package."""


class JetlinError(Exception):
    """Base class for all errors raised by jetlin."""


class OdeSyntaxError(JetlinError):
    """Malformed input text; carries the 0-based offset of the offending character."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnsupportedVariableError(OdeSyntaxError):
    """Identifier outside the second-order jet (e.g. u''' or a stray name)."""


class NonIntegerExponentError(OdeSyntaxError):
    """Exponent does not reduce to an integer literal."""


class NonRationalError(JetlinError):
    """Operation requires a rational expression but got cbrt/ln nodes."""


class DegenerateI3Error(JetlinError):
    """Branch computation requires I3 not identically zero."""


class SingularPointError(JetlinError):
    """Evaluation point hits a zero denominator or a pole."""


class EvaluationDomainError(JetlinError):
    """Evaluation leaves the real domain (ln of a non-positive value)."""


class NotClosedError(JetlinError):
    """Mixed partials of a recovered 1-form disagree; inconsistent upstream data."""


class NotAffineInQError(JetlinError):
    """Gauge source term is not affine in q, so coefficient matching fails."""


class IntegrationUnsupportedError(JetlinError):
    """Antiderivative falls outside the supported Laurent/logarithmic class."""


class RhsNotBaseError(JetlinError):
    """a1*J fails to reduce to a function of (x, u) alone."""


class ManualCompletionNeededError(JetlinError):
    """psi requires solving a first-order PDE we do not attempt; carries the PDE text."""

    def __init__(self, pde):
        super().__init__(f"manual completion needed: solve {pde}")
        self.pde = pde


class DegenerateJacobianError(JetlinError):
    """D_x(phi) is identically zero; candidate transformation is not invertible."""


class NoGaugeWorksError(JetlinError):
    """No candidate in the gauge orbit verifies; carries all residuals for diagnosis."""

    def __init__(self, residuals):
        super().__init__(
            "no gauge candidate produced a zero residual: "
            + "; ".join(str(r) for r in residuals)
        )
        self.residuals = tuple(residuals)


class ZeroLError(JetlinError):
    """Reduction of u''' = k*u' + l*u requires l != 0."""


class BlowUpError(JetlinError):
    """Numeric trajectory exceeded the configured state bound."""


class NonMonotoneImageError(JetlinError):
    """Transformed abscissa is not strictly monotone along the trajectory."""
