"""Branch decision tree over the invariant report."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import sympy as sp

from . import expr as ex
from .errors import ZeroLError
from .expr import Verdict, ZeroTestConfig
from .invariants import InvariantReport, compute_invariants
from .jets import JetContext


class Outcome(enum.Enum):
    SEVEN_POINT = "seven_point_linearizable"
    SEVEN_CONTACT_ONLY = "seven_contact_linearizable_only"
    FIVE_POINT = "five_point_linearizable"
    OUTSIDE = "outside_classified_branches"


#: five-symmetry branch conditions in decision order: name -> wanted verdict
_FIVE_CHAIN = (
    ("I1", Verdict.ZERO),
    ("I2", Verdict.ZERO),
    ("I3", Verdict.NONZERO),
    ("I4", Verdict.ZERO),
    ("I5", Verdict.ZERO),
    ("I6", Verdict.ZERO),
    ("I7", Verdict.ZERO),
    ("K_q", Verdict.ZERO),
    ("K_p", Verdict.ZERO),
    ("K_u", Verdict.ZERO),
    ("K_x", Verdict.ZERO),
)

_SEVEN_NAMES = ("P1", "P2", "P3", "P4")
_CONTACT_NAMES = ("W1", "W2")


@dataclass(frozen=True)
class Classification:
    """Outcome of the decision tree plus everything needed to audit it."""

    outcome: Outcome
    s_exact: Optional[sp.Expr]  # exact constant (rational or formal cbrt)
    s_value: Optional[float]
    contact_linearizable: bool
    diagnostics: tuple  # ((name, verdict), ...) in decision order
    reasons: tuple  # human-readable reasons for OUTSIDE
    undecided: tuple  # invariant names whose verdict was Unknown
    singular_note: Optional[str]
    report: InvariantReport


def classify(ctx: JetContext, cfg: ZeroTestConfig = ex.DEFAULT_ZERO_CONFIG) -> Classification:
    """Decide the branch for one ODE.

    Order: the seven-symmetry point test first, then the contact flag, then
    the five-symmetry chain; anything else lands outside the classified
    branches with the first failing invariant named.  Any Unknown verdict on
    a decisive invariant also lands outside (never a guessed certificate).
    """
    report = compute_invariants(ctx, cfg)
    v = report.verdicts

    diagnostics = []
    undecided = []

    def look(name):
        verdict = v.get(name)
        diagnostics.append((name, verdict))
        if verdict is Verdict.UNKNOWN:
            undecided.append(name)
        return verdict

    seven = [look(name) for name in _SEVEN_NAMES]
    contact = [v[name] for name in _CONTACT_NAMES]
    diagnostics.extend(zip(_CONTACT_NAMES, contact))
    undecided.extend(
        n for n, verdict in zip(_CONTACT_NAMES, contact) if verdict is Verdict.UNKNOWN
    )
    contact_flag = all(verdict is Verdict.ZERO for verdict in contact)

    def build(outcome, s_exact=None, s_value=None, reasons=()):
        return Classification(
            outcome=outcome,
            s_exact=s_exact,
            s_value=s_value,
            contact_linearizable=contact_flag,
            diagnostics=tuple(diagnostics),
            reasons=tuple(reasons),
            undecided=tuple(dict.fromkeys(undecided)),
            singular_note=report.singular_note,
            report=report,
        )

    if all(verdict is Verdict.ZERO for verdict in seven):
        # point equivalence to u''' = 0 forces I3 == 0, so the five-symmetry
        # branch (I3 != 0) cannot also fire
        assert v["I3"] is Verdict.ZERO, "seven-point test passed but I3 != 0"
        assert contact_flag, "seven-point test passed but contact pair nonzero"
        return build(Outcome.SEVEN_POINT)

    failed = None
    for name, wanted in _FIVE_CHAIN:
        verdict = look(name)
        if verdict is None or verdict is not wanted:
            failed = (name, wanted, verdict)
            break
    else:
        s_exact = report.k_value
        s_value = float(s_exact.evalf(30)) if s_exact is not None else None
        return build(Outcome.FIVE_POINT, s_exact=s_exact, s_value=s_value)

    name, wanted, got = failed
    if got is Verdict.UNKNOWN or got is None:
        reason = f"{name} could not be decided"
    elif wanted is Verdict.NONZERO:
        reason = f"{name} vanishes identically"
    else:
        reason = f"{name} is not identically zero"
    if contact_flag and name == "I3" and not undecided:
        # Contact equivalence already forces I3 == 0, so failing only there
        # adds no negative finding: the contact certificate stands alone.
        # A chain failure on any other invariant is new information and the
        # equation lands outside the classified branches, flag intact.
        return build(Outcome.SEVEN_CONTACT_ONLY, reasons=(reason,))
    return build(Outcome.OUTSIDE, reasons=(reason,))


def s_from_kl(k, l) -> float:
    """Constant of the reduced form for u''' = k*u' + l*u: k / l**(2/3)."""
    k = Fraction(k)
    l = Fraction(l)
    if l == 0:
        raise ZeroLError("l must be nonzero")
    root = math.copysign(abs(float(l)) ** (1.0 / 3.0), float(l))
    return float(k) / root**2
