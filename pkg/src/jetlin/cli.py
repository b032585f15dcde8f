"""Command-line frontend: classify, invariants, verify, solve-num.

Exit codes: 0 classified/completed (any outcome), 2 parse error, 3 unsupported
input (non-rational f), 4 internal inconsistency, 5 undecided verdicts present.
JSON reports carry a top-level ``"schema": 1`` and print expressions in the
same grammar the parser accepts, so every report re-parses.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

import sympy as sp

from . import expr as ex
from .classify import Outcome, classify
from .errors import (
    BlowUpError,
    DegenerateJacobianError,
    IntegrationUnsupportedError,
    JetlinError,
    ManualCompletionNeededError,
    NoGaugeWorksError,
    NonMonotoneImageError,
    NonRationalError,
    NotAffineInQError,
    NotClosedError,
    OdeSyntaxError,
    RhsNotBaseError,
    SingularPointError,
)
from .expr import Verdict, ZeroTestConfig
from .invariants import compute_invariants, evaluate_K
from .jets import JetContext
from .linearize import PointTransformation, linearize, verify_linearization
from .numeric import rk4_solve, transform_check_data
from .parse import parse_expression, parse_ode

_INCONSISTENCY = (
    NotClosedError,
    NoGaugeWorksError,
    RhsNotBaseError,
    NotAffineInQError,
    DegenerateJacobianError,
)

#: starting jets tried for the default numeric corroboration run
_DEFAULT_ICS = ((1.0, 1.0, 1.0, 0.0), (1.0, 0.5, 1.0, 0.0), (0.5, 1.0, -1.0, 0.25))
_DEFAULT_SPAN_LENGTH = 0.5
_DEFAULT_STEP = 1e-3


def _verdict_str(v):
    return v.value if isinstance(v, Verdict) else "n/a"


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="jetlin",
        description="Linearizability classification for u''' = f(x, u, u', u'')",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    common.add_argument("--sample-seed", type=int, default=0, metavar="N",
                        help="seed for the probabilistic zero test")
    common.add_argument("--zero-samples", type=int, default=20, metavar="N",
                        help="sample count for the probabilistic zero test")
    common.add_argument("--tol", type=float, default=1e-6, metavar="R",
                        help="tolerance for numeric corroboration")
    common.add_argument("--precision", type=int, default=53, metavar="BITS",
                        help="working precision for pointwise evaluation")
    common.add_argument("--no-numeric", action="store_true",
                        help="skip the numeric corroboration pass")

    sub = parser.add_subparsers(dest="command", required=True)

    cls = sub.add_parser("classify", parents=[common],
                         help="full pipeline: invariants, branch, transformation")
    cls.add_argument("expression", help="right-hand side f, e.g. \"3*u''^2/u' + x*u'^4\"")
    cls.add_argument("--plot", metavar="FILE",
                     help="render the numeric corroboration figure (five-point branch)")
    cls.set_defaults(handler=_cmd_classify)

    inv = sub.add_parser("invariants", parents=[common], help="invariant report only")
    inv.add_argument("expression")
    inv.set_defaults(handler=_cmd_invariants)

    ver = sub.add_parser("verify", parents=[common],
                         help="residual certificate for a user-supplied transformation")
    ver.add_argument("expression")
    ver.add_argument("--phi", required=True, help="phi(x, u)")
    ver.add_argument("--psi", required=True, help="psi(x, u)")
    ver.add_argument("--s", required=True, help="constant s of the target form")
    ver.add_argument("--plot", metavar="FILE", help="render the numeric comparison figure")
    ver.set_defaults(handler=_cmd_verify)

    num = sub.add_parser("solve-num", parents=[common],
                         help="integrate the ODE and emit a delimited trajectory")
    num.add_argument("expression")
    num.add_argument("--ic", required=True, metavar="x0,u0,p0,q0")
    num.add_argument("--span", required=True, metavar="A,B")
    num.add_argument("--step", type=float, default=_DEFAULT_STEP, metavar="H")
    num.add_argument("--out", metavar="FILE", help="write the CSV here instead of stdout")
    num.add_argument("--plot", metavar="FILE", help="render the trajectory figure")
    num.set_defaults(handler=_cmd_solve_num)

    return parser


def _zero_config(args):
    return ZeroTestConfig(samples=args.zero_samples, seed=args.sample_seed)


def _canonical_str(e):
    """Canonical rational form when possible, grammar text otherwise."""
    if ex.is_rational_expr(e):
        return str(ex.normalize(e))
    return ex.to_source(e)


def _invariant_rows(report):
    return [
        {"name": name, "value": _canonical_str(e), "verdict": _verdict_str(verdict)}
        for name, e, verdict in report.rows()
    ]


def _sample_s_numeric(report, cfg, precision):
    """Numeric K at the first nonsingular sample point (corroborates s)."""
    import random

    rng = random.Random(cfg.seed)
    for _ in range(64):
        pt = tuple(float(c) for c in ex.draw_sample_point(rng, cfg))
        try:
            return evaluate_K(report, pt, precision)
        except (SingularPointError, JetlinError):
            continue
    return None


def _default_numeric_check(ctx, transformation, s, tol, warnings, plot=None, title=None):
    for ic in _DEFAULT_ICS:
        span = (ic[0], ic[0] + _DEFAULT_SPAN_LENGTH)
        try:
            traj = rk4_solve(ctx, ic, span, _DEFAULT_STEP)
            xbars, u_mapped, u_canon, worst = transform_check_data(
                ctx, transformation, s, traj
            )
        except (SingularPointError, BlowUpError, NonMonotoneImageError, ZeroDivisionError):
            continue
        entry = {
            "max_residual": worst,
            "ic": list(ic),
            "span": list(span),
            "step": _DEFAULT_STEP,
            "within_tol": worst < tol,
        }
        if worst >= tol:
            warnings.append(
                f"numeric corroboration residual {worst:.3e} exceeds tol {tol:.1e}"
            )
        if plot:
            from .plotting import save_transform_check_plot

            save_transform_check_plot(xbars, u_mapped, u_canon, plot, title=title)
            entry["plot"] = plot
        return entry
    warnings.append("numeric corroboration skipped: no nonsingular default trajectory")
    return None


def _cmd_classify(args, cfg):
    ode = parse_ode(args.expression)
    ctx = JetContext(ode.f)
    cls = classify(ctx, cfg)
    report = cls.report
    warnings = []
    if cls.singular_note:
        warnings.append(cls.singular_note)
    if cls.undecided:
        warnings.append("undecided verdicts: " + ", ".join(cls.undecided))

    payload = {
        "schema": 1,
        "command": "classify",
        "input": {"source": ode.source, "f": ex.to_source(ctx.f)},
        "classification": {
            "outcome": cls.outcome.value,
            "contact_linearizable": cls.contact_linearizable,
            "s": ex.to_source(cls.s_exact) if cls.s_exact is not None else None,
            "s_value": cls.s_value,
            "s_numeric": None,
            "reasons": list(cls.reasons),
            "undecided": list(cls.undecided),
        },
        "invariants": _invariant_rows(report),
        "transformation": None,
        "manual_pde": None,
        "numeric_check": None,
        "warnings": warnings,
    }

    if cls.outcome is Outcome.FIVE_POINT:
        payload["classification"]["s_numeric"] = _sample_s_numeric(
            report, cfg, args.precision
        )
        try:
            lin = linearize(ctx, report, cfg)
        except ManualCompletionNeededError as exc:
            payload["manual_pde"] = exc.pde
        except IntegrationUnsupportedError as exc:
            warnings.append(f"transformation recovery unsupported: {exc}")
        else:
            payload["transformation"] = {
                "phi": ex.to_source(lin.transformation.phi),
                "psi": ex.to_source(lin.transformation.psi),
                "a1": ex.to_source(lin.gauge.a1),
                "residual_zero": lin.residual_verdict is Verdict.ZERO,
                "jacobian": ex.to_source(lin.transformation.jacobian_condition),
            }
            if not args.no_numeric:
                payload["numeric_check"] = _default_numeric_check(
                    ctx, lin.transformation, lin.s, args.tol, warnings,
                    plot=args.plot,
                    title=f"u''' = {args.expression}  ->  canonical form",
                )
    return payload, (5 if cls.undecided else 0)


def _cmd_invariants(args, cfg):
    ode = parse_ode(args.expression)
    ctx = JetContext(ode.f)
    report = compute_invariants(ctx, cfg)
    warnings = []
    if report.singular_note:
        warnings.append(report.singular_note)
    payload = {
        "schema": 1,
        "command": "invariants",
        "input": {"source": ode.source, "f": ex.to_source(ctx.f)},
        "invariants": _invariant_rows(report),
        "k_constant": ex.to_source(report.k_value) if report.k_value is not None else None,
        "warnings": warnings,
    }
    undecided = [name for name, _, v in report.rows() if v is Verdict.UNKNOWN]
    return payload, (5 if undecided else 0)


def _parse_constant(text):
    try:
        return sp.Rational(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise OdeSyntaxError(f"not a rational constant: {text!r}", 0) from None


def _cmd_verify(args, cfg):
    ode = parse_ode(args.expression)
    ctx = JetContext(ode.f)
    phi = parse_expression(args.phi)
    psi = parse_expression(args.psi)
    s = _parse_constant(args.s)
    t = PointTransformation(phi, psi)
    residual, verdict = verify_linearization(ctx, t, s, cfg)
    warnings = []
    payload = {
        "schema": 1,
        "command": "verify",
        "input": {"source": ode.source, "f": ex.to_source(ctx.f)},
        "transformation": {
            "phi": ex.to_source(phi),
            "psi": ex.to_source(psi),
            "s": ex.to_source(s),
            "residual": ex.to_source(residual),
            "residual_zero": verdict is Verdict.ZERO,
            "residual_verdict": _verdict_str(verdict),
        },
        "numeric_check": None,
        "warnings": warnings,
    }
    if not args.no_numeric:
        payload["numeric_check"] = _default_numeric_check(
            ctx, t, s, args.tol, warnings,
            plot=args.plot,
            title=f"u''' = {args.expression}  ->  u''' = {args.s}*u' + u",
        )
    return payload, (5 if verdict is Verdict.UNKNOWN else 0)


def _parse_floats(text, n, what):
    parts = [s.strip() for s in text.split(",")]
    if len(parts) != n:
        raise OdeSyntaxError(f"{what} needs {n} comma-separated numbers", 0)
    try:
        return tuple(float(Fraction(s)) for s in parts)
    except (ValueError, ZeroDivisionError):
        raise OdeSyntaxError(f"bad number in {what}: {text!r}", 0) from None


def _cmd_solve_num(args, cfg):
    ode = parse_ode(args.expression)
    ctx = JetContext(ode.f)
    ic = _parse_floats(args.ic, 4, "--ic")
    span = _parse_floats(args.span, 2, "--span")
    traj = rk4_solve(ctx, ic, span, args.step)
    lines = ["x,u,u',u''"]
    lines += [",".join(repr(c) for c in sample) for sample in traj.samples]
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    if args.plot:
        from .plotting import save_trajectory_plot

        save_trajectory_plot(traj, args.plot, title=f"u''' = {args.expression}")
    payload = {
        "schema": 1,
        "command": "solve-num",
        "input": {"source": ode.source, "f": ex.to_source(ctx.f)},
        "trajectory": {
            "step": traj.step,
            "method": traj.method,
            "rows": len(traj.samples),
            "out": args.out,
            "plot": args.plot,
        },
        "warnings": [],
    }
    if not args.out and not args.json:
        payload["_raw"] = csv_text
    if args.json:
        payload["trajectory"]["samples"] = [list(s) for s in traj.samples]
    return payload, 0


def _render_text(payload):
    out = []
    kind = payload["command"]
    if "_raw" in payload:
        return payload["_raw"].rstrip("\n")
    out.append(f"input: u''' = {payload['input']['f']}")
    cls = payload.get("classification")
    if cls:
        out.append(f"outcome: {cls['outcome']}")
        out.append(f"contact-linearizable: {'yes' if cls['contact_linearizable'] else 'no'}")
        if cls["s"] is not None:
            extra = f" (numeric sample {cls['s_numeric']!r})" if cls["s_numeric"] is not None else ""
            out.append(f"s = {cls['s']}{extra}")
        for reason in cls["reasons"]:
            out.append(f"reason: {reason}")
    if payload.get("invariants"):
        out.append("invariants:")
        width = max(len(r["name"]) for r in payload["invariants"])
        for row in payload["invariants"]:
            out.append(f"  {row['name']:<{width}}  {row['verdict']:<8}  {row['value']}")
    if kind == "invariants" and payload.get("k_constant") is not None:
        out.append(f"K = {payload['k_constant']}")
    t = payload.get("transformation")
    if t:
        out.append("transformation:")
        for key in ("phi", "psi", "a1", "s", "residual"):
            if key in t and t[key] is not None:
                out.append(f"  {key} = {t[key]}")
        out.append(f"  residual zero: {'yes' if t['residual_zero'] else 'no'}")
    if payload.get("manual_pde"):
        out.append(f"manual completion needed: {payload['manual_pde']}")
    nc = payload.get("numeric_check")
    if nc:
        out.append(
            f"numeric check: max residual {nc['max_residual']:.3e} over "
            f"x in [{nc['span'][0]}, {nc['span'][1]}] (step {nc['step']})"
        )
    for w in payload.get("warnings", ()):
        out.append(f"warning: {w}")
    if "timing" in payload:
        out.append(f"time: {payload['timing']['seconds']:.3f} s")
    return "\n".join(out)


_VALUE_FLAGS = frozenset(
    ("--phi", "--psi", "--s", "--ic", "--span", "--step", "--out", "--plot",
     "--sample-seed", "--zero-samples", "--tol", "--precision")
)


def _fold_flag_values(argv):
    """Join value-taking flags with their argument so values that start with
    a minus sign (e.g. --phi "-1/x") survive argparse."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def run(argv) -> int:
    parser = _build_parser()
    args = parser.parse_args(_fold_flag_values(list(argv)))
    cfg = _zero_config(args)
    started = time.perf_counter()
    try:
        payload, code = args.handler(args, cfg)
    except OdeSyntaxError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except NonRationalError as err:
        print(f"error: unsupported input: {err}", file=sys.stderr)
        return 3
    except _INCONSISTENCY as err:
        print(f"error: internal inconsistency: {err}", file=sys.stderr)
        return 4
    except (BlowUpError, SingularPointError, JetlinError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    payload["timing"] = {"seconds": time.perf_counter() - started}
    if args.json:
        payload.pop("_raw", None)
        print(json.dumps(payload, indent=2))
    else:
        print(_render_text(payload))
    return code


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
