"""Command-line driver: ``f2deform <command> [options]``.

Exit codes: 0 all checks passed (an OBSTRUCTED lift is a result, not a
failure), 1 some verification failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__
from .charts import ManifestError, load_manifest, verify_surface_models, verify_transition_consistency
from .global_fields import (DEFAULT_WINDOWS, fiber_field_dimension, global_field_dimensions,
                            h0_dimension, h1_dimension, h1_window, is_coboundary,
                            kodaira_spencer_cocycle, mixed_form, solve_global_fields,
                            verify_field_shape)
from .lie import (generate_fundamental_fields, load_structure_constants, verify_bracket_table)
from .lifting import (SOLVABLE, base_component_analysis, relation_residuals,
                      run_lift, sample_obstruction, stock_problem)
from .report import VerificationReport
from .symbolic import canonical_string

MAX_ORDER, MAX_DEGREE, MAX_LIFT = 6, 8, 3
EXPECTED_H0, EXPECTED_H1, EXPECTED_FIBER = 7, 1, 6


class UsageError(Exception):
    pass


def _report_failures(rep) -> list:
    return [{"name": c.name, "residual": c.residual} for c in rep.checks if not c.passed]


# commands -----------------------------------------------------------------------

def cmd_verify_gluing(args, report: VerificationReport) -> None:
    try:
        family = load_manifest(args.manifest)
    except (ManifestError, OSError) as exc:
        raise UsageError(f"cannot load manifest: {exc}") from exc
    with report.timed("gluing.transition_consistency") as box:
        rep = verify_transition_consistency(family.primary, seed=args.seed)
        box["status"] = "PASS" if rep.passed else "FAIL"
        box["details"] = {"checks": len(rep.checks), "failures": _report_failures(rep)}
    with report.timed("gluing.surface_models") as box:
        rep = verify_surface_models(family)
        box["status"] = "PASS" if rep.passed else "FAIL"
        box["details"] = {"checks": [c.to_json() for c in rep.checks]}


def cmd_global_fields(args, report: VerificationReport) -> None:
    N, D = args.order, args.degree
    if N is None:
        N = 0
    if not 0 <= N <= MAX_ORDER:
        raise UsageError(f"--order must be in 0..{MAX_ORDER}")
    if not 2 <= D <= MAX_DEGREE:
        raise UsageError(f"--degree must be in 2..{MAX_DEGREE}")
    key = f"global_fields.N{N}.D{D}"
    with report.timed(f"{key}.dimension") as box:
        d1, d2 = global_field_dimensions(N, D)
        expected = 7 * (N + 1)
        box["status"] = "PASS" if d1 == d2 == expected else "FAIL"
        box["details"] = {"dimension": d1, "oracle_dimension": d2, "expected": expected}
    with report.timed(f"{key}.shape") as box:
        basis = solve_global_fields(N, D)
        rep = verify_field_shape(basis)
        box["status"] = "PASS" if rep.passed else "FAIL"
        box["details"] = {"checks": len(rep.checks), "failures": _report_failures(rep),
                          "basis": [{k: canonical_string(v) for k, v in gf.parameters.items() if v}
                                    for gf in basis]}
    with report.timed("global_fields.fiber_dimension") as box:
        dims = {str(tau): fiber_field_dimension(tau, max(D, 5)) for tau in (1, 2)}
        box["status"] = "PASS" if all(d == EXPECTED_FIBER for d in dims.values()) else "FAIL"
        box["details"] = {"tau": dims, "expected": EXPECTED_FIBER}


def _parse_window(text: str) -> tuple:
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
        else:
            hi = int(text)
            lo = -hi
    except ValueError as exc:
        raise UsageError(f"bad window {text!r}; use W or LO:HI") from exc
    if lo > -3 or hi < 3:
        raise UsageError(f"window {text!r} must contain [-3, 3]")
    return lo, hi


def cmd_cohomology(args, report: VerificationReport) -> None:
    windows = [_parse_window(w) for w in args.window] if args.window else list(DEFAULT_WINDOWS)
    with report.timed("cohomology.h0") as box:
        h0 = h0_dimension()
        box["status"] = "PASS" if h0 == EXPECTED_H0 else "FAIL"
        box["details"] = {"dimension": h0, "expected": EXPECTED_H0}
    with report.timed("cohomology.h0_fiber") as box:
        dims = {str(tau): fiber_field_dimension(tau) for tau in (1, 2)}
        box["status"] = "PASS" if all(d == EXPECTED_FIBER for d in dims.values()) else "FAIL"
        box["details"] = {"tau": dims, "expected": EXPECTED_FIBER}
    with report.timed("cohomology.h1") as box:
        res = h1_dimension(windows)
        box["status"] = "PASS" if all(d == EXPECTED_H1 for d in res.dimensions) else "FAIL"
        box["details"] = dict(res.to_json(), expected=EXPECTED_H1)
        if not res.stabilized:
            report.warnings.append("cohomology.h1: fewer than three agreeing windows, "
                                   "stabilization not established")
    with report.timed("cohomology.kodaira_spencer") as box:
        ks = kodaira_spencer_cocycle()
        nonzero = not is_coboundary(ks)
        spans = h1_window(windows[0][0], windows[0][1], [ks.in_chart("W'")]) == 0
        box["status"] = "PASS" if nonzero and spans else "FAIL"
        box["details"] = {"cocycle": ks.to_json(), "mixed_form": canonical_string(mixed_form(ks)),
                          "is_coboundary": not nonzero, "spans_h1": spans}


def cmd_brackets(args, report: VerificationReport) -> None:
    try:
        S = load_structure_constants(args.table)
    except (ValueError, OSError) as exc:
        raise UsageError(f"cannot load structure constants: {exc}") from exc
    with report.timed("brackets.fundamental_fields") as box:
        ff = generate_fundamental_fields(S)
        box["status"] = "PASS" if ff.chart_agreement.passed else "FAIL"
        box["details"] = dict(ff.to_json(), failures=_report_failures(ff.chart_agreement))
    with report.timed("brackets.table") as box:
        rep = verify_bracket_table(ff, S)
        passed = sum(c.passed for c in rep.checks)
        box["status"] = "PASS" if rep.passed else "FAIL"
        box["details"] = {"passed": passed, "total": len(rep.checks),
                          "sign_flipped": ff.sign_flipped, "failures": _report_failures(rep)}
    with report.timed("brackets.jacobi") as box:
        bad = S.jacobi_violations()
        box["status"] = "PASS" if not bad else "FAIL"
        box["details"] = {"violations": [list(t) for t in bad]}


def cmd_lift(args, report: VerificationReport) -> None:
    n = 2 if args.order is None else args.order
    if not 0 <= n <= MAX_LIFT:
        raise UsageError(f"--order must be in 0..{MAX_LIFT} for lift")
    with report.timed("lift.order0") as box:
        P = stock_problem(n)
        res = relation_residuals(run_lift(P, 0).lift)
        box["status"] = "PASS" if all(r.is_zero() for r in res.values()) else "FAIL"
        box["details"] = {"relations": len(res), "directions_global": P.directions_are_global()}
        if not box["details"]["directions_global"]:
            box["status"] = "FAIL"
    start = time.perf_counter()
    lr = run_lift(P, n)
    elapsed = time.perf_counter() - start
    report.add("lift.result", lr.status, {"target_order": n, "obstructed_at": lr.obstructed_at,
                                          "orders": [o.to_json() for o in lr.outcomes]}, elapsed)
    lower = None
    for out in lr.outcomes:
        key = f"lift.order{out.order}"
        if out.status == SOLVABLE:
            with report.timed(f"{key}.soundness") as box:
                ok_rank = out.rank == out.rank_oracle
                res = relation_residuals(out.lift.particular())
                ok_res = all(r.is_zero() for r in res.values())
                box["status"] = "PASS" if ok_rank and ok_res else "FAIL"
                box["details"] = {"rank": out.rank, "rank_oracle": out.rank_oracle,
                                  "parameters": out.new_parameters,
                                  "particular_residuals_zero": ok_res}
            lower = out.lift
        else:
            cert = out.certificate
            with report.timed(f"{key}.soundness") as box:
                base = lower if lower is not None else run_lift(P, out.order - 1).lift
                samples = sample_obstruction(P, base, out.order, samples=20, seed=args.seed)
                used = {x for p in cert.parameter_system for x in p.variables()}
                monotone = all(base.parameters.get(x, out.order) < out.order for x in used)
                box["status"] = "PASS" if cert.valid and all(samples) and monotone else "FAIL"
                box["details"] = {"groebner_unit": cert.valid,
                                  "inconsistent_samples": sum(samples), "samples": len(samples),
                                  "monotone": monotone, "certificate": cert.to_json()}
    if lr.lift.order >= 1:
        with report.timed("lift.base_component") as box:
            bc = base_component_analysis(lr.lift)
            need = [f"a_0^{i}" for i in range(1, 8)] + ["a_1^1", "a_1^2", "a_1^4"]
            box["status"] = "PASS" if all(x in bc.vanishing for x in need) else "FAIL"
            box["details"] = bc.to_json()


def cmd_all(args, report: VerificationReport) -> None:
    for fn in (cmd_verify_gluing, cmd_global_fields, cmd_cohomology, cmd_brackets, cmd_lift):
        fn(args, report)


COMMANDS = {
    "verify-gluing": cmd_verify_gluing,
    "global-fields": cmd_global_fields,
    "cohomology": cmd_cohomology,
    "brackets": cmd_brackets,
    "lift": cmd_lift,
    "all": cmd_all,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="f2deform",
        description="Exact verification of the deformation of the second Hirzebruch surface.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--report-path", type=Path, help="write the JSON report here")
        p.add_argument("--json", action="store_true", help="print the JSON report to stdout")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized spot checks")
        if name in ("verify-gluing", "all"):
            p.add_argument("--manifest", type=Path, help="transition manifest (default: stock)")
        if name in ("global-fields", "lift", "all"):
            p.add_argument("--order", type=int, default=None,
                           help="t-order (global-fields: N, default 0; lift: n, default 2)")
        if name in ("global-fields", "all"):
            p.add_argument("--degree", type=int, default=5, help="v-degree bound D (default 5)")
        if name in ("cohomology", "all"):
            p.add_argument("--window", action="append",
                           help="Laurent window W (meaning [-W, W]) or --window=LO:HI; repeatable")
        if name in ("brackets", "all"):
            p.add_argument("--table", type=Path, help="structure-constant table (default: stock)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    report = VerificationReport(__version__, args.command)
    try:
        COMMANDS[args.command](args, report)
    except UsageError as exc:
        print(f"f2deform: error: {exc}", file=sys.stderr)
        return 2
    if args.report_path:
        args.report_path.write_text(report.dumps())
    if args.json:
        sys.stdout.write(report.dumps())
    else:
        print("\n".join(report.summary_lines()))
    return 1 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
