"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on input or
usage errors (including charts violating a command's hypotheses).
"""

from __future__ import annotations

import argparse
import sys
import time

from .distribution import characteristic_rank_at, classify, curvature, symmetry_residual
from .expr import EvaluationError, SamplingPolicy, sample_points
from .forms import max_residual
from .jet import AmbientLeakError, JetSpecError, build_jet_chart, prolong
from .linfty import HypothesisError, LinftyContext, bracket, jacobiator_residual
from .serialization import (
    InputError,
    base_field_from_json,
    chart_from_json,
    elements_from_json,
    form_to_json,
    load_json,
    vector_field_to_json,
)
from .suites import (
    RunReport,
    homogeneity_suite,
    homotopy_suite,
    jet_crosscheck_suite,
    linfty_suite,
    make_check,
    kernel_rank_suite,
)
from .symplectization import CrossCheckError, build_symplectization

DEFAULT_SEED = 0xC0FFEE
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def _policy(args) -> SamplingPolicy:
    kw = {"seed": args.seed, "num_samples": args.samples}
    if args.tol is not None:
        kw.update(abs_tol=args.tol, rel_tol=args.tol)
    return SamplingPolicy(**kw)


def _common_inputs(args) -> dict:
    return {"samples": args.samples, "tol": args.tol if args.tol is not None else SamplingPolicy().abs_tol}


def cmd_classify(args) -> RunReport:
    policy = _policy(args)
    chart = chart_from_json(load_json(args.chart))
    cls = classify(chart, policy)
    R = curvature(chart)
    env = sample_points(chart.coords, policy)
    pt = {name: float(env[name][0]) for name in chart.coords}
    result = {
        "classification": str(cls),
        "curvature": {f"R^{a + 1}_{i + 1}{j + 1}": str(e) for (a, i, j), e in sorted(R.nonzero().items())},
        "characteristic_rank": cls.char_rank if cls.kind != "irregular" else sorted(set(cls.ranks)),
        "characteristic_rank_at_first_sample": characteristic_rank_at(chart, pt),
    }
    return RunReport("classify", {"chart": chart.to_json(), **_common_inputs(args)}, args.seed, result=result)


def cmd_verify(args) -> RunReport:
    policy = _policy(args)
    chart = chart_from_json(load_json(args.chart))
    report = RunReport("verify", {"chart": chart.to_json(), "suite": args.suite, **_common_inputs(args)}, args.seed)
    h = build_symplectization(chart, policy)
    suites = ["theorem8", "homotopy", "linfty"] if args.suite == "all" else [args.suite]
    if "theorem8" in suites:
        report.checks += kernel_rank_suite(h, policy)
    if "homotopy" in suites:
        report.checks += homogeneity_suite(h, policy) + homotopy_suite(h, policy)
    if "linfty" in suites:
        try:
            ctx = LinftyContext(h, policy)
        except HypothesisError as err:
            if args.suite == "linfty":
                raise
            report.notes.append(f"linfty suite skipped: {err}")
        else:
            report.checks += linfty_suite(ctx, policy)
    report.result["classification"] = str(classify(chart, policy))
    return report


def cmd_bracket(args) -> RunReport:
    policy = _policy(args)
    chart = chart_from_json(load_json(args.chart))
    h = build_symplectization(chart, policy)
    ctx = LinftyContext(h, policy)
    elements = elements_from_json(ctx, load_json(args.elements))
    ell = args.ell
    if not 1 <= ell <= ctx.n + 2:
        raise UsageError(f"--ell must lie in 1..{ctx.n + 2} for n = {ctx.n}")
    if len(elements) < ell:
        raise UsageError(f"--ell {ell} needs at least {ell} elements, the file has {len(elements)}")
    args_ = elements[:ell]
    out = bracket(ctx, args_)
    result = {"degree": out.degree, "form": form_to_json(out.form)}
    if out.ham_field is not None:
        result["ham_field"] = vector_field_to_json(out.ham_field)
    report = RunReport("bracket", {"chart": chart.to_json(), "ell": ell, **_common_inputs(args)}, args.seed,
                       result=result)
    residual = max_residual(jacobiator_residual(ctx, args_), policy)
    report.checks.append(make_check(f"generalized Jacobi identity on the {ell} elements", residual,
                                    policy.num_samples, policy.abs_tol))
    return report


def cmd_jet(args) -> RunReport:
    policy = _policy(args)
    chart = build_jet_chart(args.m, args.n, args.k, cap=args.cap)
    spec = chart.spec
    inputs = {"spec": {"m": spec.m, "n": spec.n, "k": spec.k}, "action": args.action, **_common_inputs(args)}
    report = RunReport(f"jet {args.action}", inputs, args.seed)
    if args.action == "build":
        report.result["chart"] = chart.adapted.to_json()
        report.result["classification"] = str(classify(chart.adapted, policy))
    elif args.action == "prolong":
        if args.fields is None:
            raise UsageError("jet prolong needs --fields FILE with {\"Xi\": [...], \"Xalpha\": [...]}")
        X_i, X_alpha = base_field_from_json(spec, load_json(args.fields))
        pr = prolong(chart, X_i, X_alpha)
        report.result["field"] = vector_field_to_json(pr.field)
        report.result["chi"] = [str(c) for c in pr.chi]
        residual = max_residual(symmetry_residual(chart.adapted, pr.X_a, pr.X_i), policy)
        report.checks.append(make_check("prolonged field is a multicontact symmetry", residual,
                                        policy.num_samples, policy.abs_tol))
    else:
        ells = (args.ell,) if args.ell is not None else (2, 3)
        report.checks += jet_crosscheck_suite(chart, policy, ells=ells, tuples=args.tuples)
    return report


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED,
                        help="sampling seed (default 0xC0FFEE)")
    common.add_argument("--samples", type=int, default=32, help="sample points per identity test")
    common.add_argument("--tol", type=float, default=None, help="absolute and relative tolerance (default 1e-8)")
    common.add_argument("--json", action="store_true", help="emit the report as JSON")
    common.add_argument("--timing", action="store_true", help="include elapsed time in the report")

    parser = argparse.ArgumentParser(prog="multicontact", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="classify a chart file")
    p.add_argument("chart")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite on a chart file")
    p.add_argument("chart")
    p.add_argument("--suite", choices=["theorem8", "linfty", "homotopy", "all"], default="all")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bracket", parents=[common], help="evaluate lambda_ell on elements from a file")
    p.add_argument("chart")
    p.add_argument("elements")
    p.add_argument("--ell", type=int, required=True)
    p.set_defaults(func=cmd_bracket)

    p = sub.add_parser("jet", parents=[common], help="jet-space charts, prolongation and cross-checks")
    p.add_argument("action", choices=["build", "prolong", "crosscheck"])
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--cap", type=int, default=40, help="maximum number of jet coordinates")
    p.add_argument("--fields", help="base point field JSON for prolong")
    p.add_argument("--ell", type=int, default=None, help="bracket arity for crosscheck (default 2 and 3)")
    p.add_argument("--tuples", type=int, default=5, help="random tuples per arity for crosscheck")
    p.set_defaults(func=cmd_jet)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.samples < 1:
        print("error: --samples must be positive", file=sys.stderr)
        return EXIT_INPUT
    start = time.perf_counter()
    try:
        report = args.func(args)
    except HypothesisError as err:
        print(f"error: hypothesis violated: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (CrossCheckError, AmbientLeakError) as err:
        print(f"check failed: {err}", file=sys.stderr)
        return EXIT_FAIL
    except (InputError, UsageError, JetSpecError, ValueError, EvaluationError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    report.elapsed_ms = int(round((time.perf_counter() - start) * 1000))
    if args.json:
        print(report.to_json(include_timing=args.timing))
    else:
        if not args.timing:
            report.elapsed_ms = None
        print(report.to_text())
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
