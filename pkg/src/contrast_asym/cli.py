"""Command-line entry point.

    contrast-asym run <config>
    contrast-asym oracle radial --d 2 --alpha 0.5 --beta -0.5 --n 8,16,32
    contrast-asym oracle elliptic --q 0.5 --n 16,32,64
    contrast-asym check-assumptions <config>
    contrast-asym plot <csv> -o <svg>

Exit codes: 0 all checks pass, 1 at least one check failed, 2
infrastructure error.  CONTRAST_ASYM_THREADS caps check concurrency.
"""

from __future__ import annotations

import argparse
import sys

from .config import parse_config
from .errors import ContrastAsymError
from .geometry import assumption_report
from .oracles import coefficient_csv_rows, elliptic_solution, radial_perturbation, radial_solution
from .reports import parse_rate_csv, svg_rate_plot
from .runner import run

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1
EXIT_INFRASTRUCTURE = 2


def _parse_n_list(text: str):
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated integer list")
    if not values or any(n < 2 for n in values):
        raise argparse.ArgumentTypeError("n values must be integers >= 2")
    return values


def _cmd_run(args) -> int:
    with open(args.config) as f:
        config = parse_config(f.read())
    manifest = run(config, out_dir=args.output or config.output)
    for chk in manifest["checks"]:
        line = f"[{chk['status'].upper():7s}] {chk['name']}: {chk['claim']}"
        if chk["reason"]:
            line += f" ({chk['reason']})"
        print(line)
    if any(c["status"] == "fail" for c in manifest["checks"]):
        return EXIT_CHECK_FAILED
    return EXIT_PASS


def _cmd_check_assumptions(args) -> int:
    with open(args.config) as f:
        config = parse_config(f.read())
    family = config.build_family()
    rep = assumption_report(
        family,
        config.n_list,
        config.tolerance("assumption_p"),
        config.tolerance("assumption_tau"),
        audit=True,
    )
    print(f"family: {family.name}, n_list: {rep.n_list}")
    print(f"A1 containment: {'pass' if rep.a1_pass else 'FAIL'} (margin {rep.dist_to_k:.4g})")
    print(
        f"A2 vanishing mass: {'pass' if rep.a2_pass else 'FAIL'} "
        f"(l1 {rep.l1[0]:.4g} -> {rep.l1[-1]:.4g}, slope {rep.a2_slope:.3f})"
    )
    print(f"A3 disjoint ordered parts: {'pass' if rep.a3_pass else 'FAIL'}")
    print(f"A4 alternatives: {', '.join(rep.a4_satisfied_by) or 'none'} (p={rep.p}, tau={rep.tau})")
    for v in rep.violations:
        print(f"  violation: {v}")
    return EXIT_PASS if rep.all_pass() else EXIT_CHECK_FAILED


def _cmd_oracle(args) -> int:
    if args.which == "radial":
        sols = [radial_solution(args.d, n, args.alpha, args.beta) for n in args.n]
        rows = coefficient_csv_rows(sols)
        extra = ["# n,sup,l1"]
        for s in sols:
            sup, l1 = radial_perturbation(s)
            extra.append(f"# {s.n},{sup:.17g},{l1:.17g}")
        text = "\n".join(rows + extra) + "\n"
    else:
        lines = ["n,lam,ell1,ell2,a_in,b_in"]
        for n in args.n:
            lam = float(n) ** args.q
            sol = elliptic_solution(n, lam)
            l1, l2 = sol.ell
            lines.append(f"{n},{lam:.17g},{l1:.17g},{l2:.17g},{sol.a_in:.17g},{sol.b_in:.17g}")
        text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS


def _cmd_plot(args) -> int:
    with open(args.csv) as f:
        rows, summary = parse_rate_csv(f.read())
    svg = svg_rate_plot(rows, summary, title=args.title or "")
    with open(args.output, "w") as f:
        f.write(svg)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contrast-asym", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the checks in a run configuration")
    p_run.add_argument("config")
    p_run.add_argument("-o", "--output", default=None, help="output directory override")
    p_run.set_defaults(fn=_cmd_run)

    p_chk = sub.add_parser("check-assumptions", help="audit the structural hypotheses only")
    p_chk.add_argument("config")
    p_chk.set_defaults(fn=_cmd_check_assumptions)

    p_or = sub.add_parser("oracle", help="closed-form reference values")
    or_sub = p_or.add_subparsers(dest="which", required=True)
    p_rad = or_sub.add_parser("radial")
    p_rad.add_argument("--d", type=int, default=2)
    p_rad.add_argument("--alpha", type=float, default=0.5)
    p_rad.add_argument("--beta", type=float, default=-0.5)
    p_rad.add_argument("--n", type=_parse_n_list, required=True)
    p_rad.add_argument("-o", "--output", default=None)
    p_rad.set_defaults(fn=_cmd_oracle)
    p_ell = or_sub.add_parser("elliptic")
    p_ell.add_argument("--q", type=float, default=0.5)
    p_ell.add_argument("--n", type=_parse_n_list, required=True)
    p_ell.add_argument("-o", "--output", default=None)
    p_ell.set_defaults(fn=_cmd_oracle)

    p_plot = sub.add_parser("plot", help="render a rate CSV as an SVG")
    p_plot.add_argument("csv")
    p_plot.add_argument("-o", "--output", required=True)
    p_plot.add_argument("--title", default=None)
    p_plot.set_defaults(fn=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ContrastAsymError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFRASTRUCTURE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFRASTRUCTURE


if __name__ == "__main__":
    sys.exit(main())
