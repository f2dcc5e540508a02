"""Command line front end.

Exit codes: 0 success, 1 bad input or solver failure, 2 completed without
meeting the goal (window cap reached for ``reconstruct``, distance above
``--tv-tol`` for ``compare``).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .dual import DualOverflowError, SolverConfig, SolverDiverged, distribution_from, minimize
from .moments import (
    SupportWindow,
    entropy,
    format_distribution_csv,
    load_moments,
    moments_of,
    parse_distribution_csv,
    total_variation,
)
from .numerics import InsufficientRealRoots
from .oracle import InfeasibleOnWindow, grid_maxent
from .reconstruction import ReconstructionResult, WindowCapReached, reconstruct
from .support import (
    CHEBYSHEV_VARIANTS,
    STRATEGIES,
    DegeneratePolynomial,
    SupportConfig,
    chebyshev_window,
    delta_roots,
    initial_window,
)

EXIT_OK, EXIT_ERROR, EXIT_INCOMPLETE = 0, 1, 2


def _positive_float(text):
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _add_solver_flags(p):
    g = p.add_argument_group("dual solver")
    g.add_argument("--delta-lambda", type=_positive_float, default=1e-8,
                   help="stop when the max-norm step falls below this (default 1e-8)")
    g.add_argument("--gamma0", type=_positive_float, default=1e-3,
                   help="initial Levenberg-Marquardt damping (default 1e-3)")
    g.add_argument("--max-iters", type=_positive_int, default=500)


def _add_support_flags(p):
    g = p.add_argument_group("support window")
    g.add_argument("--delta-prob", type=_positive_float, default=1e-3,
                   help="tail threshold relative to the peak probability (default 1e-3)")
    g.add_argument("--xi", type=_positive_float, default=0.1,
                   help="Chebyshev level (default 0.1)")
    g.add_argument("--strategy", choices=STRATEGIES, default="incremental")
    g.add_argument("--max-window", type=_positive_int, default=100_000)
    g.add_argument("--both-ends-tail", action="store_true",
                   help="also require a small left-edge probability when the window does not start at 0")
    g.add_argument("--literal-eq9", action="store_true",
                   help="even extension steps leave the left edge where it is")
    g.add_argument("--chebyshev-variant", choices=CHEBYSHEV_VARIANTS, default="printed")


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        delta_lambda=args.delta_lambda, gamma0=args.gamma0, max_iters=args.max_iters
    )


def _support_config(args) -> SupportConfig:
    return SupportConfig(
        delta_prob=args.delta_prob,
        xi=args.xi,
        strategy=args.strategy,
        max_window=args.max_window,
        both_ends=args.both_ends_tail,
        literal_eq9=args.literal_eq9,
        chebyshev_variant=args.chebyshev_variant,
    )


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors: exit 1, keep 2 for "incomplete"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="maxent-moments",
        description="Maximum entropy reconstruction of discrete distributions from raw moments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reconstruct", help="reconstruct a distribution from a moments JSON file")
    p.add_argument("input", help='moments file: {"moments": [1, mu_1, ...]}')
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    p.add_argument("--output-format", choices=("csv", "json"), default="csv")
    p.add_argument("--json-diagnostics", action="store_true",
                   help="write diagnostics to stderr as JSON")
    _add_solver_flags(p)
    _add_support_flags(p)

    p = sub.add_parser("moments", help="raw moments of a distribution CSV file")
    p.add_argument("input", help="distribution file with header x,p")
    p.add_argument("-o", "--output")
    p.add_argument("--max-order", type=int, default=4)

    p = sub.add_parser("support", help="show the initial support windows")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--output-format", choices=("text", "json"), default="text")
    _add_support_flags(p)

    p = sub.add_parser("compare", help="dual solver against the primal reference on a fixed window")
    p.add_argument("input")
    p.add_argument("--left", type=int, required=True)
    p.add_argument("--right", type=int, required=True)
    p.add_argument("--tv-tol", type=_positive_float, default=1e-3)
    p.add_argument("-o", "--output")
    p.add_argument("--json-diagnostics", action="store_true")
    _add_solver_flags(p)
    return parser


def _emit(text: str, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def _diagnostics(res: ReconstructionResult, status: str) -> dict:
    return {
        "status": status,
        "window": [res.window.left, res.window.right],
        "outer_iterations": res.outer_iterations,
        "inner_iterations": res.report.iterations,
        "converged": res.report.converged,
        "tail_ok": res.tail_ok,
        "lambda": [float(v) for v in res.multipliers.lam],
        "lambda0": res.multipliers.lambda0,
        "achieved_moments": res.achieved_moments.tolist(),
    }


def _print_diagnostics(diag: dict, as_json: bool):
    if as_json:
        print(json.dumps(diag), file=sys.stderr)
        return
    for key, value in diag.items():
        print(f"{key}: {value}", file=sys.stderr)


def cmd_reconstruct(args) -> int:
    try:
        mu = load_moments(args.input)
        scfg, dcfg = _support_config(args), _solver_config(args)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    if mu.order < 1:
        return _fail("reconstruction needs at least mu_1")
    try:
        res = reconstruct(mu, scfg, dcfg)
        status, code = "ok", EXIT_OK
    except WindowCapReached as exc:
        res = exc.result
        status, code = "window cap reached", EXIT_INCOMPLETE
    except (SolverDiverged, DualOverflowError) as exc:
        return _fail(f"solver failed: {exc}")

    diag = _diagnostics(res, status)
    if args.output_format == "csv":
        text = format_distribution_csv(res.distribution)
    else:
        text = json.dumps(
            {
                "x": list(range(res.window.left, res.window.right + 1)),
                "p": [float(v) for v in res.distribution.probs],
                "diagnostics": diag,
            }
        ) + "\n"
    _emit(text, args.output)
    _print_diagnostics(diag, args.json_diagnostics)
    return code


def cmd_moments(args) -> int:
    if args.max_order < 0:
        return _fail("--max-order must be >= 0")
    try:
        dist = parse_distribution_csv(Path(args.input).read_text())
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    mu = moments_of(dist, args.max_order)
    _emit(json.dumps({"moments": mu.tolist()}) + "\n", args.output)
    return EXIT_OK


def cmd_support(args) -> int:
    try:
        mu = load_moments(args.input)
        scfg = _support_config(args)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    if mu.order < 1:
        return _fail("support estimation needs at least mu_1")
    out = {"order": mu.order}
    if mu.order >= 2:
        try:
            w, eta = delta_roots(mu, scfg.root_tol)
            out["delta0_roots"] = [float(v) for v in w]
            out["delta1_roots"] = [float(v) for v in eta]
        except (DegeneratePolynomial, InsufficientRealRoots) as exc:
            out["roots_error"] = str(exc)
        cw = chebyshev_window(mu, scfg)
        out["chebyshev_window"] = [cw.left, cw.right]
    iw = initial_window(mu, scfg)
    out["initial_window"] = [iw.left, iw.right]

    if args.output_format == "json":
        text = json.dumps(out) + "\n"
    else:
        lines = []
        if "delta0_roots" in out:
            lines.append("delta0 roots: " + ", ".join(f"{v:.12g}" for v in out["delta0_roots"]))
            if out["delta1_roots"]:
                lines.append("delta1 roots: " + ", ".join(f"{v:.12g}" for v in out["delta1_roots"]))
        elif "roots_error" in out:
            lines.append(f"delta roots: unavailable ({out['roots_error']})")
        lines.append(f"initial window: {{{iw.left}..{iw.right}}}")
        if "chebyshev_window" in out:
            cl, cr = out["chebyshev_window"]
            lines.append(f"chebyshev window: {{{cl}..{cr}}}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        mu = load_moments(args.input)
        D = SupportWindow(args.left, args.right)
        dcfg = _solver_config(args)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    try:
        ref = grid_maxent(mu, D)
    except InfeasibleOnWindow as exc:
        return _fail(f"{exc} {D}")
    try:
        lm, rep = minimize(mu, D, dcfg)
    except (SolverDiverged, DualOverflowError) as exc:
        return _fail(f"solver failed: {exc}")
    q = distribution_from(lm, D)
    tv = total_variation(q, ref)
    achieved = moments_of(q, mu.order)
    diag = {
        "window": [D.left, D.right],
        "tv": tv,
        "entropy_dual": entropy(q),
        "entropy_reference": entropy(ref),
        "entropy_difference": entropy(q) - entropy(ref),
        "moment_residuals": [float(a - b) for a, b in zip(achieved.values, mu.values)],
        "converged": rep.converged,
        "iterations": rep.iterations,
        "tv_tol": args.tv_tol,
        "pass": tv <= args.tv_tol,
    }
    if args.json_diagnostics:
        text = json.dumps(diag) + "\n"
    else:
        text = "".join(f"{k}: {v}\n" for k, v in diag.items())
    _emit(text, args.output)
    return EXIT_OK if tv <= args.tv_tol else EXIT_INCOMPLETE


COMMANDS = {
    "reconstruct": cmd_reconstruct,
    "moments": cmd_moments,
    "support": cmd_support,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
