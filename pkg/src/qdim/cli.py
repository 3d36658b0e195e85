"""Command-line interface: ``qdim {dim,pressure,empirical,antichain,verify}``.

Exit status is 0 on success, 1 when ``verify`` finds a failing invariant and
2 on invalid arguments. Every run prints its effective parameters, so the
output alone records how it was produced.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import antichain as ac
from .exceptions import QdimError
from .measure import discretize
from .potential import ProbabilityVector
from .pressure import (
    DEFAULT_DEPTH,
    DEFAULT_TOL,
    curve_to_csv,
    pressure_curve,
    solve_t0,
)
from .quantizer import DEFAULT_GRID, estimate_dimension, fit_summary, fit_to_csv, scaling_diagnostics

NORMALIZE_TOL = 1e-9
DEFAULT_P = "0.4,0.35,0.25"
EMPIRICAL_DEPTH = 12


class UsageError(Exception):
    pass


def parse_p(text: str) -> ProbabilityVector:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--p expects three comma-separated numbers, got {text!r}")
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"--p expects three numbers, got {len(values)}")
    if abs(sum(values) - 1.0) >= NORMALIZE_TOL:
        raise argparse.ArgumentTypeError(f"probabilities sum to {sum(values)!r}, not 1")
    try:
        return ProbabilityVector.from_sequence(values, normalize_tol=NORMALIZE_TOL)
    except QdimError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def parse_grid(text: str) -> np.ndarray:
    """``a:b:step`` with both ends included."""
    try:
        a, b, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--t-grid expects a:b:step, got {text!r}")
    if not step > 0 or b < a:
        raise argparse.ArgumentTypeError("--t-grid needs step > 0 and b >= a")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return np.round(a + step * np.arange(count), 12)


def parse_ints(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def read_config(path: str) -> list:
    """``key = value`` lines turned into ``--key value`` tokens (``#`` starts a comment)."""
    tokens = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}")
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        tokens.append(f"--{key}")
        if value.lower() not in ("true", ""):
            tokens.append(value.strip('"'))
    return tokens


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdim", description="Quantization dimension of the x/3 + {0,1,3} self-similar measure.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, depth_default, depth_help):
        sp.add_argument("--p", type=parse_p, default=parse_p(DEFAULT_P), help="probabilities p0,p1,p3")
        sp.add_argument("--r", type=float, default=2.0, help="distortion order")
        sp.add_argument("--depth", type=int, default=depth_default, help=depth_help)
        sp.add_argument("--tol", type=float, default=DEFAULT_TOL, help="root tolerance")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--output", choices=("json", "csv"), default=None)
        sp.add_argument("--config", default=None, help="file of key = value lines mirroring the flags")

    sp = sub.add_parser("dim", help="root t0 and the quantization dimension chi_r")
    common(sp, DEFAULT_DEPTH, "word length of the partition sums")

    sp = sub.add_parser("pressure", help="pressure curve as CSV")
    common(sp, DEFAULT_DEPTH, "word length of the partition sums")
    sp.add_argument("--t-grid", type=parse_grid, default=parse_grid("0:1.2:0.05"), dest="t_grid")

    sp = sub.add_parser("empirical", help="exact quantization errors and the fitted slope")
    common(sp, EMPIRICAL_DEPTH, "discretization depth of the measure")
    sp.add_argument("--grid", type=parse_ints, default=DEFAULT_GRID, help="codebook sizes")
    sp.add_argument("--pressure-depth", type=int, default=DEFAULT_DEPTH, dest="pressure_depth")

    sp = sub.add_parser("antichain", help="first-passage antichain statistics")
    common(sp, DEFAULT_DEPTH, "word length used for t0")
    sp.add_argument("--epsilon", type=float, default=1e-3)
    sp.add_argument("--kind", choices=("gamma_hat", "gamma_E", "gamma_sigma_tilde"), default="gamma_hat")

    sp = sub.add_parser("verify", help="run the invariant suite")
    sp.add_argument("--level", choices=("quick", "full"), default="quick")
    sp.add_argument("--only", type=lambda s: tuple(s.split(",")), default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--timings", action="store_true", help="include wall-clock times in the report")
    sp.add_argument("--config", default=None)
    return parser


def _parse(argv):
    argv = list(argv)
    parser = build_parser()
    if "--config" in argv:
        k = argv.index("--config")
        if k + 1 >= len(argv):
            parser.error("--config needs a path")
        path = argv[k + 1]
        argv = argv[:k] + argv[k + 2 :]
        if not argv:
            parser.error("missing subcommand")
        try:
            argv = argv[:1] + read_config(path) + argv[1:]
        except UsageError as exc:
            parser.error(str(exc))
    return parser, parser.parse_args(argv)


def _emit(obj, out):
    out.write(json.dumps(obj, sort_keys=True) + "\n")


def _cmd_dim(args, out):
    res = solve_t0(args.p, args.r, depth=args.depth, tol=args.tol)
    record = {
        "p": list(args.p.as_tuple()),
        "r": args.r,
        "t0": res.t0,
        "chi_r": res.chi_r,
        "p_at_t0": res.p_at_t0,
        "depth": res.depth,
        "tolerance": res.tolerance,
        "residual": res.residual,
        "diagnostics": res.diagnostics,
    }
    if not args.p.standing_assumption:
        record["note"] = "standing-assumption: mirrored"
    _emit(record, out)
    return 0


def _cmd_pressure(args, out):
    rows = pressure_curve(args.p, args.t_grid, args.r, depth=args.depth)
    if args.output == "json":
        for t, pt, Pt, line in rows:
            _emit({"t": t, "p_t": pt, "P_t": Pt, "rt_log3": line}, out)
    else:
        out.write(curve_to_csv(rows))
    return 0


def _cmd_empirical(args, out):
    if args.r not in (1, 2):
        raise UsageError("empirical needs --r 1 or --r 2")
    r = int(args.r)
    chi = solve_t0(args.p, r, depth=args.pressure_depth, tol=args.tol).chi_r
    fit = estimate_dimension(discretize(args.p, args.depth), r, args.grid)
    if args.output == "csv":
        out.write(fit_to_csv(fit, chi))
        return 0
    table = scaling_diagnostics(fit, chi)
    record = fit_summary(fit, chi)
    record.update(
        {
            "p": list(args.p.as_tuple()),
            "depth": args.depth,
            "pressure_depth": args.pressure_depth,
            "n_grid": list(fit.n_grid),
            "intercept": fit.intercept,
            "residual": fit.residual,
            "discarded": list(fit.discarded),
            "scaling": {"columns": list(table.columns), "rows": [list(r) for r in table.rows]},
            "scaling_ratio": table.ratio,
            "scaling_band": table.band,
            "spearman_below": table.spearman_below,
            "spearman_above": table.spearman_above,
        }
    )
    _emit(record, out)
    return 0


def _cmd_antichain(args, out):
    t0 = solve_t0(args.p, args.r, depth=args.depth, tol=args.tol).t0
    a = ac.build_gamma_hat(args.p, args.epsilon, args.r, t0)
    if args.kind in ("gamma_E", "gamma_sigma_tilde"):
        a = ac.extend_to_E(a)
    if args.kind == "gamma_sigma_tilde":
        a = ac.project_to_full_shift(a)
    st = ac.antichain_stats(a, args.r, t0)
    _emit(
        {
            "epsilon": args.epsilon,
            "count": st.count,
            "min_len": st.min_len,
            "max_len": st.max_len,
            "sum_phi_hat": st.sum_phi_hat,
            "kind": st.kind,
            "p": list(args.p.as_tuple()),
            "r": args.r,
            "t0": t0,
            "sum_phi_hat_parents": st.sum_phi_hat_parents,
            "parent_count": st.parent_count,
            "ratio": st.ratio,
        },
        out,
    )
    return 0


def _cmd_verify(args, out):
    from .verify import run_suite

    results = run_suite(args.level, seed=args.seed, only=args.only, stream=out, timings=args.timings)
    failed = [r.name for r in results if not r.passed]
    out.write(f"{len(results) - len(failed)}/{len(results)} checks passed (level={args.level}, seed={args.seed})\n")
    return 1 if failed else 0


COMMANDS = {
    "dim": _cmd_dim,
    "pressure": _cmd_pressure,
    "empirical": _cmd_empirical,
    "antichain": _cmd_antichain,
    "verify": _cmd_verify,
}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    argv = sys.argv[1:] if argv is None else argv
    try:
        parser, args = _parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except (QdimError, UsageError, ValueError) as exc:
        print(f"qdim {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
