"""Command-line interface: ``khop <subcommand> [options]``.

Exit codes: 0 on success, 1 when a ``check`` suite fails, 2 on usage or
domain errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from fractions import Fraction
from typing import Sequence

from .exactpoly import MultiPoly, rename, specialize, substitute, tau, to_fraction

__all__ = ["main", "run", "build_parser", "frac_str", "dumps"]


class UsageError(Exception):
    """Bad flag combination or out-of-domain value (exit code 2)."""


# ---------------------------------------------------------------------------
# parsing helpers


def parse_rational(text: str) -> Fraction:
    """Exact rational from ``"3"``, ``"0.5"``, ``"1/3"`` or ``"1e-3"``."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def parse_rational_list(text: str) -> list[Fraction]:
    return [parse_rational(t) for t in text.split(",") if t.strip()]


def parse_int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from exc
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("powers must be positive integers")
    return vals


def frac_str(x) -> str:
    """``"p/q"`` (or ``"p"`` for integers)."""
    return str(to_fraction(x))


def _default(o):
    if isinstance(o, Fraction):
        return frac_str(o)
    if isinstance(o, MultiPoly):
        return o.to_string()
    raise TypeError(type(o).__name__)


def dumps(payload) -> str:
    """JSON with rationals as strings and floats in shortest round-trip form."""
    return json.dumps(payload, default=_default, sort_keys=False)


# ---------------------------------------------------------------------------
# exact engines


def _lambda_spec(args, k: int):
    """Returns ``(kind, value)`` with kind ``"vector"``, ``"scalar"`` or ``"symbolic"``."""
    vec = getattr(args, "lambda_vec", None)
    if vec is not None:
        if len(vec) != k - 1:
            raise UsageError(f"--lambda needs {k - 1} comma-separated values for k={k}")
        return "vector", vec
    if args.lambda_equal is not None:
        return "scalar", args.lambda_equal
    return "symbolic", None


def _apply_lambdas(poly: MultiPoly, kind: str, value, k: int) -> MultiPoly:
    if kind == "scalar":
        return specialize(poly, lambda_equal=value)
    if kind == "vector":
        for i, v in enumerate(value, start=1):
            poly = substitute(poly, f"lambda{i}", v)
    return poly


def _exact_command(args, which: str) -> dict:
    from .hopcumulants import cumulant_poly, joint_cumulant_poly
    from .hopmoments import LimitError, UnsortedTauWarning, moment_poly

    k = args.k
    if k < 1:
        raise UsageError("--k must be at least 1")
    if args.powers is not None and args.n is not None:
        raise UsageError("give either --n or --powers, not both")
    if args.powers is None and args.n is None:
        raise UsageError("one of --n or --powers is required")
    mults = args.powers if args.powers is not None else [1] * args.n
    if args.n is not None and args.n < 1:
        raise UsageError("--n must be positive")
    lam_kind, lam_value = _lambda_spec(args, k)
    payload: dict = {"kind": which, "k": k, "powers": mults}
    strict = not args.no_limits

    def poly_for(group_mults: Sequence[int]) -> MultiPoly:
        if which == "moment":
            return moment_poly(k, group_mults, strict=strict)
        if args.powers is not None:
            return cumulant_poly(k, group_mults, strict=strict)
        return joint_cumulant_poly(k, group_mults, strict=strict)

    try:
        if args.symbolic or args.taus is None:
            if args.tau_equal:
                if which == "moment" or args.powers is None:
                    # coincident arguments collapse to a single power
                    poly = rename(poly_for([sum(mults)]), {tau(1): "tau"})
                else:
                    poly = poly_for(mults)
                    poly = rename(poly, {tau(i): "tau" for i in range(1, len(mults) + 1)})
            else:
                poly = poly_for(mults)
            poly = _apply_lambdas(poly, lam_kind, lam_value, k)
            payload["polynomial"] = poly.to_string()
        if args.taus is not None:
            if lam_kind == "symbolic":
                lam_kind, lam_value = "scalar", Fraction(1)
            taus = args.taus
            if len(taus) != len(mults):
                raise UsageError(f"--tau needs {len(mults)} values")
            if any(t < 0 for t in taus):
                raise UsageError("tau values must be nonnegative")
            pairs = list(zip(taus, mults))
            if any(a[0] > b[0] for a, b in zip(pairs, pairs[1:])):
                warnings.warn("tau values were sorted into ascending order", UnsortedTauWarning)
                payload["warning"] = "tau values were sorted into ascending order"
                pairs.sort(key=lambda p: p[0])
            distinct, merged = [], []
            for v, m in pairs:
                if distinct and distinct[-1] == v and not (which == "cumulant" and args.powers is not None):
                    merged[-1] += m
                elif distinct and distinct[-1] == v:
                    raise UsageError("with --powers, cumulant arguments must be distinct")
                else:
                    distinct.append(v)
                    merged.append(m)
            poly = poly_for(merged)
            assignment = {tau(i): v for i, v in enumerate(distinct, start=1)}
            poly = _apply_lambdas(poly, lam_kind, lam_value, k)
            value = poly.eval(assignment)
            payload["tau"] = [frac_str(t) for t, _ in pairs]
            payload["value"] = value
    except LimitError as exc:
        raise UsageError(str(exc)) from exc
    return payload


def _emit_exact(payload: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(dumps(payload) + "\n")
        return
    if "polynomial" in payload:
        out.write(payload["polynomial"] + "\n")
    if "value" in payload:
        out.write(frac_str(payload["value"]) + "\n")


def cmd_moments(args, out) -> int:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        payload = _exact_command(args, "moment")
    if "warning" in payload:
        print(f"warning: {payload['warning']}", file=sys.stderr)
    _emit_exact(payload, args.format, out)
    return 0


def cmd_cumulants(args, out) -> int:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        payload = _exact_command(args, "cumulant")
    if "warning" in payload:
        print(f"warning: {payload['warning']}", file=sys.stderr)
    _emit_exact(payload, args.format, out)
    return 0


def cmd_variance(args, out) -> int:
    from .variance import (
        second_moment_equal,
        second_moment_general,
        variance_asymptotic,
        variance_equal,
        variance_general,
    )

    k = args.k
    if not 2 <= k <= 8:
        raise UsageError("variance needs 2 <= k <= 8")
    payload: dict = {"kind": "second_moment" if args.second_moment else "variance", "k": k}
    if args.asymptotic:
        if args.lambda_vec is not None:
            raise UsageError("--asymptotic needs a single --lambda")
        if args.tau is None:
            raise UsageError("--asymptotic needs --tau")
        lam_value = args.lambda_equal if args.lambda_equal is not None else Fraction(1)
        payload["kind"] = "variance_asymptotic"
        payload["value"] = variance_asymptotic(k, lam_value, args.tau)
    elif args.lambda_vec is not None:
        if len(args.lambda_vec) != k - 1:
            raise UsageError(f"--lambda-vec needs {k - 1} values")
        poly = second_moment_general(k) if args.second_moment else variance_general(k)
        for i, v in enumerate(args.lambda_vec, start=1):
            poly = substitute(poly, f"lambda{i}", v)
        if args.tau is None:
            payload["polynomial"] = poly.to_string()
        else:
            payload["value"] = poly.eval({"tau": args.tau})
    elif args.lambda_equal is None and args.tau is None:
        poly = second_moment_general(k) if args.second_moment else variance_general(k)
        payload["polynomial"] = poly.to_string()
    else:
        fn = second_moment_equal if args.second_moment else variance_equal
        lam_value = args.lambda_equal if args.lambda_equal is not None else "lambda"
        tau_value = args.tau if args.tau is not None else "tau"
        res = fn(k, lam_value, tau_value)
        if isinstance(res, MultiPoly):
            payload["polynomial"] = res.to_string()
        else:
            payload["value"] = res
    _emit_exact(payload, args.format, out)
    return 0


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("KHOP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError("KHOP_THREADS must be an integer") from exc
    return 1


def _sim_config(args, lam, n_samples, seed):
    from .simulator import SimConfig

    k = args.k
    if k < 2:
        raise UsageError("--k must be at least 2")
    if args.r <= 0:
        raise UsageError("--r must be positive")
    if not (k - 1) * args.r <= args.t < k * args.r:
        raise UsageError(f"--t must lie in [{(k - 1) * args.r}, {k * args.r}) for k={k}, r={args.r}")
    if n_samples < 0:
        raise UsageError("--samples must be nonnegative")
    if not 0 <= seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    try:
        return SimConfig(k, args.r, args.t, lam, n_samples=n_samples, seed=seed, threads=_threads(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def simulate_payload(args) -> tuple[dict, object]:
    from .hopcumulants import joint_cumulant_poly
    from .hopmoments import lambda_assignment
    from .simulator import SampleStats, simulate_counts

    lam = args.lambda_ if len(args.lambda_) > 1 else args.lambda_[0]
    cfg = _sim_config(args, lam, args.samples, args.seed)
    counts = simulate_counts(cfg)
    stats = SampleStats()
    stats.update(counts)
    payload = dict(stats.summary())
    tau_value = cfg.tau
    ref: dict = {"tau": tau_value}
    if cfg.k <= 5:
        assign = lambda_assignment(cfg.k, list(args.lambda_) if len(args.lambda_) > 1 else args.lambda_[0])
        assign[tau(1)] = tau_value
        for name, n in (("mean", 1), ("variance", 2), ("c3", 3), ("c4", 4)):
            ref[name] = joint_cumulant_poly(cfg.k, [n], strict=False).eval(assign)
    payload["reference"] = ref
    return payload, (cfg, counts)


def cmd_simulate(args, out) -> int:
    from .simulator import write_samples

    payload, (cfg, counts) = simulate_payload(args)
    if args.emit_samples:
        write_samples(args.emit_samples, cfg, counts)
    if args.format == "json":
        out.write(dumps(payload) + "\n")
    else:
        for key, val in payload.items():
            if key == "reference":
                for rk, rv in val.items():
                    out.write(f"reference.{rk}\t{frac_str(rv)}\n")
            else:
                out.write(f"{key}\t{val!r}\n")
    return 0


def cmd_clt(args, out) -> int:
    import math

    from .cltstats import RateSeries, normalize, ks_distance, wasserstein1, write_rate_csv
    from .simulator import simulate_counts

    lams = args.lambdas
    if len(lams) < 3:
        raise UsageError("--lambdas needs at least 3 values")
    if any(b <= a for a, b in zip(lams, lams[1:])) or lams[0] <= 0:
        raise UsageError("--lambdas must be positive and strictly increasing")
    series = RateSeries()
    if args.synthetic:
        c = float(args.synthetic_c)
        for lam in lams:
            d = c / math.sqrt(float(lam))
            series.add(float(lam), d, d, 0)
    else:
        for i, lam in enumerate(lams):
            cfg = _sim_config(args, lam, args.samples, args.seed + i)
            counts = simulate_counts(cfg)
            ns = normalize(counts, args.k, lam, args.t, args.r, provenance={"seed": args.seed + i})
            series.add(float(lam), ks_distance(ns), wasserstein1(ns), args.samples)
    series.fit()
    if args.out:
        write_rate_csv(series, args.out)
    else:
        write_rate_csv(series, out)
    print(f"slope_ks={series.slope_ks:.17g} slope_w1={series.slope_w1:.17g}",
          file=sys.stderr if not args.out else out)
    return 0


def cmd_check(args, out) -> int:
    from .checks import SUITES, run_suite

    if args.suite not in SUITES and args.suite != "all":
        raise UsageError(f"unknown suite {args.suite!r}")
    names = list(SUITES) if args.suite == "all" else [args.suite]
    failed = False
    for name in names:
        for res in run_suite(name, quick=args.quick):
            out.write(res.line() + "\n")
            out.flush()
            failed |= res.status == "FAIL"
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors: exit 2 with usage on stderr
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _add_exact_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, required=True, help="hop count")
    p.add_argument("--n", type=int, help="number of arguments, each with power one")
    p.add_argument("--powers", type=parse_int_list, help="powers n1,n2,... in chamber order")
    p.add_argument("--tau", dest="taus", type=parse_rational_list,
                   help="evaluation points v1,v2,... (ascending)")
    p.add_argument("--lambda", dest="lambda_vec", type=parse_rational_list,
                   help="per-cell intensities lambda_1,...,lambda_{k-1}")
    p.add_argument("--lambda-equal", type=parse_rational, help="common intensity")
    p.add_argument("--tau-equal", action="store_true", help="collapse all arguments to one tau")
    p.add_argument("--symbolic", action="store_true", help="print the polynomial")
    p.add_argument("--no-limits", action="store_true", help="lift the desk-scale size limits")
    p.add_argument("--format", choices=["text", "json"], default="text")


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=parse_rational, default=Fraction(1))
    p.add_argument("--t", type=parse_rational, required=True)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $KHOP_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="khop", description="Exact moments and cumulants of k-hop counts, "
                     "plus Monte Carlo checks.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("moments", help="joint moments")
    _add_exact_flags(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("cumulants", help="joint cumulants")
    _add_exact_flags(p)
    p.set_defaults(func=cmd_cumulants)

    p = sub.add_parser("variance", help="closed-form variance")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--tau", type=parse_rational)
    p.add_argument("--lambda", dest="lambda_equal", type=parse_rational)
    p.add_argument("--lambda-vec", type=parse_rational_list)
    p.add_argument("--asymptotic", action="store_true")
    p.add_argument("--second-moment", action="store_true")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_variance)

    p = sub.add_parser("simulate", help="Monte Carlo sample statistics")
    _add_sim_flags(p)
    p.add_argument("--lambda", dest="lambda_", type=parse_rational_list, required=True,
                   help="intensity, or one value per cell")
    p.add_argument("--emit-samples", metavar="PATH")
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("clt", help="distance-to-normal rate experiment")
    _add_sim_flags(p)
    p.add_argument("--lambdas", type=parse_rational_list, default=[Fraction(x) for x in (25, 50, 100, 200, 400)])
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--synthetic", action="store_true",
                   help="skip sampling and use distances c/sqrt(lambda)")
    p.add_argument("--synthetic-c", type=parse_rational, default=Fraction(1))
    p.set_defaults(func=cmd_clt)

    p = sub.add_parser("check", help="run a verification suite")
    p.add_argument("--suite", default="all", choices=["tables", "oracles", "bounds", "mc", "all"])
    p.add_argument("--quick", action="store_true", help="smaller Monte Carlo runs")
    p.set_defaults(func=cmd_check)
    return parser


def run(argv: Sequence[str] | None = None, out=None) -> int:
    """Parse ``argv`` and dispatch; returns the exit code."""
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"khop: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OverflowError) as exc:
        print(f"khop: error: {exc}", file=sys.stderr)
        return 2


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()
