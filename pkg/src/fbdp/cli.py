"""Command-line front end.

Every run emits a manifest (all inputs, seed, package version) either as
a JSON sidecar next to the output file or inline in JSON output mode.
Identical manifests produce byte-identical primary outputs regardless of
worker count.
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from .errors import FbdpError
from .linear import (LinearParams, p1j_classical, qld_linear,
                     supercritical_tail, survival_classical,
                     survival_fractional, tail_constant_subcritical)
from .mlf import ml_eval, ml_survival
from .model import RateSchedule, load_rates_csv
from .paths import estimate_pmf
from .quasi import qld_coefficients, qld_limit_check, qsd_classify, qsd_solve
from .spectral import decompose_rates, survival_prob, transition_prob
from .stable import RngStream, sample_stable_batch

__all__ = ["run", "main"]


def _manifest(args, command):
    skip = {"func", "out", "json_out", "config", "command"}
    inputs = {k: v for k, v in sorted(vars(args).items())
              if k not in skip and v is not None}
    return {"command": command, "version": __version__, "inputs": inputs}


def _emit(args, rows, header, manifest):
    """Write rows as CSV (plus manifest sidecar) or JSON to stdout."""
    if getattr(args, "json_out", False):
        def coerce(v):
            if isinstance(v, str):
                try:
                    return int(v) if v.lstrip("-").isdigit() else float(v)
                except ValueError:
                    return v
            return v

        payload = {"manifest": manifest,
                   "rows": [{k: coerce(v) for k, v in zip(header, r)}
                            for r in rows]}
        text = json.dumps(payload, indent=2, sort_keys=True)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        return
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _rates_from(args):
    if getattr(args, "rates_file", None):
        return load_rates_csv(args.rates_file)
    if args.lam is None or args.mu is None:
        raise FbdpError("provide --lambda and --mu, or --rates-file")
    return RateSchedule.linear(args.lam, args.mu)


def _fmt(x):
    return format(float(x), ".17g")


def _cmd_ml_eval(args):
    if args.x is not None:
        value = ml_eval(args.alpha, args.x)
        rows = [[_fmt(args.alpha), _fmt(args.x), _fmt(value)]]
        header = ["alpha", "x", "value"]
    elif args.theta is not None and args.t is not None:
        value = ml_survival(args.alpha, args.theta, args.t[0])
        rows = [[_fmt(args.alpha), _fmt(args.theta), _fmt(args.t[0]),
                 _fmt(value)]]
        header = ["alpha", "theta", "t", "value"]
    else:
        raise FbdpError("provide --x, or --theta together with --t")
    if not args.out and not args.json_out:
        print(_fmt(value))
        return 0
    _emit(args, rows, header, _manifest(args, "ml-eval"))
    return 0


def _cmd_sample_stable(args):
    rng = RngStream(args.seed, 0)
    draws = sample_stable_batch(args.alpha, args.n, rng)
    rows = [[_fmt(v)] for v in draws]
    _emit(args, rows, ["draw"], _manifest(args, "sample-stable"))
    return 0


def _cmd_simulate(args):
    rates = _rates_from(args)
    rows = []
    for t in args.t:
        pmf = estimate_pmf(args.method, rates, args.alpha, args.i0, t,
                           args.n_paths, args.seed, workers=args.workers)
        for state in sorted(pmf.mass):
            rows.append([_fmt(t), state, _fmt(pmf.mass[state]),
                         _fmt(pmf.stderr[state]), pmf.n_paths, args.method])
    _emit(args, rows, ["t", "state", "probability", "stderr",
                       "n_paths", "method"], _manifest(args, "simulate"))
    return 0


def _cmd_transition(args):
    rates = _rates_from(args)
    dec = decompose_rates(rates, args.M, args.boundary + "_at_M")
    rows = [[args.i, args.j, _fmt(t),
             _fmt(transition_prob(dec, args.alpha, args.i, args.j, t))]
            for t in args.t]
    _emit(args, rows, ["i", "j", "t", "p"], _manifest(args, "transition"))
    return 0


def _cmd_survival(args):
    rates = _rates_from(args)
    dec = decompose_rates(rates, args.M, args.boundary + "_at_M")
    rows = [[args.i, _fmt(t),
             _fmt(survival_prob(dec, args.alpha, args.i, t))]
            for t in args.t]
    _emit(args, rows, ["i", "t", "survival"], _manifest(args, "survival"))
    return 0


def _cmd_qld(args):
    rates = _rates_from(args)
    result = qld_coefficients(rates, args.i0, args.nmax)
    if not result.exists:
        raise FbdpError("no quasi-limiting distribution: " + result.reason)
    rows = [[n + 1, _fmt(result.coefficients[n]), _fmt(result.pmf[n])]
            for n in range(args.nmax)]
    if args.check_t is not None:
        dec = decompose_rates(rates, max(args.nmax, 200))
        checked = qld_limit_check(dec, args.alpha, args.i0, 1, [args.check_t])
        print(f"# spectral conditional mass at state 1, t={args.check_t}: "
              f"{_fmt(checked[0])}", file=sys.stderr)
    _emit(args, rows, ["n", "coefficient", "pmf"], _manifest(args, "qld"))
    return 0


def _cmd_qsd(args):
    rates = _rates_from(args)
    if args.theta is None and args.theta_scan is None:
        raise FbdpError("provide --theta or --theta-scan lo:hi:steps")
    manifest = _manifest(args, "qsd")
    classification = qsd_classify(rates)
    if args.theta_scan:
        lo, hi, steps = args.theta_scan.split(":")
        grid = np.linspace(float(lo), float(hi), int(steps))
        outcomes = [(th, qsd_solve(rates, th, args.nmax).outcome)
                    for th in grid]
        rows = [[_fmt(th), oc] for th, oc in outcomes]
        header = ["theta", "outcome"]
        sidecar = {"classification": classification, "manifest": manifest}
    else:
        result = qsd_solve(rates, args.theta, args.nmax)
        rows = [[j + 1, _fmt(result.nu[j])] for j in range(len(result.nu))]
        header = ["j", "nu"]
        sidecar = {"classification": classification,
                   "outcome": result.outcome,
                   "residual": result.residual, "manifest": manifest}
    _emit(args, rows, header, manifest)
    if args.out:
        with open(args.out + ".classification.json", "w",
                  encoding="utf-8") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        print("# classification: " + classification, file=sys.stderr)
    return 0


def _cmd_linear(args):
    params = LinearParams(args.lam, args.mu)
    what = args.what
    if what == "survival":
        rows = [[_fmt(t), _fmt(survival_fractional(params, args.alpha, t)
                               if args.alpha < 1.0
                               else survival_classical(params, t))]
                for t in args.t]
        header = ["t", "survival"]
    elif what == "p1j":
        rows = [[args.j, _fmt(t), _fmt(p1j_classical(params, args.j, t))]
                for t in args.t]
        header = ["j", "t", "p"]
    elif what == "qld":
        result = qld_linear(params, args.i0, args.nmax)
        if not result.exists:
            raise FbdpError(result.reason)
        rows = [[n + 1, _fmt(result.pmf[n])] for n in range(args.nmax)]
        header = ["n", "pmf"]
    else:  # tail
        if params.regime == "subcritical":
            rows = [["tail_constant",
                     _fmt(tail_constant_subcritical(params, args.alpha))]]
        elif params.regime == "supercritical":
            limit, rate = supercritical_tail(params, args.alpha)
            rows = [["limit", _fmt(limit)], ["rate", _fmt(rate)]]
        else:
            raise FbdpError("critical regime has no polynomial tail constant")
        header = ["quantity", "value"]
    _emit(args, rows, header, _manifest(args, "linear"))
    return 0


def _cmd_selfcheck(args):
    import math
    failures = []

    def check(name, ok):
        print(("PASS " if ok else "FAIL ") + name)
        if not ok:
            failures.append(name)

    check("ml exponential case",
          abs(ml_eval(1.0, -1.0) - math.exp(-1.0)) < 1e-15)
    check("ml half-order value",
          abs(ml_eval(0.5, -1.0) - 0.427583576155807) < 1e-12)
    rng = RngStream(1234, 0)
    draws = sample_stable_batch(0.5, 50000, rng)
    check("stable transform",
          abs(np.mean(np.exp(-draws)) - math.exp(-1.0)) < 0.01)
    rates = RateSchedule.linear(0.5, 1.0)
    dec = decompose_rates(rates, 60)
    check("spectral kronecker",
          abs(transition_prob(dec, 0.7, 1, 1, 0.0) - 1.0) < 1e-8)
    row_sum = sum(transition_prob(dec, 0.7, 1, j, 2.0)
                  for j in range(1, 61))
    check("mass conservation",
          abs(survival_prob(dec, 0.7, 1, 2.0) - row_sum) < 1e-9)
    pm_r = estimate_pmf("renewal", rates, 0.7, 1, 2.0, 20000, 7,
                        workers=args.workers)
    pm_t = estimate_pmf("timechange", rates, 0.7, 1, 2.0, 20000, 8,
                        workers=args.workers)
    check("simulator equivalence", pm_r.tv_distance(pm_t) < 0.03)
    qld = qld_coefficients(rates, 1, 60)
    check("yaglom closed form",
          abs(qld.prob(1) - 1.0 / (2.0 * math.log(2.0))) < 1e-9)
    res = qsd_solve(rates, dec.thetas[0], 200)
    check("qsd at spectral bottom",
          res.outcome == "qsd" and res.residual < 1e-8)
    if failures:
        print(f"{len(failures)} check(s) failed")
        return 1
    print("all checks passed")
    return 0


def _add_common(sp, rates=False, alpha=True):
    sp.add_argument("--out", help="output file (CSV; manifest sidecar)")
    sp.add_argument("--json", dest="json_out", action="store_true",
                    help="JSON output instead of CSV")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    if alpha:
        sp.add_argument("--alpha", type=float, required=True)
    if rates:
        sp.add_argument("--lambda", dest="lam", type=float)
        sp.add_argument("--mu", type=float)
        sp.add_argument("--rates-file")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fbdp",
        description="Time-fractional birth-and-death process toolkit")
    parser.add_argument("--version", action="version",
                        version=f"fbdp {__version__}")
    parser.add_argument("--config",
                        help="key = value file; flags take precedence")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ml-eval", help="evaluate the Mittag-Leffler kernel")
    _add_common(sp)
    sp.add_argument("--x", type=float)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--t", type=float, action="append")
    sp.set_defaults(func=_cmd_ml_eval)

    sp = sub.add_parser("sample-stable", help="draw one-sided stable variates")
    _add_common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.set_defaults(func=_cmd_sample_stable)

    sp = sub.add_parser("simulate", help="Monte Carlo marginal estimation")
    _add_common(sp, rates=True)
    sp.add_argument("--method", choices=["renewal", "timechange"],
                    required=True)
    sp.add_argument("--i0", type=int, required=True)
    sp.add_argument("--t", type=float, action="append", required=True)
    sp.add_argument("--n-paths", type=int, required=True)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("transition", help="spectral transition probability")
    _add_common(sp, rates=True)
    sp.add_argument("--i", type=int, required=True)
    sp.add_argument("--j", type=int, required=True)
    sp.add_argument("--t", type=float, action="append", required=True)
    sp.add_argument("--M", type=int, default=200)
    sp.add_argument("--boundary", choices=["reflect", "absorb"],
                    default="reflect")
    sp.set_defaults(func=_cmd_transition)

    sp = sub.add_parser("survival", help="spectral survival probability")
    _add_common(sp, rates=True)
    sp.add_argument("--i", type=int, required=True)
    sp.add_argument("--t", type=float, action="append", required=True)
    sp.add_argument("--M", type=int, default=200)
    sp.add_argument("--boundary", choices=["reflect", "absorb"],
                    default="reflect")
    sp.set_defaults(func=_cmd_survival)

    sp = sub.add_parser("qld", help="quasi-limiting distribution")
    _add_common(sp, rates=True)
    sp.add_argument("--i0", type=int, required=True)
    sp.add_argument("--nmax", type=int, required=True)
    sp.add_argument("--check-t", type=float,
                    help="also report the spectral conditional value")
    sp.set_defaults(func=_cmd_qld)

    sp = sub.add_parser("qsd", help="quasi-stationary distribution")
    _add_common(sp, rates=True, alpha=False)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--theta-scan", help="lo:hi:steps")
    sp.add_argument("--nmax", type=int, required=True)
    sp.set_defaults(func=_cmd_qsd)

    sp = sub.add_parser("linear", help="linear-process closed forms")
    _add_common(sp)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--t", type=float, action="append", default=None)
    sp.add_argument("--what", choices=["survival", "p1j", "qld", "tail"],
                    required=True)
    sp.add_argument("--j", type=int, default=1)
    sp.add_argument("--i0", type=int, default=1)
    sp.add_argument("--nmax", type=int, default=60)
    sp.set_defaults(func=_cmd_linear)

    sp = sub.add_parser("selfcheck", help="run the embedded invariant suite")
    _add_common(sp, alpha=False)
    sp.set_defaults(func=_cmd_selfcheck)
    return parser


def _apply_config(parser, argv):
    """Read key = value lines and inject them as defaults before parsing."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    path = argv[idx + 1]
    overrides = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            overrides += ["--" + key.strip().replace("_", "-"),
                          value.strip()]
    # flags given on the command line win: config keys go first
    head = argv[:idx] + argv[idx + 2:]
    if not head:
        return head
    return [head[0]] + overrides + head[1:]


def run(argv):
    parser = _build_parser()
    argv = _apply_config(parser, list(argv))
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FbdpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
