"""``tukey-dp`` command line: estimate, experiment, bench, account.

Exit codes: 0 on success, 2 on usage or data errors, 3 when the mechanism
returns FAIL.
"""

import argparse
import csv
import json
import math
import multiprocessing as mp
import os
import sys
import time

from . import __version__
from .depth import DEPTH_KINDS, DatasetError, DegeneracyError, load_dataset
from .geometry import EmptyPolytopeError, UnboundedPolytopeError
from .mechanisms import (account, approx_privacy_accounting, boxem_estimate, gaussian_mechanism,
                         quantile_em_univariate, rem_estimate, split_privacy_budget)
from .mechanisms.exponential import ENGINES
from .mechanisms.result import ESTIMATE, MechanismResult
from .presets import PRESETS, run_preset
from .randcore import SEED_ENV_VAR, ParameterError, RandomSource
from .simulate import gen_gaussian_data

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 2, 3
CLI_MECHANISMS = ("rem", "boxem", "gauss", "quantile-em")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env in (None, ""):
        return None
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"${SEED_ENV_VAR} must be an integer, got {env!r}") from None


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _mechanism_flags(p, defaults=True):
    d = (lambda v: v) if defaults else (lambda v: None)
    p.add_argument("--depth", choices=DEPTH_KINDS, default=d(None))
    p.add_argument("-k", type=int, default=d(30), help="number of random directions")
    p.add_argument("--engine", choices=ENGINES, default=d("exact"))
    p.add_argument("--eps", type=float, default=d(1.0))
    p.add_argument("--delta", type=float, default=d(1e-6))
    p.add_argument("-R", type=float, default=d(None), help="box / clipping radius")
    p.add_argument("-t", type=int, default=None, help="REM depth threshold (default n // 4)")
    p.add_argument("--steps", type=int, default=None, help="hit-and-run steps")
    p.add_argument("--samples-per-level", type=int, default=d(10_000))
    p.add_argument("--seed", type=int, default=None, help=f"seed (else ${SEED_ENV_VAR}, else secure)")
    p.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser():
    parser = _Parser(prog="tukey-dp", description="Private mean estimation with Tukey depth.")
    parser.add_argument("--version", action="version", version=f"tukey-dp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", help="run one mechanism on a headerless CSV dataset")
    p.add_argument("data", help="CSV path, one point per row")
    p.add_argument("--mechanism", choices=CLI_MECHANISMS, default="boxem")
    _mechanism_flags(p)

    p = sub.add_parser("experiment", help="run a named sweep and write CSV")
    p.add_argument("preset", choices=sorted(PRESETS))
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--with-time", action="store_true", help="include per-trial wall time")
    p.add_argument("--quiet", action="store_true")
    _mechanism_flags(p, defaults=False)

    p = sub.add_parser("bench", help="wall time of one mechanism call per (n, d) cell")
    p.add_argument("--n", default="50,100,200", help="comma-separated sample sizes")
    p.add_argument("--d", default="2,3", help="comma-separated dimensions")
    p.add_argument("--mechanism", choices=("rem", "boxem"), default="boxem")
    p.add_argument("--timeout", type=float, default=600.0, help="seconds per cell")
    _mechanism_flags(p)

    p = sub.add_parser("account", help="budget split and total guarantee")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--mode", choices=("exact", "approx"), default="approx")
    for name in ("eta", "beta", "tau", "zeta"):
        p.add_argument(f"--{name}", type=float, default=None, help=f"override {name}")
    p.add_argument("--out", default=None)
    return parser


def _estimate_result(args, x, rng):
    n, d = x.shape
    mech = args.mechanism
    if mech == "rem":
        return rem_estimate(x, args.eps, args.delta, t=args.t, depth=args.depth or "random",
                            k=args.k, engine=args.engine, rng=rng, R=args.R,
                            samples_per_level=args.samples_per_level, steps=args.steps)
    R = 10.0 if args.R is None else args.R
    if mech == "boxem":
        return boxem_estimate(x, args.eps, R, depth=args.depth or "exact", k=args.k,
                              engine=args.engine, rng=rng, samples_per_level=args.samples_per_level,
                              steps=args.steps)
    if mech == "gauss":
        y = gaussian_mechanism(x, args.eps, args.delta, R, rng)
        return MechanismResult(ESTIMATE, estimate=y, params={"eps": args.eps, "delta": args.delta,
                                                             "R": R, "n": n, "d": d}, seed=rng.seed)
    if d != 1:
        raise UsageError(f"quantile-em needs univariate data, got d={d}")
    y = quantile_em_univariate(x, args.eps, R, rng)
    return MechanismResult(ESTIMATE, estimate=[y], params={"eps": args.eps, "R": R, "n": n},
                           seed=rng.seed)


def cmd_estimate(args):
    try:
        x = load_dataset(args.data)
    except OSError as exc:
        raise UsageError(f"cannot read {args.data}: {exc.strerror or exc}") from None
    rng = RandomSource(_seed(args))
    res = _estimate_result(args, x, rng)
    fh, close = _open_out(args.out)
    try:
        fh.write(res.to_json() + "\n")
    finally:
        if close:
            fh.close()
    return EXIT_FAIL if res.failed else EXIT_OK


def cmd_experiment(args):
    over = dict(eps=args.eps, delta=args.delta, R=args.R, trials=args.trials, depth=args.depth,
                k=args.k, engine=args.engine, t=args.t, steps=args.steps,
                samples_per_level=args.samples_per_level, seed=_seed(args))

    def progress(x_name, x, rep):
        if not args.quiet:
            agg = rep.aggregate["privacy_error"]
            print(f"{x_name}={x} {rep.config.mechanism}: privacy_error={agg['mean']:.4g}"
                  f" +/- {agg['ci95']:.3g} {rep.note}", file=sys.stderr)

    fh, close = _open_out(args.out)
    try:
        run_preset(args.preset, fh, progress=progress, with_time=args.with_time, **over)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _bench_cell(conn, mech, n, d, kw, seed):
    try:
        root = RandomSource(seed)
        x, _ = gen_gaussian_data(n, d, rng=root.spawn(n, d, 0))
        rng = root.spawn(n, d, 1)
        start = time.perf_counter()
        if mech == "rem":
            rem_estimate(x, rng=rng, **kw["rem"])
        else:
            boxem_estimate(x, rng=rng, **kw["boxem"])
        conn.send(("ok", time.perf_counter() - start))
    except Exception as exc:
        conn.send(("error", f"{type(exc).__name__}: {exc}"))
    finally:
        conn.close()


def run_cell(mech, n, d, kw, seed, timeout):
    """Seconds for one call in a child process, or ``None`` on timeout."""
    recv, send = mp.Pipe(duplex=False)
    proc = mp.Process(target=_bench_cell, args=(send, mech, n, d, kw, seed), daemon=True)
    proc.start()
    send.close()
    ready = recv.poll(timeout)
    if not ready:
        proc.terminate()
        proc.join()
        return None, "timeout"
    status, value = recv.recv()
    proc.join()
    if status == "ok":
        return value, ""
    return math.nan, value


def _int_list(s, name):
    try:
        vals = [int(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{name} must be comma-separated integers, got {s!r}") from None
    if not vals or min(vals) < 1:
        raise UsageError(f"--{name} needs positive integers")
    return vals


def cmd_bench(args):
    ns, ds = _int_list(args.n, "n"), _int_list(args.d, "d")
    depth = args.depth or "random"
    if depth == "exact" and max(ds) > 4:
        raise UsageError("exact depth is capped at d <= 4; use --depth random or axis")
    R = 10.0 if args.R is None else args.R
    common = dict(depth=depth, k=args.k, engine=args.engine,
                  samples_per_level=args.samples_per_level, steps=args.steps)
    kw = {"rem": dict(common, eps=args.eps, delta=args.delta, t=args.t, R=args.R),
          "boxem": dict(common, eps=args.eps, R=R)}
    seed = _seed(args)
    fh, close = _open_out(args.out)
    try:
        fh.write(f"# tukey-dp v{__version__} preset=bench\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mechanism", "depth", "k", "engine", "n", "d", "seconds", "note"])
        for d in ds:
            for n in ns:
                secs, note = run_cell(args.mechanism, n, d, kw, seed, args.timeout)
                cell = "-" if secs is None else ("" if math.isnan(secs) else f"{secs:.4g}")
                w.writerow([args.mechanism, depth, args.k if depth == "random" else "", args.engine,
                            n, d, cell, note])
                fh.flush()
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_account(args):
    params = split_privacy_budget(args.eps, args.delta, args.mode)
    extras = {k: getattr(args, k) for k in ("eta", "beta", "tau", "zeta")
              if getattr(args, k) is not None}
    if extras:
        vals = {k: getattr(params, k) or 0.0 for k in ("eta", "beta", "tau", "zeta")}
        vals.update(extras)
        totals = {form: approx_privacy_accounting(params.eps_p, params.eps_e, params.delta_p,
                                                  params.delta_e, form=form, **vals)
                  for form in ("conditioning", "closed")}
    else:
        totals = {form: account(params, form) for form in ("conditioning", "closed")}
    out = {"split": params.to_dict(), "overrides": extras,
           "total": {form: {"eps": e, "delta": dl} for form, (e, dl) in totals.items()}}
    fh, close = _open_out(args.out)
    try:
        fh.write(json.dumps(out, sort_keys=True) + "\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


COMMANDS = {"estimate": cmd_estimate, "experiment": cmd_experiment, "bench": cmd_bench,
            "account": cmd_account}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ParameterError, DatasetError, DegeneracyError, UnboundedPolytopeError,
            EmptyPolytopeError) as exc:
        print(f"tukey-dp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
