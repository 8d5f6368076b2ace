"""``fracwalk`` command line.

Every subcommand writes one report, CSV or JSON, to ``--out`` (stdout by
default).  JSON reports carry the resolved configuration; for CSV output
it goes to stderr.  Exit codes: 0 success, 1 failed check, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import acceptance, ancestry, diagnostics, fbm, renewal, walk
from .io import csv_text, json_text, to_plain, write_text
from .laws import LawError, TailLaw, parse_law
from .seeding import default_threads, resolve_seed

__all__ = ["main", "run", "build_parser"]


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        return [int(float(v)) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _count(text):
    v = float(text)
    if v != int(v) or v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(v)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(sp, *, law=True, p=False, n=False, n_list=False, reps=None, fmt="json"):
    if law:
        sp.add_argument("--law", default="power:alpha=0.25",
                        help="power:alpha=A | logpow:alpha=A,beta=B | finite:w1,w2,... | delta1")
    if p:
        sp.add_argument("--p", type=float, default=0.5, help="colour probability")
    if n:
        # a required --n is checked after parsing so that --config can supply it
        sp.add_argument("--n", type=_count, default=None if n == "required" else 1024)
    if n_list:
        sp.add_argument("--n-list", type=_int_list, default=[64, 256, 1024])
    if reps is not None:
        sp.add_argument("--reps", type=_count, default=reps)
    sp.add_argument("--seed", type=int, default=None, help="master seed (drawn and printed if omitted)")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker threads (default FRACWALK_THREADS or CPU count)")
    sp.add_argument("--out", default=None, help="output path (default stdout)")
    sp.add_argument("--format", choices=["csv", "json"], default=fmt)
    sp.add_argument("--config", default=None, help="JSON file with default flag values")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracwalk", description="Fractional random walk toolkit.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    sp = sub.add_parser("renewal", help="renewal sequence, autocorrelations and constants")
    _common(sp, n="required", fmt="csv")
    sp.add_argument("--table", choices=["q", "corr", "variance"], default="q")
    sp.add_argument("--p", type=float, default=0.5)

    sp = sub.add_parser("variance", help="MC variance of S_n against the exact formula")
    _common(sp, p=True, n_list=True, reps=20000)
    sp.add_argument("--B-factor", type=_count, default=8, help="burn-in depth as a multiple of n")

    sp = sub.add_parser("simulate", help="one path of the Gibbs sampler or the adjusted walk")
    _common(sp, p=True, n=True, fmt="csv")
    sp.add_argument("--B", type=_count, default=None, help="burn-in depth (default 8n)")
    sp.add_argument("--replica", type=int, default=0)
    sp.add_argument("--adjusted", action="store_true", help="half-line walk with fresh fair coins")

    sp = sub.add_parser("rescale", help="rescaled walk on a time grid")
    _common(sp, p=True, n=True, reps=1, fmt="csv")
    sp.add_argument("--B", type=_count, default=None)
    sp.add_argument("--grid", type=_float_list, default=[0.25, 0.5, 0.75, 1.0])

    sp = sub.add_parser("meet", help="meeting probability of two ancestral lines")
    _common(sp, reps=100000)
    sp.add_argument("--k", type=_count, default=1)
    sp.add_argument("--depth", type=_int_list, default=[100, 10000, 1000000])

    sp = sub.add_parser("components", help="components of the graph meeting {1..n}")
    _common(sp, n=True, reps=1000)
    sp.add_argument("--depth", type=_count, default=None, help="window depth below 0 (default 8n)")

    sp = sub.add_parser("hurst", help="Hurst exponent from a variance curve")
    _common(sp, p=True, n_list=True, reps=10000)
    sp.add_argument("--exact", action="store_true", help="use the exact variance formula, no MC")

    sp = sub.add_parser("fgn", help="exact fractional Gaussian noise")
    _common(sp, law=False, n=True, reps=1, fmt="csv")
    sp.add_argument("--H", type=float, default=None, help="Hurst parameter")
    sp.add_argument("--alpha", type=float, default=None, help="use H = alpha + 1/2")
    sp.add_argument("--table", choices=["paths", "gamma"], default="paths")

    sp = sub.add_parser("fkg", help="covariances of increasing functionals")
    _common(sp, p=True, n=True, reps=20000)
    sp.add_argument("--functionals", default=",".join(diagnostics.FUNCTIONALS))
    sp.add_argument("--sigma", type=float, default=3.0)
    sp.add_argument("--B", type=_count, default=None)

    sp = sub.add_parser("maxstats", help="tail of the running maximum A_{0,n}")
    _common(sp, p=True, n=True, reps=10000)
    sp.add_argument("--theta", type=_float_list, default=[0.0, 0.5, 1.0, 2.0, 4.0])
    sp.add_argument("--B", type=_count, default=None)

    sp = sub.add_parser("suite", help="run the acceptance suite")
    sp.add_argument("--only", type=_int_list, default=None, help="criterion numbers")
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.add_argument("--format", choices=["json"], default="json")
    sp.add_argument("--config", default=None)
    return parser


def _config_defaults(argv):
    """Flag defaults from ``--config`` (keys as flag names, dashes or underscores)."""
    if "--config" not in argv and not any(a.startswith("--config=") for a in argv):
        return {}
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        with open(known.config, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config!r}: {exc}")
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items() if k != "command"}


def _coerce(action, value):
    """Apply a flag's type to a config value; scalars become one-element lists."""
    if action.type in (_int_list, _float_list):
        if isinstance(value, list):
            return action.type(",".join(str(v) for v in value))
        return action.type(str(value))
    if isinstance(value, str) and action.type is not None:
        return action.type(value)
    return value


def _parse(argv):
    parser = build_parser()
    defaults = _config_defaults(argv)
    if defaults:
        cmd = next((a for a in argv if not a.startswith("-")), None)
        sub = parser._subparsers._group_actions[0].choices.get(cmd)
        if sub is None:
            raise UsageError("a subcommand is required")
        actions = {a.dest: a for a in sub._actions}
        unknown = sorted(set(defaults) - set(actions))
        if unknown:
            raise UsageError(f"unknown config keys: {unknown}")
        try:
            sub.set_defaults(**{k: _coerce(actions[k], v) for k, v in defaults.items()})
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"bad config value: {exc}")
    return parser.parse_args(argv)


def _config(args, **extra):
    cfg = {k: v for k, v in vars(args).items() if k not in ("out", "config", "threads", "format")}
    cfg.update(extra)
    return to_plain(cfg)


def _emit(args, cfg, table=None, report=None):
    """Write a CSV table or a JSON report; CSV runs echo the config on stderr."""
    if args.format == "csv":
        if table is None:
            raise UsageError(f"{args.command} has no CSV table; use --format json")
        header, rows = table
        write_text(csv_text(header, rows), args.out)
        print("config: " + json.dumps(to_plain(cfg), sort_keys=True), file=sys.stderr)
    else:
        body = {"config": cfg}
        body.update(report or {})
        if table is not None and "rows" not in body:
            header, rows = table
            body["columns"] = list(header)
            body["rows"] = [list(r) for r in rows]
        write_text(json_text(body), args.out)


def _law(args):
    return parse_law(args.law)


def _cmd_renewal(args):
    if args.n is None:
        raise UsageError("renewal: --n is required")
    law = _law(args)
    seq = renewal.renewal_sequence(law, args.n)
    sq, tail = renewal.q_square_sum(seq)
    consts = {"q_square_sum": sq, "q_square_tail": tail}
    corr = None
    # constants only appear in JSON; a CSV q table does not need them
    wanted = args.table != "q" or args.format == "json"
    if wanted and isinstance(law, TailLaw) and law.alpha < 0.5:
        corr = diagnostics.correlations_for(law, args.n)
        consts.update(alpha=law.alpha, c0=corr.c0, K_alpha=renewal.k_alpha(law.alpha),
                      variance_constant=renewal.variance_constant(law.alpha),
                      c_tilde=renewal.c_tilde(law, args.p, corr), J=corr.J,
                      converged=corr.converged)
    cfg = _config(args, law=law.to_dict())
    if args.table == "q":
        table = (["n", "q"], ((i, float(v)) for i, v in enumerate(seq.q)))
    elif corr is None:
        raise UsageError("--table corr/variance needs a law with alpha < 1/2")
    elif args.table == "corr":
        c = corr.values[:args.n + 1]
        table = (["i", "c", "trunc_error"],
                 ((i, float(c[i]), float(corr.trunc_error[i])) for i in range(len(c))))
    else:
        ns = np.arange(1, args.n + 1)
        ex = renewal.exact_variance(args.p, corr, ns)
        asy = renewal.asymptotic_variance(law, args.p, corr, ns)
        table = (["n", "exact_var", "asymptotic_var", "ratio"],
                 ((int(m), float(e), float(a), float(e / a)) for m, e, a in zip(ns, ex, asy)))
    table = (table[0], list(table[1]))
    _emit(args, cfg, table, {"constants": consts} if args.format == "json" else None)
    return 0


def _report_table(rep):
    keys = ["key", "mc_estimate", "stderr", "exact", "asymptote", "budget", "z_score", "pass"]
    return keys, [[r[k] for k in keys] for r in rep.rows]


def _cmd_variance(args):
    law = _law(args)
    seed = resolve_seed(args.seed)
    rep = diagnostics.variance_compare(law, args.p, args.n_list, args.reps, seed,
                                       args.B_factor, args.threads)
    _emit(args, _config(args, seed=seed, law=law.to_dict()), _report_table(rep), rep.to_dict())
    return 0


def _cmd_simulate(args):
    law = _law(args)
    seed = resolve_seed(args.seed)
    if args.adjusted:
        path = walk.sample_adjusted_walk(law, args.n, seed, args.replica)
    else:
        path = walk.sample_gibbs_increments(law, args.p, args.n, args.B, seed, args.replica)
    rows = [(i, int(path.increments[i - 1]) if i else 0, int(path.positions[i]))
            for i in range(args.n + 1)]
    _emit(args, _config(args, seed=seed, law=law.to_dict()), (["i", "X", "S"], rows),
          {"diagnostics": path.diagnostics.to_dict()})
    return 0


def _cmd_rescale(args):
    law = _law(args)
    seed = resolve_seed(args.seed)
    cfg = _config(args, seed=seed, law=law.to_dict())
    if args.reps == 1:
        corr = diagnostics.correlations_for(law, 1024)
        ct = renewal.c_tilde(law, args.p, corr)
        path = walk.sample_gibbs_increments(law, args.p, args.n, args.B, seed)
        res = walk.rescale(path, law, ct, args.n, args.grid)
        _emit(args, dict(cfg, c_tilde=ct), (["t", "value"], list(zip(res.t.tolist(), res.values.tolist()))),
              {"diagnostics": path.diagnostics.to_dict()})
        return 0
    times = sorted(t for t in set(args.grid) if t > 0)
    pairs = [(s, t) for i, s in enumerate(times) for t in times[i:]]
    rep = diagnostics.covariance_compare(law, args.p, args.n, pairs, args.reps, seed,
                                         args.B, args.threads)
    _emit(args, cfg, _report_table(rep), rep.to_dict())
    return 0


def _cmd_meet(args):
    law = _law(args)
    seed = resolve_seed(args.seed)
    ests = ancestry.meeting_scan(law, args.k, args.depth, args.reps, seed, args.threads)
    rho = math.nan
    if isinstance(law, TailLaw) and law.alpha < 0.5:
        rho = float(diagnostics.correlations_for(law, max(64, args.k)).rho(args.k))
    rows = [(e.k, e.depth, e.estimate, e.ci, rho) for e in ests]
    rep = {"estimate": ests[-1].estimate, "ci": ests[-1].ci, "rho_exact": rho,
           "scan": [dict(zip(["k", "depth", "estimate", "ci", "rho_exact"], r)) for r in rows]}
    _emit(args, _config(args, seed=seed, law=law.to_dict()),
          (["k", "depth", "estimate", "ci", "rho_exact"], rows), rep)
    return 0


def _cmd_components(args):
    law = _law(args)
    seed = resolve_seed(args.seed)
    depth = 8 * args.n if args.depth is None else args.depth
    counts = ancestry.component_counts(law, args.n, depth, args.reps, seed, args.threads)
    rows = [(r, int(c[0]), int(c[1])) for r, c in enumerate(counts)]
    rep = {"mean_components": float(counts[:, 0].mean()),
           "one_component_frequency": float(np.mean(counts[:, 0] == 1))}
    _emit(args, _config(args, seed=seed, depth=depth, law=law.to_dict()),
          (["replica", "components", "exiting"], rows), rep)
    return 0


def _cmd_hurst(args):
    law = _law(args)
    ns = sorted(args.n_list)
    if args.exact:
        corr = diagnostics.correlations_for(law, ns[-1])
        curve = [(n, float(renewal.exact_variance(args.p, corr, n))) for n in ns]
        cfg = _config(args, law=law.to_dict())
    else:
        seed = resolve_seed(args.seed)
        curve = []
        for i, n in enumerate(ns):
            ens = walk.gibbs_ensemble(law, args.p, n, args.reps,
                                      lambda x: (float(x.sum(dtype=np.int64)),), 1,
                                      seed=seed + i, threads=args.threads, risk_reps=0)
            curve.append((n, float(np.var(ens.stats[:, 0], ddof=1))))
        cfg = _config(args, seed=seed, law=law.to_dict())
    H, se = fbm.hurst_estimate(curve)
    _emit(args, cfg, (["n", "variance"], curve), {"H_hat": H, "stderr": se})
    return 0


def _cmd_fgn(args):
    if (args.H is None) == (args.alpha is None):
        raise UsageError("give exactly one of --H and --alpha")
    params = fbm.FbmParams(args.H) if args.H is not None else fbm.FbmParams.from_alpha(args.alpha)
    cfg = _config(args, H=params.H)
    if args.table == "gamma":
        k = np.arange(args.n)
        _emit(args, cfg, (["k", "gamma"], list(zip(k.tolist(), fbm.fgn_autocovariance(params, k).tolist()))))
        return 0
    seed = resolve_seed(args.seed)
    x = fbm.sample_fgn(params, args.n, seed, size=args.reps)
    header = ["i"] + [f"path_{r}" for r in range(args.reps)]
    rows = [[i + 1] + x[:, i].tolist() for i in range(args.n)]
    _emit(args, dict(cfg, seed=seed), (header, rows))
    return 0


def _cmd_fkg(args):
    law = _law(args)
    seed = resolve_seed(args.seed)
    funcs = [f.strip() for f in args.functionals.split(",") if f.strip()]
    rep = diagnostics.fkg_test(law, args.p, args.n, args.reps, seed, funcs, args.sigma,
                               args.B, args.threads)
    _emit(args, _config(args, seed=seed, law=law.to_dict()), _report_table(rep), rep.to_dict())
    return 0 if rep.passed else 1


def _cmd_maxstats(args):
    law = _law(args)
    seed = resolve_seed(args.seed)
    ms = diagnostics.max_statistics(law, args.p, args.n, args.reps, args.theta, seed, args.B,
                                    args.threads)
    rows = list(zip(ms.thetas.tolist(), ms.thresholds.tolist(), ms.tail_freq.tolist()))
    _emit(args, _config(args, seed=seed, law=law.to_dict()), (["theta", "threshold", "frequency"], rows),
          ms.to_dict())
    return 0


def _cmd_suite(args):
    results = acceptance.run_suite(args.only, args.threads,
                                   echo=lambda line: print(line, file=sys.stderr, flush=True))
    passed = all(r.passed for r in results)
    body = {"config": {"only": args.only}, "passed": passed,
            "criteria": [r.to_dict() for r in results]}
    write_text(json_text(body), args.out)
    return 0 if passed else 1


COMMANDS = {
    "renewal": _cmd_renewal, "variance": _cmd_variance, "simulate": _cmd_simulate,
    "rescale": _cmd_rescale, "meet": _cmd_meet, "components": _cmd_components,
    "hurst": _cmd_hurst, "fgn": _cmd_fgn, "fkg": _cmd_fkg, "maxstats": _cmd_maxstats,
    "suite": _cmd_suite,
}


def run(argv=None) -> int:
    """Run one command; returns the exit code instead of exiting."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
        if getattr(args, "threads", None) is None:
            args.threads = default_threads()
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except (LawError, ValueError) as exc:
        print(f"fracwalk: error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
