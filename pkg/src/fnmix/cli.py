"""Command-line entry point ``fnmix``.

Exit codes: 0 on success, 1 on invalid input, 2 when a hypothesis of the
requested bound fails (for example too few samples).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import concentration, intervals, seqtest, simulate, spectral, zoo
from .chain import load_chain, save_chain, spectral_decompose
from .discrepancy import (
    MixingTimeTable,
    discrepancy_curve,
    f_mixing_time,
    function_on_chain,
    tv_mixing_time,
    worst_case_tv,
)
from .errors import FnmixError, InputError, NotAttained, PreconditionViolated

log = logging.getLogger("fnmix")


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors map to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(f"{self.prog}: {message}")


# -- I/O helpers -----------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.17g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def emit_json(args, payload: dict):
    doc = _jsonable({**payload, "config": _config(args)})
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def write_csv(path, header, rows, args=None):
    """Write a CSV (17 significant digits); the resolved configuration goes to ``<path>.config.json``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    if path is None:
        sys.stdout.write(buf.getvalue())
        return
    Path(path).write_text(buf.getvalue())
    if args is not None:
        Path(str(path) + ".config.json").write_text(
            json.dumps(_jsonable(_config(args)), indent=2, sort_keys=True) + "\n"
        )


def load_function(path, chain):
    """Read ``d`` values in [0, 1] from JSON (list or ``{"values": [...]}``) or single-column CSV."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(f"cannot read function file {path}: {exc}") from exc
    try:
        if p.suffix.lower() == ".json":
            obj = json.loads(text)
            vals = obj["values"] if isinstance(obj, dict) else obj
        else:
            vals = []
            for line in text.splitlines():
                line = line.strip().split(",")[0]
                if not line or line.startswith("#"):
                    continue
                try:
                    vals.append(float(line))
                except ValueError:
                    if vals:
                        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"malformed function file {path}: {exc}") from exc
    return function_on_chain(chain, vals)


def save_function(values, path):
    Path(path).write_text(json.dumps({"values": np.asarray(values, dtype=float).tolist()}))


def _chain_and_f(args, need_f=True):
    chain = load_chain(args.chain)
    f = None
    if getattr(args, "function", None):
        f = load_function(args.function, chain)
    elif need_f:
        raise InputError("--function is required")
    return chain, f


def _J(args):
    return spectral.parse_index_set(args.J) if getattr(args, "J", None) else ()


def _tf_callable(args, chain, f, decomp=None):
    src = getattr(args, "tf_source", "exact")
    if src == "exact":
        return MixingTimeTable(chain, f)
    decomp = decomp or spectral_decompose(chain)
    return spectral.BoundMixingTimes(decomp, f, kind=src, J=_J(args))


def _result(t):
    return {"attained": False, "n_max": t.n_max} if isinstance(t, NotAttained) else {"attained": True, "value": int(t)}


# -- subcommands -----------------------------------------------------------


def cmd_spectrum(args):
    chain, f = _chain_and_f(args, need_f=False)
    s = spectral_decompose(chain)
    out = {
        "d": chain.d,
        "eigenvalues": s.eigenvalues,
        "lambda_star": s.lambda_star,
        "lambda_0": s.lambda_0,
        "gamma_star": s.gamma_star,
        "gamma_0": s.gamma_0,
        "pi_min": chain.pi_min,
        "reconstruction_error": s.reconstruction_error(),
        "biorthogonality_error": s.biorthogonality_error(),
    }
    if f is not None:
        fs = spectral.f_spectrum(s, f)
        out.update({"J_f": list(fs.J_f), "lambda_f": fs.lambda_f, "gamma_f": fs.gamma_f, "mu": f.mu, "sigma2_f": f.sigma2_f})
        if fs.lambda_f < 1 - 1e-12:
            av = intervals.asymptotic_variance(s, f)
            out.update({"sigma2_asym": av.sigma2_asym, "rho_f": av.rho_f})
        if args.J:
            js = spectral.j_split(s, fs, _J(args))
            out["J_split"] = {
                "J": list(js.J),
                "Delta_J_star": js.Delta_J_star,
                "lambda_J": js.lambda_J,
                "lambda_minus_J": js.lambda_minus_J,
            }
    emit_json(args, out)


def cmd_discrepancy(args):
    chain, f = _chain_and_f(args, need_f=not args.tv)
    curve = discrepancy_curve(chain, None if args.tv else f, args.n_max)
    write_csv(args.out, ["n", "value"], enumerate(curve.values, start=1), args)


def cmd_mixing_time(args):
    chain, f = _chain_and_f(args, need_f=False)
    n_max = args.n_max
    if args.bound == "exact":
        t = tv_mixing_time(chain, args.delta, n_max) if f is None else f_mixing_time(chain, f, args.delta, n_max)
    else:
        if f is None and args.bound != "uniform":
            raise InputError("--function is required for function-specific bounds")
        s = spectral_decompose(chain)
        fv = f if f is not None else np.zeros(chain.d)
        t = spectral.mixing_time_bound(s, fv, args.delta, kind=args.bound, J=_J(args), n_max=n_max)
    out = {"kind": "total-variation" if f is None else "f-discrepancy", "bound": args.bound, **_result(t)}
    if f is None and args.delta < 0.5:
        out["spectral_lower_bound"] = spectral.tv_mixing_lower_bound(spectral_decompose(chain).gamma_star, args.delta)
    emit_json(args, out)


def cmd_hoeffding(args):
    chain, f = _chain_and_f(args)
    s = spectral_decompose(chain)
    eps, N = args.epsilon, args.N
    if args.method == "master":
        tb = concentration.master_hoeffding(eps, N, _tf_callable(args, chain, f, s), args.start_discrepancy, args.burnin)
    elif args.method == "spectral":
        tb = concentration.hoeffding_spectral(eps, N, spectral.f_spectrum(s, f), chain.pi_min)
    elif args.method == "jsplit":
        fs = spectral.f_spectrum(s, f)
        js = spectral.j_split(s, fs, _J(args))
        Delta_J = js.Delta_J_star if args.Delta_J is None else args.Delta_J
        Delta = eps / 2 - Delta_J if args.Delta is None else args.Delta
        tb = concentration.hoeffding_jsplit(Delta, Delta_J, N, js, chain.pi_min)
    elif args.method == "uniform":
        tb = concentration.uniform_hoeffding(eps, N, s.gamma_0, one_sided=args.one_sided)
    else:
        dtv = _dtv_bound(s)
        if args.T0 is None:
            _, tb = concentration.optimize_burnin(eps, N, s.gamma_0, dtv, (0, args.T0_max))
        else:
            tb = concentration.uniform_hoeffding_burnin(eps, N, args.T0, s.gamma_0, float(dtv(np.array([args.T0]))[0]))
    emit_json(args, tb.to_json())


def _dtv_bound(decomp):
    """Vectorized ``T0 -> min(1, lambda_*^T0 / sqrt(pi_min))`` total-variation bound."""
    c = 1.0 / math.sqrt(decomp.pi_min)
    return lambda T0: np.minimum(1.0, c * np.power(decomp.lambda_star, np.asarray(T0, dtype=float)))


def cmd_interval(args):
    chain, f = _chain_and_f(args)
    s = spectral_decompose(chain)
    start = _parse_start(args.start)
    x = f.values[simulate.sample_path(chain, start, args.N, args.seed)]
    if args.method == "uniform":
        T = MixingTimeTable(chain)
        ci = intervals.optimize_alpha0(x, s.gamma_0, T, args.alpha) if args.alpha0 is None else intervals.uniform_ci(
            x, s.gamma_0, T, args.alpha, args.alpha0
        )
    elif args.method == "adaptive":
        ci = intervals.adaptive_ci(x, args.alpha, _tf_callable(args, chain, f, s), args.eta)
    else:
        av = intervals.asymptotic_variance(s, f)
        ci = intervals.berry_esseen_ci(x, args.alpha, math.sqrt(av.sigma2_asym), s.gamma_0, chain.pi_min)
    emit_json(args, ci.to_json())


def _parse_start(text):
    if text == "stationary":
        return "stationary"
    try:
        return int(text)
    except ValueError as exc:
        raise InputError("--start must be 'stationary' or a state index") from exc


def _seq_config(args, chain, f, s):
    kw = {"Tf_at": _tf_callable(args, chain, f, s)} if args.param == "adaptive" else {"gamma_0": s.gamma_0}
    N0 = args.N0
    if args.mode == "diff" and N0 is None:
        N0 = math.floor(100.0 / s.gamma_0)
    return seqtest.make_config(args.mode, args.r, args.delta, args.alpha, args.xi, N0=N0, cap=args.cap, **kw)


def cmd_seqtest(args):
    chain, f = _chain_and_f(args)
    s = spectral_decompose(chain)
    cfg = _seq_config(args, chain, f, s)
    start = _parse_start(args.start)
    runs = []
    traces = []
    for rep in range(args.reps):
        dec = seqtest.run(simulate.ChainStream(chain, f.values, start, args.seed, rep), cfg)
        runs.append(dec.to_json())
        traces.extend((rep, *t) for t in dec.trace)
    if args.trace:
        write_csv(args.trace, ["rep", "N_k", "mean", "half_width"], traces, args)
    emit_json(args, {"M": cfg.M, "N0": cfg.N0, "N_fix": cfg.N_fix, "runs": runs})


def cmd_zoo(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    funcs = {}
    meta = {}
    if args.kind == "cycle":
        chain = zoo.lazy_cycle(args.d)
        funcs["parity"] = zoo.parity(args.d)
        for j in sorted({1, max(1, args.d // 2), args.d}):
            funcs[f"f{j}"] = zoo.periodic_function(args.d, j)
    elif args.kind == "line":
        chain = zoo.line_chain(args.d)
        funcs["threshold"] = zoo.threshold_function(args.d, args.delta)
    elif args.kind == "two-state":
        chain = zoo.two_state(args.p)
        funcs["indicator"] = np.array([0.0, 1.0])
    elif args.kind == "oring":
        chain, f, meta = zoo.oring_mh_chain(args.data)
        funcs["f65"] = f.values
    else:
        chain, f, meta = zoo.mixture_gibbs_chain(args.data, sigma=args.sigma, rho=args.rho)
        funcs["recovery"] = f.values
    save_chain(chain, out / "chain.json")
    for name, v in funcs.items():
        save_function(v, out / f"{name}.json")
    emit_json(args, {"chain": str(out / "chain.json"), "functions": {k: str(out / f"{k}.json") for k in funcs}, "meta": meta})


def cmd_simulate(args):
    chain, f = _chain_and_f(args)
    start = _parse_start(args.start)
    if args.what == "tail":
        plan = simulate.SimPlan(chain, f.values, start, args.N, args.reps, args.seed)
        means = simulate.path_means(plan, args.burnin)
        hits = means >= f.mu + args.epsilon
        summary = {"tail": simulate.frequency(hits).to_json()}
        rows = [(r, m, int(h)) for r, (m, h) in enumerate(zip(means, hits))]
        header = ["rep", "mean", "exceeded"]
    elif args.what == "coverage":
        s = spectral_decompose(chain)
        if args.method == "adaptive":
            T = _tf_callable(args, chain, f, s)
            make = lambda x: intervals.adaptive_ci(x, args.alpha, T, args.eta)  # noqa: E731
        else:
            T = MixingTimeTable(chain)
            make = lambda x: intervals.optimize_alpha0(x, s.gamma_0, T, args.alpha)  # noqa: E731
        plan = simulate.SimPlan(chain, f.values, start, args.N, args.reps, args.seed)
        paths = simulate.sample_paths(plan)
        cis = [make(f.values[p]) for p in paths]
        hits = [ci.covers(f.mu) for ci in cis]
        summary = {"coverage": simulate.frequency(hits).to_json(), "half_width": cis[0].half_width}
        rows = [(r, ci.center, ci.half_width, int(h)) for r, (ci, h) in enumerate(zip(cis, hits))]
        header = ["rep", "center", "half_width", "covered"]
    else:
        s = spectral_decompose(chain)
        cfg = _seq_config(args, chain, f, s)
        res = simulate.empirical_seqtest(chain, f.values, start, cfg, args.reps, args.seed)
        summary = {
            "error": res["error"].to_json(),
            "stopping_time": res["stopping_time"].to_json(),
            "capped": res["capped"],
        }
        rows = [(r, d.verdict, d.stop_index, d.k_stop) for r, d in enumerate(res["decisions"])]
        header = ["rep", "verdict", "stop_index", "k_stop"]
    if args.csv:
        write_csv(args.csv, header, rows, args)
    emit_json(args, summary)


# -- reproduce -------------------------------------------------------------


def _curves(decomp, f, J, n_max):
    fs = spectral.f_spectrum(decomp, f)
    js = spectral.j_split(decomp, fs, J)
    ns = np.arange(1, n_max + 1)
    exact = discrepancy_curve(decomp.chain, f, n_max).values
    return ns, {
        "uniform": np.minimum(1.0, spectral.uniform_tv_bound(decomp, ns)),
        "fgap": spectral.f_gap_bound(decomp, fs, f, ns),
        "sharper": spectral.sharper_bound(decomp, fs, js, f, ns),
        "oracle": spectral.oracle_bound(decomp, fs, js, f, ns),
        "oracle_pointmass": spectral.oracle_bound(decomp, fs, js, f, ns, form="pointmass"),
        "exact": exact,
    }


def reproduce_cycle(args):
    d = args.d
    chain = zoo.lazy_cycle(d)
    s = spectral_decompose(chain)
    js = sorted({1, max(1, d // 2), d})
    n_max = args.n_max or 4 * d * d
    ns = np.arange(1, n_max + 1)
    cols, header = [ns], ["n"]
    summary = {}
    for j in js:
        f = function_on_chain(chain, zoo.periodic_function(d, j))
        fs = spectral.f_spectrum(s, f)
        cols += [discrepancy_curve(chain, f, n_max).values, spectral.f_gap_bound(s, fs, f, ns)]
        header += [f"exact_f{j}", f"bound_f{j}"]
        summary[f"f{j}"] = {
            str(delta): {
                "exact": _result(f_mixing_time(chain, f, delta, n_max=10 * n_max)),
                "bound": zoo.cycle_mixing_time_bound(d, j, delta),
            }
            for delta in args.deltas
        }
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / f"cycle_d{d}.csv", header, zip(*cols), args)
    emit_json(args, {"csv": str(out / f"cycle_d{d}.csv"), "mixing_times": summary})


def reproduce_oring(args):
    chain, f, meta = zoo.oring_mh_chain(args.data)
    s = spectral_decompose(chain)
    J = spectral.parse_index_set(args.J)
    ns, curves = _curves(s, f, J, args.n_max)
    tv = np.array([worst_case_tv(chain, n) for n in ns]) if args.with_tv else None
    header = ["n", *curves]
    cols = [ns, *curves.values()]
    if tv is not None:
        header.append("tv")
        cols.append(tv)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "oring_discrepancy.csv", header, zip(*cols), args)
    emit_json(args, {"csv": str(out / "oring_discrepancy.csv"), "lambda_star": s.lambda_star, "reference_lambda_star": 0.386, **meta})


def mixture_table(chain, f, J=tuple(range(2, 26)), deltas=(0.01, 1e-6), n_max=None):
    """Rows ``(bound_type, T(delta) ...)`` for the uniform, f-specific, oracle and exact mixing times."""
    s = spectral_decompose(chain)
    rows = []
    for label, kind, form in (("Uniform", "uniform", None), ("FS", "sharper", None), ("Oracle", "oracle", "pointmass")):
        vals = []
        for delta in deltas:
            t = spectral.mixing_time_bound(s, f, delta, kind=kind, J=J, n_max=n_max, form=form or "sup")
            vals.append(t if not isinstance(t, NotAttained) else "NA")
        rows.append((label, *vals))
    rows.append(("Actual", *[f_mixing_time(chain, f, delta, n_max=n_max) for delta in deltas]))
    return rows


def reproduce_mixture(args):
    chain, f, meta = zoo.mixture_gibbs_chain(args.data, sigma=args.sigma, rho=args.rho)
    J = spectral.parse_index_set(args.J)
    rows = mixture_table(chain, f, J)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "mixture_table.csv", ["bound_type", "Tf_0.01", "Tf_1e-6"], rows, args)
    s = spectral_decompose(chain)
    ns, curves = _curves(s, f, J, args.n_max)
    write_csv(out / "mixture_discrepancy.csv", ["n", *curves], zip(ns, *curves.values()), args)
    emit_json(args, {"table": str(out / "mixture_table.csv"), "rows": rows, "gamma_star": s.gamma_star, "mu": f.mu})


def reproduce_lowerbound(args):
    chain = zoo.line_chain(args.d)
    fv = zoo.threshold_function(args.d, args.delta)
    plan = simulate.SimPlan(chain, fv, "stationary", args.N, args.reps, args.seed)
    est = simulate.empirical_two_sided(plan, args.epsilon, mu=0.5)
    emit_json(args, {
        "frequency": est.to_json(),
        "reference": 1.0 / 3.0,
        "event_mass": float(chain.pi[zoo.outer_quarters(args.d)].sum()),
        "Tf": _result(f_mixing_time(chain, fv, args.delta)),
    })


def reproduce_hoeffding_compare(args):
    chain, f, meta = zoo.mixture_gibbs_chain(args.data)
    s = spectral_decompose(chain)
    T = MixingTimeTable(chain, f)
    dtv = _dtv_bound(s)
    rows = []
    for eps in np.geomspace(args.eps_min, args.eps_max, args.points):
        master = concentration.master_hoeffding(float(eps), args.N, T)
        T0, unif = concentration.optimize_burnin(float(eps), args.N, s.gamma_0, dtv, (0, min(args.T0_max, args.N - 1)))
        rows.append((eps, math.log(max(master.value, 1e-300)), math.log(max(unif.value, 1e-300)), T(eps / 2), T0))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = ["epsilon", "log_master", "log_uniform_burnin", "Tf_half_eps", "T0_opt"]
    write_csv(out / "hoeffding_compare.csv", header, rows, args)
    emit_json(args, {"csv": str(out / "hoeffding_compare.csv")})


# -- parser ----------------------------------------------------------------


def _common_chain(p, function=True):
    p.add_argument("--chain", required=True, help="chain JSON file {d, P, pi?}")
    if function:
        p.add_argument("--function", help="function values f: states -> [0,1] (JSON or one-column CSV)")
    p.add_argument("--out", help="output path (default: stdout)")


def _tf_args(p):
    p.add_argument("--tf-source", choices=["exact", "fgap", "sharper", "oracle"], default="exact",
                   help="source of the f-mixing time T_f: exact curve or an inverted spectral bound")
    p.add_argument("--J", help="index set for the split bounds, e.g. 2..140 or 2,3,5 (1-based eigen-indices)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fnmix", description="Function-specific mixing times and concentration for reversible chains.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="eigenvalues, spectral gaps and the f-spectrum")
    _common_chain(p)
    p.add_argument("--J", help="also summarize this index split (e.g. 2..140)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("discrepancy", help="exact worst-start discrepancy curve as CSV n,value")
    _common_chain(p)
    p.add_argument("--tv", action="store_true", help="total-variation curve instead of f-discrepancy")
    p.add_argument("--n-max", type=int, default=100, help="last step n of the curve")
    p.set_defaults(func=cmd_discrepancy)

    p = sub.add_parser("mixing-time", help="exact mixing time or an upper bound from the spectral bounds")
    _common_chain(p)
    p.add_argument("--delta", type=float, required=True, help="tolerance delta")
    p.add_argument("--bound", choices=["exact", *spectral.BOUND_KINDS], default="exact",
                   help="exact first crossing, or which discrepancy bound to invert")
    p.add_argument("--J", help="index set for sharper/oracle bounds")
    p.add_argument("--n-max", type=int, default=None, help="search horizon (default FNMIX_NMAX or 10^6)")
    p.set_defaults(func=cmd_mixing_time)

    p = sub.add_parser("hoeffding", help="tail bound for the ergodic average")
    _common_chain(p)
    p.add_argument("--method", choices=["master", "spectral", "jsplit", "uniform", "uniform-burnin"], default="master",
                   help="mixing-time, f-gap, J-split, spectral-gap, or spectral-gap with burn-in bound")
    p.add_argument("--epsilon", type=float, required=True, help="deviation epsilon")
    p.add_argument("--N", type=int, required=True, help="number of samples averaged")
    _tf_args(p)
    p.add_argument("--start-discrepancy", type=float, default=None, help="d_f of the start law; must be <= epsilon/2")
    p.add_argument("--burnin", action="store_true", help="charge a T_f(epsilon/2) burn-in in the effective sample size")
    p.add_argument("--Delta-J", dest="Delta_J", type=float, default=None, help="allowance for the J eigenspaces (>= Delta*_J)")
    p.add_argument("--Delta", type=float, default=None, help="allowance for the remaining eigenspaces")
    p.add_argument("--one-sided", action="store_true", help="one-sided spectral-gap bound")
    p.add_argument("--T0", type=int, default=None, help="burn-in for uniform-burnin (default: optimized)")
    p.add_argument("--T0-max", type=int, default=10**5, help="upper end of the burn-in scan")
    p.set_defaults(func=cmd_hoeffding)

    p = sub.add_parser("interval", help="confidence interval from one simulated path")
    _common_chain(p)
    p.add_argument("--method", choices=["uniform", "adaptive", "clt"], required=True,
                   help="spectral-gap Hoeffding, f-adaptive Hoeffding, or Berry-Esseen CLT interval")
    p.add_argument("--alpha", type=float, default=0.05, help="miscoverage level")
    p.add_argument("--alpha0", type=float, default=None, help="burn-in share of alpha (uniform; default optimized)")
    p.add_argument("--eta", type=float, default=0.01, help="width floor eta for the adaptive interval")
    p.add_argument("--N", type=int, required=True, help="path length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", default="stationary", help="'stationary' or a start state index")
    _tf_args(p)
    p.set_defaults(func=cmd_interval)

    def seq_args(p):
        p.add_argument("--mode", choices=["fix", "seq", "diff"], required=True,
                       help="fixed sample size, sequential with indifference region, or without")
        p.add_argument("--r", type=float, required=True, help="threshold r")
        p.add_argument("--delta", type=float, default=0.1, help="indifference half-width delta")
        p.add_argument("--alpha", type=float, default=0.1, help="error budget (<= 2/5)")
        p.add_argument("--xi", type=float, default=0.1, help="geometric growth of decision times (< 2/5)")
        p.add_argument("--param", choices=["adaptive", "uniform"], default="adaptive",
                       help="parameters from T_f or from the spectral gap")
        p.add_argument("--N0", type=int, default=None, help="first decision time for mode diff (default floor(100/gamma_0))")
        p.add_argument("--cap", type=int, default=seqtest.DEFAULT_STREAM_CAP, help="sample cap before reporting Running")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--reps", type=int, default=1)
        p.add_argument("--start", default="stationary", help="'stationary' or a start state index")
        _tf_args(p)

    p = sub.add_parser("seqtest", help="run a sequential test on simulated streams")
    _common_chain(p)
    seq_args(p)
    p.add_argument("--trace", help="CSV path for per-decision-time traces")
    p.set_defaults(func=cmd_seqtest)

    p = sub.add_parser("zoo", help="write an example chain and its functions as JSON files")
    p.add_argument("kind", choices=["cycle", "line", "two-state", "oring", "mixture"])
    p.add_argument("--d", type=int, default=8, help="half the number of states (cycle, line)")
    p.add_argument("--delta", type=float, default=0.1, help="step height of the threshold function (line)")
    p.add_argument("--p", type=float, default=0.3, help="switching probability (two-state)")
    p.add_argument("--data", help="dataset CSV (default: bundled)")
    p.add_argument("--sigma", type=float, default=70.0, help="mixture observation sd")
    p.add_argument("--rho", type=float, default=237.0, help="mixture prior sd of the component means")
    p.add_argument("--out-dir", default=".", help="directory for chain.json and function files")
    p.add_argument("--out", help="summary JSON path (default: stdout)")
    p.set_defaults(func=cmd_zoo)

    p = sub.add_parser("simulate", help="Monte Carlo tail, coverage or sequential-test experiments")
    p.add_argument("what", choices=["tail", "coverage", "seqtest"])
    _common_chain(p)
    p.add_argument("--N", type=int, default=1000, help="path length (tail, coverage)")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", default="stationary", help="'stationary' or a start state index")
    p.add_argument("--epsilon", type=float, default=0.1, help="deviation (tail)")
    p.add_argument("--burnin", type=int, default=0, help="samples dropped before averaging (tail)")
    p.add_argument("--method", choices=["uniform", "adaptive"], default="adaptive", help="interval family (coverage)")
    p.add_argument("--eta", type=float, default=0.01)
    p.add_argument("--csv", help="per-replicate CSV output")
    p.add_argument("--mode", choices=["fix", "seq", "diff"], default="seq")
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--xi", type=float, default=0.1)
    p.add_argument("--param", choices=["adaptive", "uniform"], default="adaptive")
    p.add_argument("--N0", type=int, default=None)
    p.add_argument("--cap", type=int, default=seqtest.DEFAULT_STREAM_CAP)
    _tf_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="regenerate the data behind the example analyses")
    rsub = p.add_subparsers(dest="target", required=True, parser_class=_Parser)

    r = rsub.add_parser("cycle", help="exact f_j discrepancy vs gap bound on the lazy cycle")
    r.add_argument("--d", type=int, default=32)
    r.add_argument("--n-max", type=int, default=None)
    r.add_argument("--deltas", type=float, nargs="+", default=[0.1, 0.01])
    r.set_defaults(func=reproduce_cycle)

    r = rsub.add_parser("oring", help="discrepancy bounds and exact curve for the logistic-regression sampler")
    r.add_argument("--data")
    r.add_argument("--J", default="2..140")
    r.add_argument("--n-max", type=int, default=40)
    r.add_argument("--with-tv", action="store_true", help="add the worst-start total-variation curve")
    r.set_defaults(func=reproduce_oring)

    r = rsub.add_parser("mixture", help="mixing-time table and curves for the mixture Gibbs sampler")
    r.add_argument("--data")
    r.add_argument("--J", default="2..25")
    r.add_argument("--sigma", type=float, default=70.0)
    r.add_argument("--rho", type=float, default=237.0)
    r.add_argument("--n-max", type=int, default=500)
    r.set_defaults(func=reproduce_mixture)

    r = rsub.add_parser("lowerbound", help="large-deviation frequency on the line-graph construction")
    r.add_argument("--d", type=int, default=20)
    r.add_argument("--delta", type=float, default=0.1)
    r.add_argument("--epsilon", type=float, default=0.05)
    r.add_argument("--N", type=int, default=10)
    r.add_argument("--reps", type=int, default=10**5)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=reproduce_lowerbound)

    r = rsub.add_parser("hoeffding-compare", help="log tail bounds: mixing-time bound vs optimized-burn-in spectral bound")
    r.add_argument("--data")
    r.add_argument("--N", type=int, default=10**6)
    r.add_argument("--eps-min", type=float, default=0.005)
    r.add_argument("--eps-max", type=float, default=0.2)
    r.add_argument("--points", type=int, default=40)
    r.add_argument("--T0-max", type=int, default=10**5)
    r.set_defaults(func=reproduce_hoeffding_compare)

    for r in rsub.choices.values():
        r.add_argument("--out-dir", default=".", help="directory for CSV outputs")
        r.add_argument("--out", help="summary JSON path (default: stdout)")
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        args.func(args)
    except PreconditionViolated as exc:
        print(f"fnmix: precondition not met: {exc}", file=sys.stderr)
        return 2
    except FnmixError as exc:
        print(f"fnmix: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
