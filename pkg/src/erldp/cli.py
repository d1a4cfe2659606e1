"""Command-line interface.

Output is CSV (default) or JSON lines.  CSV starts with one ``#`` line that
echoes the subcommand and its parameters; floats are written with 17
significant digits.  Exit codes: 0 success, 2 bad usage or parameter range,
1 numeric failure.

Input files: a micro measure is one ``k lambda_k`` pair per line, a macro
measure one atom per line.  ``#`` starts a comment.  A ``verify-ldp`` target
file mixes both: two-column lines are micro weights, one-column lines are
atoms.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from contextlib import nullcontext
from typing import Any, Sequence

import numpy as np

from . import __version__
from .connectivity import PrecisionConfig
from .core import MacroMeasure, MesoCutoffs, MicroMeasure, NumericalError, SizeHistogram
from .core import histogram_from_sizes, total_mass_macro, total_mass_micro
from .exactdist import (
    ORACLE_MAX_N,
    enumerate_histograms,
    exhaustive_oracle,
    log_prob_config,
    verify_normalization,
)
from .ldpverify import RecoveryTarget, rate_convergence
from .ratefn import (
    beta_residual,
    beta_t,
    beta_t_fixed_point,
    lambda_star,
    lambda_star_tail,
    minimize_micro_mass,
    rate_joint,
    rate_macro,
    rate_macro_contracted,
    rate_meso,
    rate_micro,
    rate_micro_contracted,
    rate_micro_mass,
)
from .simulate import SimConfig, all_isolated, always, draw_samples, largest_at_least, mc_event_logprob, summarize
from .smoluchowski import SmolConfig, integrate


class UsageError(ValueError):
    pass


# --------------------------------------------------------------------------
# output


def _fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    return str(v)


def _json_value(v: Any) -> Any:
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v) or math.isinf(v):
            return _fmt(v)
        return float(f"{v:.17g}")
    return v


class Writer:
    def __init__(self, stream, fmt: str, schema: str, params: dict[str, Any]):
        self.stream = stream
        self.fmt = fmt
        self.schema = schema
        self.params = params
        self.header: list[str] | None = None
        if fmt == "csv":
            echo = " ".join(f"{k}={_fmt(v)}" for k, v in params.items())
            stream.write(f"# {schema} {echo}".rstrip() + "\n")

    def row(self, record: dict[str, Any]) -> None:
        if self.fmt == "csv":
            if self.header is None:
                self.header = list(record)
                self.stream.write(",".join(self.header) + "\n")
            self.stream.write(",".join(_fmt(record[k]) for k in self.header) + "\n")
        else:
            obj = {
                "schema": self.schema,
                "params": {k: _json_value(v) for k, v in self.params.items()},
                "results": {k: _json_value(v) for k, v in record.items()},
            }
            self.stream.write(json.dumps(obj, separators=(",", ":")) + "\n")


# --------------------------------------------------------------------------
# inputs


def _data_lines(path: str) -> list[list[str]]:
    rows = []
    try:
        with open(path) as fh:
            for raw in fh:
                line = raw.split("#", 1)[0].strip()
                if line:
                    rows.append(line.split())
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    return rows


def _micro_from_pairs(pairs: dict[int, float], k_max: int | None) -> MicroMeasure:
    if not pairs:
        return MicroMeasure.zeros(k_max or 1)
    K = max(max(pairs), k_max or 0)
    return MicroMeasure.from_pairs(pairs, K)


def _add_pair(pairs: dict[int, float], k: str, v: str) -> None:
    try:
        kk, vv = int(k), float(v)
    except ValueError:
        raise UsageError(f"bad micro entry {k!r} {v!r}") from None
    if kk < 1:
        raise UsageError(f"size index must be positive, got {kk}")
    pairs[kk] = pairs.get(kk, 0.0) + vv


def read_micro_file(path: str, k_max: int | None = None) -> MicroMeasure:
    pairs: dict[int, float] = {}
    for fields in _data_lines(path):
        if len(fields) != 2:
            raise UsageError(f"{path}: expected 'k lambda_k', got {' '.join(fields)!r}")
        _add_pair(pairs, *fields)
    return _micro_from_pairs(pairs, k_max)


def read_macro_file(path: str) -> MacroMeasure:
    atoms = []
    for fields in _data_lines(path):
        if len(fields) != 1:
            raise UsageError(f"{path}: expected one atom per line, got {' '.join(fields)!r}")
        atoms.append(_float(fields[0]))
    return MacroMeasure(tuple(atoms))


def read_target_file(path: str, k_max: int | None = None) -> tuple[MicroMeasure, MacroMeasure]:
    pairs: dict[int, float] = {}
    atoms = []
    for fields in _data_lines(path):
        if len(fields) == 2:
            _add_pair(pairs, *fields)
        elif len(fields) == 1:
            atoms.append(_float(fields[0]))
        else:
            raise UsageError(f"{path}: lines need one or two columns, got {' '.join(fields)!r}")
    return _micro_from_pairs(pairs, k_max), MacroMeasure(tuple(atoms))


def _float(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise UsageError(f"not a number: {s!r}") from None


def _parse_inline_micro(text: str) -> dict[int, float]:
    pairs: dict[int, float] = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise UsageError(f"micro entries are k:value, got {item!r}")
        _add_pair(pairs, *item.split(":", 1))
    return pairs


def _star_mass(choice: str, t: float) -> float:
    if choice == "one":
        return 1.0
    if choice == "beta":
        return beta_t(t)
    c = _float(choice)
    if not 0 <= c <= 1:
        raise UsageError("--lambda-star mass must lie in [0, 1]")
    return c


def resolve_micro(args, t: float) -> tuple[MicroMeasure, dict[str, Any]]:
    given = [x is not None for x in (args.lambda_file, args.lam, args.lambda_star)]
    if sum(given) > 1:
        raise UsageError("give at most one of --lambda-file, --lambda, --lambda-star")
    extra: dict[str, Any] = {}
    if args.lambda_file is not None:
        lam = read_micro_file(args.lambda_file, args.k_max)
    elif args.lam is not None:
        lam = _micro_from_pairs(_parse_inline_micro(args.lam), args.k_max)
    elif args.lambda_star is not None:
        c = _star_mass(args.lambda_star, t)
        K = args.k_max or 400
        lam = lambda_star(c, t, K) if c * t <= 1 + 1e-12 else _star_quiet(c, t, K)
        extra = {"lambda_star_mass": c, "tail_mass_bound": lambda_star_tail(c, t, K).mass}
    else:
        lam = MicroMeasure.zeros(args.k_max or 1)
    return lam, extra


def _star_quiet(c: float, t: float, K: int) -> MicroMeasure:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return lambda_star(c, t, K)


def resolve_macro(args, t: float) -> MacroMeasure:
    given = [x is not None for x in (args.alpha_file, args.alpha, args.alpha_single)]
    if sum(given) > 1:
        raise UsageError("give at most one of --alpha-file, --alpha, --alpha-single")
    if args.alpha_file is not None:
        return read_macro_file(args.alpha_file)
    if args.alpha is not None:
        return MacroMeasure(tuple(_float(a) for a in args.alpha.split(",") if a.strip()))
    if args.alpha_single is not None:
        if args.alpha_single == "auto":
            x = 1 - beta_t(t)
        else:
            x = _float(args.alpha_single)
        return MacroMeasure((x,)) if x > 0 else MacroMeasure(())
    return MacroMeasure(())


def _positive(name: str, v: float) -> float:
    if not v > 0:
        raise UsageError(f"{name} must be positive")
    return v


def _mass(name: str, v: float | None) -> float:
    if v is None:
        raise UsageError(f"{name} is required")
    if not 0 <= v <= 1:
        raise UsageError(f"{name} must lie in [0, 1]")
    return v


def _n_list(s: str) -> list[int]:
    try:
        out = [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad --n-list {s!r}") from None
    if not out or any(n < 2 for n in out):
        raise UsageError("--n-list needs integers >= 2")
    return out


def _edge_prob(args) -> float:
    if (args.t is None) == (args.p is None):
        raise UsageError("give exactly one of --t or --p")
    if args.p is not None:
        if not 0 <= args.p <= 1:
            raise UsageError("--p must lie in [0, 1]")
        return args.p
    _positive("--t", args.t)
    if args.t > args.n:
        raise UsageError("--t must not exceed --n")
    return args.t / args.n


# --------------------------------------------------------------------------
# subcommands

RATE_KINDS = ("micro", "macro", "joint", "micro-contracted", "macro-contracted", "meso", "micro-mass")


def cmd_rate(args, out) -> None:
    t = _positive("--t", args.t)
    kind = args.kind
    params: dict[str, Any] = {"t": t}
    if kind in ("meso", "micro-mass"):
        c = _mass("--c", args.c)
        params["c"] = c
        w = Writer(out, args.format, f"rate-{kind}", params)
        if kind == "meso":
            w.row({"c": c, "J_me": rate_meso(c, t)})
        else:
            w.row({"c": c, "J_mi": rate_micro_mass(c, t)})
        return
    lam, extra = resolve_micro(args, t) if kind != "macro" and kind != "macro-contracted" else (None, {})
    alpha = resolve_macro(args, t) if kind in ("macro", "joint", "macro-contracted") else None
    if lam is not None:
        params["K"] = lam.truncation
    params.update({k: v for k, v in extra.items() if k == "lambda_star_mass"})
    w = Writer(out, args.format, f"rate-{kind}", params)
    rec: dict[str, Any] = {}
    if lam is not None:
        rec["c_lambda"] = total_mass_micro(lam)
    if alpha is not None:
        rec["c_alpha"] = total_mass_macro(alpha)
    if kind == "micro":
        rec["I_mi"] = rate_micro(lam, t)
    elif kind == "macro":
        rec["I_ma"] = rate_macro(alpha, t)
    elif kind == "joint":
        rec["I_mi"] = rate_micro(lam, t)
        rec["I_ma"] = rate_macro(alpha, t)
        rec["I"] = rate_joint(lam, alpha, t)
    elif kind == "micro-contracted":
        rec["I_mi_contracted"] = rate_micro_contracted(lam, t)
    elif kind == "macro-contracted":
        rec["I_ma_contracted"] = rate_macro_contracted(alpha, t)
    if "tail_mass_bound" in extra:
        rec["tail_mass_bound"] = extra["tail_mass_bound"]
    w.row(rec)


def cmd_beta(args, out) -> None:
    t = _positive("--t", args.t)
    b = beta_t(t)
    w = Writer(out, args.format, "beta", {"t": t})
    w.row(
        {
            "t": t,
            "beta_t": b,
            "residual": beta_residual(b, t),
            "beta_t_fixed_point": beta_t_fixed_point(t),
            "giant_fraction": 1 - b,
        }
    )


def cmd_minimize(args, out) -> None:
    t = _positive("--t", args.t)
    if args.scan_c < 3:
        raise UsageError("--scan-c needs at least 3 grid points")
    res = minimize_micro_mass(t, args.scan_c)
    w = Writer(out, args.format, "minimize", {"t": t, "scan_c": args.scan_c})
    w.row({"t": t, "c_argmin": res.c, "J_mi_min": res.value, "phase": res.phase, "beta_t": beta_t(t)})


def _histogram_arg(args) -> SizeHistogram:
    if (args.sizes is None) == (args.hist is None):
        raise UsageError("give exactly one of --sizes or --hist")
    try:
        if args.sizes is not None:
            h = histogram_from_sizes(int(s) for s in args.sizes.split(",") if s.strip())
        else:
            counts = {}
            for item in args.hist.split(","):
                k, c = item.split(":")
                counts[int(k)] = counts.get(int(k), 0) + int(c)
            h = SizeHistogram(counts)
    except ValueError as e:
        raise UsageError(f"bad histogram: {e}") from None
    if args.n is not None and h.n_vertices != args.n:
        raise UsageError(f"histogram has {h.n_vertices} vertices, --n is {args.n}")
    return h


def cmd_exact(args, out) -> None:
    prec = PrecisionConfig(args.bits)
    if args.action == "prob":
        h = _histogram_arg(args)
        if args.n is None:
            args.n = h.n_vertices
        p = _edge_prob(args)
        w = Writer(out, args.format, "exact-prob", {"n": h.n_vertices, "p": p, "bits": args.bits})
        lp = log_prob_config(h, p, prec)
        w.row({"histogram": " ".join(f"{k}:{c}" for k, c in h), "log_p": lp, "p_config": math.exp(lp)})
        return
    if args.n is None or args.n < 1:
        raise UsageError("--n must be a positive integer")
    p = _edge_prob(args)
    if args.action == "normalize":
        if args.n > 60:
            raise UsageError("normalize supports --n <= 60")
        w = Writer(out, args.format, "exact-normalize", {"n": args.n, "p": p, "bits": args.bits})
        count = sum(1 for _ in enumerate_histograms(args.n))
        w.row({"n": args.n, "partitions": count, "log_total_deviation": verify_normalization(args.n, p, prec)})
        return
    # oracle-check
    if args.n > ORACLE_MAX_N:
        raise UsageError(f"oracle-check supports --n <= {ORACLE_MAX_N}")
    w = Writer(out, args.format, "exact-oracle-check", {"n": args.n, "p": p, "bits": args.bits})
    oracle = exhaustive_oracle(args.n, p)
    worst = max(abs(math.exp(log_prob_config(h, p, prec)) - float(v)) for h, v in oracle.items())
    w.row({"n": args.n, "partitions": len(oracle), "max_abs_diff": worst, "oracle_total": float(sum(oracle.values()))})


def _cutoffs(args) -> MesoCutoffs:
    if (args.meso_r is None) != (args.meso_eps is None):
        raise UsageError("give both --meso-r and --meso-eps, or neither")
    cut = MesoCutoffs.cube_root(args.n) if args.meso_r is None else MesoCutoffs(args.meso_r, args.meso_eps)
    cut.check(args.n)
    return cut


def _sim_config(args, model: str) -> SimConfig:
    return SimConfig(
        n_vertices=args.n,
        t=_positive("--t", args.t),
        samples=args.samples,
        seed=args.seed,
        workers=args.workers,
        model=model,
        t_shift=args.t_shift,
    )


def _event(name: str):
    if name == "always":
        return always
    if name == "all-isolated":
        return all_isolated
    if name.startswith("largest-at-least:"):
        f = _float(name.split(":", 1)[1])
        if not 0 < f <= 1:
            raise UsageError("largest-at-least fraction must lie in (0, 1]")
        return largest_at_least(f)
    raise UsageError(f"unknown event {name!r}")


def cmd_simulate(args, out) -> None:
    action = args.action
    model = args.model if action in ("summary", "event") else action
    cfg = _sim_config(args, model)
    params = {
        "model": model,
        "n": cfg.n_vertices,
        "t": cfg.t,
        "t_shift": cfg.t_shift,
        "samples": cfg.samples,
        "seed": cfg.seed,
        "workers": cfg.workers,
    }
    if action == "event":
        event = _event(args.event)
        params["event"] = args.event
        w = Writer(out, args.format, "simulate-event", params)
        est = mc_event_logprob(cfg, event)
        w.row({"neg_log_prob_per_n": est.estimate, "stderr": est.stderr, "hits": est.hits, "no_hits": est.no_hits})
        return
    cut = _cutoffs(args)
    params.update({"meso_r": cut.R, "meso_eps": cut.eps})
    hists = draw_samples(cfg)
    if action == "summary":
        w = Writer(out, args.format, "simulate-summary", params)
        s = summarize(hists, cut, cfg.t)
        rec: dict[str, Any] = {
            "largest_fraction_mean": s.largest_mean,
            "largest_fraction_stderr": s.largest_stderr,
            "meso_mass_mean": s.meso_mean,
            "meso_mass_stderr": s.meso_stderr,
        }
        for k in range(1, cut.R + 1):
            rec[f"lambda_hat_{k}"] = s.micro_mean[k - 1]
            rec[f"lambda_hat_{k}_stderr"] = s.micro_stderr[k - 1]
        w.row(rec)
        return
    w = Writer(out, args.format, f"simulate-{model}", params)
    for i, h in enumerate(hists):
        n = h.n_vertices
        rec = {"sample": i, "largest_fraction": h.largest / n, "components": h.n_components}
        for k in range(1, cut.R + 1):
            rec[f"lambda_hat_{k}"] = h.get(k) / n
        w.row(rec)


def cmd_smol(args, out) -> None:
    try:
        cfg = SmolConfig(args.kmax, args.t_end, args.tol, args.closure)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.n_out < 2:
        raise UsageError("--n-out needs at least 2 output times")
    times = np.linspace(0.0, cfg.t_end, args.n_out)
    tr = integrate(cfg, times)
    w = Writer(
        out,
        args.format,
        "smol",
        {"kmax": cfg.k_max, "t_end": cfg.t_end, "tol": cfg.tol, "closure": cfg.closure, "n_out": args.n_out},
    )
    gel = tr.gel
    for i, t in enumerate(tr.times):
        rec: dict[str, Any] = {"t": float(t)}
        for k in range(cfg.k_max):
            rec[f"l_{k + 1}"] = tr.l[i, k]
        rec["gel_mass"] = gel[i]
        w.row(rec)


def cmd_verify_ldp(args, out) -> None:
    t = _positive("--t", args.t)
    if args.target_file is not None:
        if any(x is not None for x in (args.lam, args.lambda_file, args.lambda_star)) or any(
            x is not None for x in (args.alpha, args.alpha_file, args.alpha_single)
        ):
            raise UsageError("--target-file excludes the inline --lambda*/--alpha* options")
        lam, alpha = read_target_file(args.target_file, args.k_max)
        extra = {}
    else:
        lam, extra = resolve_micro(args, t)
        alpha = resolve_macro(args, t)
    target = RecoveryTarget(lam, alpha)
    n_list = _n_list(args.n_list)
    prec = PrecisionConfig(args.bits)
    params = {"t": t, "K": lam.truncation, "bits": args.bits, "n_list": " ".join(map(str, n_list))}
    params.update({k: v for k, v in extra.items() if k == "lambda_star_mass"})
    rows = rate_convergence(target, t, n_list, prec)
    w = Writer(out, args.format, "verify-ldp", params)
    for r in rows:
        w.row({"n": r.n_vertices, "neg_log_prob_per_n": r.neg_log_prob, "I": r.rate, "gap": r.gap})


# --------------------------------------------------------------------------
# parser


def _micro_opts(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("micro measure")
    g.add_argument("--lambda-file", help="file of 'k lambda_k' lines")
    g.add_argument("--lambda", dest="lam", help="inline weights, e.g. 1:0.5,2:0.25")
    g.add_argument("--lambda-star", help="minimizer sequence with mass 'one', 'beta' or a number")
    g.add_argument("--k-max", type=int, help="truncation for the micro measure (default 400 for --lambda-star)")


def _macro_opts(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("macro measure")
    g.add_argument("--alpha-file", help="file with one atom per line")
    g.add_argument("--alpha", help="inline atoms, e.g. 0.5,0.25")
    g.add_argument("--alpha-single", help="one atom of this size, or 'auto' for the giant fraction 1 - beta_t")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="erldp", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    common.add_argument("--out", help="write to this file instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", parents=[common], help="evaluate a rate function")
    p.add_argument("kind", choices=RATE_KINDS)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--c", type=float, help="total mass for meso / micro-mass")
    _micro_opts(p)
    _macro_opts(p)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("beta", parents=[common], help="giant-component threshold root")
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(func=cmd_beta)

    p = sub.add_parser("minimize", parents=[common], help="argmin of the micro total-mass rate")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--scan-c", type=int, default=1001, help="number of grid points on [0, 1]")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("exact", parents=[common], help="exact finite-N law")
    p.add_argument("action", choices=("prob", "normalize", "oracle-check"))
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=float, help="edge probability t/N")
    p.add_argument("--p", type=float, help="edge probability")
    p.add_argument("--bits", type=int, default=256)
    p.add_argument("--sizes", help="component sizes for 'prob', e.g. 1,1,2")
    p.add_argument("--hist", help="histogram for 'prob', e.g. 1:2,2:1")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo samples")
    p.add_argument("action", choices=("er", "ml", "summary", "event"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--t-shift", type=float, default=0.0, help="use t + shift as the effective parameter")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--model", choices=("er", "ml"), default="er", help="sampler for summary/event")
    p.add_argument("--meso-r", type=int)
    p.add_argument("--meso-eps", type=float)
    p.add_argument("--event", default="always", help="always | all-isolated | largest-at-least:F")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("smol", parents=[common], help="truncated Smoluchowski trajectory")
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--n-out", type=int, default=11, help="equally spaced output times including 0")
    p.add_argument("--closure", choices=("gel", "sol"), default="gel")
    p.set_defaults(func=cmd_smol)

    p = sub.add_parser("verify-ldp", parents=[common], help="exact -(1/N) log P along a recovery sequence")
    p.add_argument("--target-file")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--n-list", default="100,200,400")
    p.add_argument("--bits", type=int, default=512)
    _micro_opts(p)
    _macro_opts(p)
    p.set_defaults(func=cmd_verify_ldp)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        ctx = open(args.out, "w") if args.out else nullcontext(sys.stdout)
    except OSError as e:
        print(f"erldp: cannot open {args.out}: {e.strerror}", file=sys.stderr)
        return 2
    try:
        with ctx as out:
            args.func(args, out)
    except (NumericalError, ArithmeticError) as e:
        print(f"erldp: numeric failure: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"erldp: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
