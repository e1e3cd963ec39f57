"""``qpperc`` command line: env-scan, simulate, estimate, fit, schedule, all.

Exit status: 0 on success, 1 on a configuration error, 2 on a runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import os
import sys
import time
import warnings
from pathlib import Path

from . import __version__
from .config import (ConfigError, ExperimentConfig, build_box, build_environment, build_event,
                     build_schedule, config_hash, defaults_help, load_config, query_coordinates)
from .connectivity import build_clusters
from .environment import scan_resonances
from .estimation import FitRefused, estimate_events, fit_spatial_decay, fit_temporal_stretch
from .realization import dump_realization, sample_realization
from .results import EstimateRecord, OutputDir, emit_plot_data, fit_row
from .schedule import ScheduleParams, scale_table, suggest, tau_window, theorem_bound, validate

COMMANDS = ("env-scan", "simulate", "estimate", "fit", "schedule", "all")
DEFAULT_OUT = "qpperc-out"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment TOML file (defaults below when omitted)")
    common.add_argument("--seed", type=int, help="override run.seed")
    common.add_argument("--trials", type=int, help="override run.n_trials")
    common.add_argument("--workers", type=int, help="override run.workers (never changes results)")
    common.add_argument("--out", type=Path,
                        help=f"output directory; falls back to output.dir, then $QPPERC_OUT, then ./{DEFAULT_OUT}")
    common.add_argument("--format", choices=("csv", "json"), action="append", dest="formats",
                        help="result format, repeatable (default: output.formats)")

    epilog = "default configuration:\n\n" + defaults_help()
    p = _Parser(prog="qpperc", description=__doc__, epilog=epilog,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"qpperc {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("env-scan", parents=[common], help="list resonant sites and edges of a block")
    s.add_argument("--L", type=int, help="block radius (default run.scan_L)")
    s.add_argument("--center", type=int, nargs="+", help="block center (default run.scan_center or run.center)")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--epsilon", type=float, help="resonance threshold")
    g.add_argument("--epsilon-from-schedule", action="store_true",
                   help="use epsilon = L^(-alpha/gamma) from the schedule (the default)")

    s = sub.add_parser("simulate", parents=[common], help="sample one realization and its clusters")
    s.add_argument("--trial", type=int, help="trial index (default run.trial)")

    sub.add_parser("estimate", parents=[common], help="Monte Carlo estimates of the configured queries")
    sub.add_parser("fit", parents=[common], help="estimate, then fit the decay law named by run.fit")

    s = sub.add_parser("schedule", parents=[common], help="validate exponents and print the scale table")
    for flag, tp in (("--d", int), ("--nu", int), ("--zeta", float), ("--sigma", float), ("--R", int),
                     ("--C", float), ("--L0", int), ("--mu0", float), ("--k-max", int)):
        s.add_argument(flag, type=tp)

    sub.add_parser("all", parents=[common], help="schedule, env-scan, simulate, estimate and fit")
    return p


@dataclasses.dataclass
class _Context:
    cfg: ExperimentConfig
    out: OutputDir
    args: argparse.Namespace

    @property
    def spec(self):
        return build_environment(self.cfg.environment)


def _effective_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config is not None else ExperimentConfig()
    run = cfg.run
    for flag, key in (("seed", "seed"), ("trials", "n_trials"), ("workers", "workers")):
        val = getattr(args, flag)
        if val is not None:
            setattr(run, key, val)
    if not 0 <= run.seed < 2 ** 64:
        raise ConfigError(f"--seed {run.seed}: must be an unsigned 64-bit integer")
    if run.n_trials < 1:
        raise ConfigError(f"--trials {run.n_trials}: must be at least 1")
    if run.workers < 1:
        raise ConfigError(f"--workers {run.workers}: must be at least 1")
    if args.formats:
        cfg.output.formats = list(dict.fromkeys(args.formats))
    return cfg


def _out_dir(args, cfg: ExperimentConfig) -> Path:
    if args.out is not None:
        return args.out
    if cfg.output.dir is not None:
        return Path(cfg.output.dir)
    return Path(os.environ.get("QPPERC_OUT") or DEFAULT_OUT)


# -- subcommands -------------------------------------------------------------

def _schedule_params(ctx: _Context) -> ScheduleParams:
    a = ctx.args
    flags = {k: getattr(a, k, None) for k in ("d", "nu", "zeta", "sigma", "R", "C", "L0", "mu0")}
    if all(v is None for v in flags.values()):
        return build_schedule(ctx.cfg, ctx.spec)
    spec = ctx.spec
    s = ctx.cfg.schedule
    pick = lambda k, default: default if flags[k] is None else flags[k]  # noqa: E731
    d, nu, zeta, sigma = pick("d", spec.d), pick("nu", spec.nu), pick("zeta", spec.zeta), pick("sigma", spec.sigma)
    R = pick("R", s.R if s.R is not None else spec.R)
    try:
        return suggest(d, nu, zeta, sigma, R, C=pick("C", s.C), mu_0=pick("mu0", s.mu_0),
                       L_0=pick("L0", s.L_0), C_kappa=s.C_kappa, R_v=spec.R_v, R_e=spec.R_e)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _fmt_num(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, int):
        return str(v)
    return f"{v:.10g}"


def cmd_schedule(ctx: _Context) -> int:
    params = _schedule_params(ctx)
    bad = validate(params)
    if bad:
        for v in bad:
            print(f"violated {v}", file=sys.stderr)
        return 1
    k_max = ctx.args.k_max if getattr(ctx.args, "k_max", None) is not None else ctx.cfg.schedule.k_max
    if k_max < 0:
        raise ConfigError("--k-max must be nonnegative")
    table = scale_table(params, k_max=k_max)
    lo, hi = tau_window(params)
    bound = theorem_bound(params)
    prows = [("K", params.K)] + [(k, getattr(params, k)) for k in
                                 ("d", "nu", "zeta", "sigma", "R", "alpha", "gamma", "eta", "tau", "p", "q",
                                  "beta", "C", "C_kappa", "L_0", "mu_0")]
    prows += [("tau_window_lo", lo), ("tau_window_hi", hi), ("theorem_bound", bound),
              ("log10_kappa", table.log10_kappa)]
    width = max(len(k) for k, _ in prows)
    for k, v in prows:
        print(f"{k:<{width}}  {_fmt_num(v)}")
    if not params.tau < bound:
        print(f"note: tau = {params.tau:.6g} is not below the theorem bound {bound:.6g}")
    srows = [{"k": r.k, "log10_L": r.log10_L, "L": r.L, "log10_T": r.log10_T, "T": r.T,
              "log10_eps": r.log10_eps, "eps": r.eps, "mu": r.mu} for r in table.rows]
    cols = list(srows[0])
    cells = [[_fmt_num(row[c]) for c in cols] for row in srows]
    widths = [max(len(c), *(len(r[i]) for r in cells)) for i, c in enumerate(cols)]
    print()
    print("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
    for r in cells:
        print("  ".join(v.rjust(w) for v, w in zip(r, widths)))
    ctx.out.write_table("schedule", [{"name": k, "value": v} for k, v in prows])
    ctx.out.write_table("scales", srows)
    return 0


def cmd_env_scan(ctx: _Context) -> int:
    a, run = ctx.args, ctx.cfg.run
    spec = ctx.spec
    L = getattr(a, "L", None)
    L = run.scan_L if L is None else L
    if L < 1:
        raise ConfigError("--L must be at least 1")
    center = getattr(a, "center", None) or run.scan_center or run.center
    if len(center) != spec.d:
        raise ConfigError(f"--center needs {spec.d} coordinates")
    eps = getattr(a, "epsilon", None)
    if eps is None and run.epsilon is not None and not getattr(a, "epsilon_from_schedule", False):
        eps = run.epsilon
    if eps is None:
        params = _schedule_params(ctx)
        eps = float(L) ** (-params.alpha / params.gamma)
    report = scan_resonances(spec, center, L, eps)
    d = spec.d
    rows = []
    for kind, *rest in report.rows():
        pos, rate, e = rest[:d], rest[d], rest[d + 1]
        row = {"kind": kind}
        row.update({f"x{i + 1}": p for i, p in enumerate(pos)})
        row.update(rate=rate, epsilon=e)
        rows.append(row)
    cols = ["kind"] + [f"x{i + 1}" for i in range(d)] + ["rate", "epsilon"]
    ctx.out.write_table("resonances", rows, cols)
    ns, ne = len(report.resonant_sites), len(report.resonant_edges)
    print(f"block center={tuple(center)} L={L} epsilon={eps:.6g}")
    print(f"resonant sites: {ns} (R_v = {spec.R_v})")
    print(f"resonant edges: {ne} (R_e = {spec.R_e})")
    if ns > spec.R_v or ne > spec.R_e:
        print("note: resonance count exceeds the zero count at this scale")
    return 0


def cmd_simulate(ctx: _Context) -> int:
    run = ctx.cfg.run
    trial = getattr(ctx.args, "trial", None)
    trial = run.trial if trial is None else trial
    box = build_box(run)
    r = sample_realization(ctx.spec, box, run.seed, trial)
    ctx.out.write_text("realization.txt", dump_realization(r))
    cs = build_clusters(r)
    ctx.out.write_table("clusters", cs.summary(),
                        ["cluster", "size", "alive_length", "lower", "upper", "horizontal"])
    print(f"trial {trial}: {r.n_deaths} deaths, {r.n_bonds} bonds, {cs.n_clusters} clusters")
    return 0


def _estimate(ctx: _Context) -> list[EstimateRecord]:
    run = ctx.cfg.run
    if not run.query:
        raise ConfigError("run.query: at least one query is needed")
    box = build_box(run)
    events = [build_event(q) for q in run.query]
    ests = estimate_events(ctx.spec, box, events, run.n_trials, run.seed, workers=run.workers)
    records = [EstimateRecord(e, *query_coordinates(q)) for e, q in zip(ests, run.query)]
    ctx.out.write_table("estimates", [rec.row() for rec in records],
                        ["query", "r", "dt", "p_hat", "n_trials", "hits", "ci_lo", "ci_hi"])
    for rec in records:
        e = rec.est
        print(f"{e.query}: p = {e.p_hat:.6g} [{e.ci_lo:.6g}, {e.ci_hi:.6g}]")
    return records


def cmd_estimate(ctx: _Context) -> int:
    records = _estimate(ctx)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        emit_plot_data(records, ctx.out)
    return 0


def cmd_fit(ctx: _Context, records=None) -> int:
    kind = ctx.cfg.run.fit
    if kind == "none":
        raise ConfigError("run.fit: set to \"spatial\" or \"temporal\" to fit")
    records = _estimate(ctx) if records is None else records
    if kind == "spatial":
        pts = [(rec.r, rec.est) for rec in records if rec.r is not None and rec.dt == 0]
        fit = fit_spatial_decay(pts)
    else:
        pts = [(rec.dt, rec.est) for rec in records if rec.r == 0 and rec.dt]
        fit = fit_temporal_stretch(pts)
    ctx.out.write_table("fits", [fit_row(fit)], ["kind", "mu_hat", "tau_hat", "r_squared", "n_points", "domain"])
    emit_plot_data(records, ctx.out, [fit])
    tau = "" if fit.tau_hat is None else f" tau = {fit.tau_hat:.6g}"
    print(f"{fit.kind}: mu = {fit.mu_hat:.6g}{tau} r^2 = {fit.r_squared:.6g} on {fit.n_points} points")
    return 0


def cmd_all(ctx: _Context) -> int:
    status = cmd_schedule(ctx)
    if status:
        return status
    cmd_env_scan(ctx)
    cmd_simulate(ctx)
    records = _estimate(ctx)
    if ctx.cfg.run.fit != "none":
        cmd_fit(ctx, records)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            emit_plot_data(records, ctx.out)
    return 0


_DISPATCH = {"env-scan": cmd_env_scan, "simulate": cmd_simulate, "estimate": cmd_estimate,
             "fit": cmd_fit, "schedule": cmd_schedule, "all": cmd_all}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    try:
        cfg = _effective_config(args)
        out = OutputDir(_out_dir(args, cfg), cfg.output.formats)
        ctx = _Context(cfg, out, args)
        status = _DISPATCH[args.command](ctx)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except (FitRefused, ValueError, ArithmeticError, OSError) as e:
        print(f"runtime failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    if status == 0:
        meta = {"experiment_id": cfg.id, "config_hash": config_hash(cfg), "config": str(args.config or ""),
                "seed": cfg.run.seed, "n_trials": cfg.run.n_trials, "workers": cfg.run.workers,
                "started_utc": stamp, "wall_clock_s": round(time.perf_counter() - started, 3)}
        out.write_manifest(args.command, meta)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
