"""Command line: ``simulate`` replicated network runs, ``analyze`` the analytical figures.

Results are plot-ready CSV. Exit codes: 0 success, 1 bad configuration,
2 simulation invariant violated or replication aborted.
"""
from __future__ import annotations

import argparse
import io
import logging
import sys

import numpy as np

from . import batch as B
from .config import GENIE_MODES, PROTOCOLS, ScenarioConfig, load_config
from .errors import BatchError, ConfigError, InvariantViolation, QuadratureError, SamplingStarvationError

log = logging.getLogger("coopcsma")


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser():
    ap = argparse.ArgumentParser(prog="coopcsma", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="replicated network simulation")
    sim.add_argument("--config", help="key = value scenario file (defaults when omitted)")
    sim.add_argument("--protocol", choices=PROTOCOLS)
    sim.add_argument("--reps", type=int, default=1)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--genie", choices=GENIE_MODES)
    sim.add_argument("--load", type=float, help="offered load, kbit/s per node")
    sim.add_argument("--duration", type=float, help="measured seconds after warm-up")
    sim.add_argument("--warmup", type=float)
    sim.add_argument("--sweep-min-rate", type=_floats, metavar="A,B,C",
                     help="relay-search thresholds in bit/s (runs a matched CSMA-CSI baseline)")
    sim.add_argument("--jobs", type=int, default=1, help="worker processes")
    sim.add_argument("--out", help="output prefix; CSV goes to stdout otherwise")

    an = sub.add_parser("analyze", help="analytical studies")
    an.add_argument("figure", choices=("fig1", "fig2", "fig3", "fig4", "fig5"))
    an.add_argument("--samples", type=int, help="Monte Carlo samples (per point where relevant)")
    an.add_argument("--seed", type=int, default=0)
    an.add_argument("--step", type=float, default=0.5, help="quadrature lattice step for fig2, metres")
    an.add_argument("--out", help="output prefix; CSV goes to stdout otherwise")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _emit(text, out, suffix):
    if out:
        path = f"{out}{suffix}.csv"
        B.write_csv(path, text)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text)


def cmd_simulate(args):
    over = dict(protocol=args.protocol, genie=args.genie, load_kbps=args.load, duration=args.duration,
                warmup=args.warmup)
    if args.config:
        cfg = load_config(args.config, **over)
    else:
        cfg = ScenarioConfig(**{k: v for k, v in over.items() if v is not None})
    if args.sweep_min_rate:
        base = B.run_batch(cfg.replace(protocol="csma-csi", genie="off", min_coop_rate=None), args.reps, args.seed,
                           jobs=args.jobs)
        points, _ = B.min_rate_sweep(cfg, args.sweep_min_rate, args.reps, args.seed, baseline=base, jobs=args.jobs)
        buf = io.StringIO()
        buf.write(f"# {B.CSV_VERSION} min-rate sweep load_kbps={cfg.load_kbps} reps={args.reps}\n")
        buf.write("threshold_bps,performed_fraction,success_fraction,throughput_kbps,gain_over_csma\n")
        for p in points:
            buf.write(f"{p.threshold!r},{p.performed!r},{p.success!r},{p.throughput!r},{p.gain!r}\n")
        _emit(buf.getvalue(), args.out, "_sweep")
        return 0
    res = B.run_batch(cfg, args.reps, args.seed, jobs=args.jobs)
    _emit(B.format_csv(res), args.out, "")
    return 0


def _table(header, rows):
    buf = io.StringIO()
    buf.write(f"# {B.CSV_VERSION}\n")
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(repr(float(v)) if not isinstance(v, (int, np.integer)) else str(v) for v in r) + "\n")
    return buf.getvalue()


def cmd_analyze(args):
    from .analysis import fields, throughput

    fig = args.figure
    seed = args.seed
    if fig == "fig1":
        sig_dbm = np.linspace(-130.0, -40.0, 20)
        dist = np.linspace(20.0, 200.0, 20)
        grid = throughput.gain_grid(10 ** (sig_dbm / 10), dist, args.samples or 10**6, seed)
        rows = [(d, s, grid.ratio[i, j], grid.stderr[i, j]) for i, d in enumerate(dist)
                for j, s in enumerate(sig_dbm)]
        text = _table(("d_sd_m", "sigma2_dbm", "ratio", "stderr"), rows)
    elif fig == "fig2":
        from .geometry import Region
        win = Region(-40.0, 100.0, -60.0, 60.0)
        f = fields.relay_idle_field((0.0, 0.0), window=win, step=args.step)
        rows = [(x, y, f.values[i, j]) for i, x in enumerate(f.xs) for j, y in enumerate(f.ys)]
        text = _table(("x_m", "y_m", "idle_probability"), rows)
        log.info("grid-halving residual %.3g", f.residual)
    elif fig == "fig3":
        xs = np.arange(-30.0, 91.0, 5.0)
        ys = np.arange(-60.0, 61.0, 5.0)
        f = fields.relay_gain_field((0.0, 0.0), (60.0, 0.0), xs, ys, args.samples or 10**5, seed)
        rows = [(x, y, f.values[i, j], f.stderr[i, j]) for i, x in enumerate(f.xs) for j, y in enumerate(f.ys)]
        text = _table(("x_m", "y_m", "split_probability", "stderr"), rows)
    elif fig == "fig4":
        deltas = np.arange(0.0, 61.0, 5.0)
        rows = []
        for k in (1, 2, 3):
            c = fields.availability_ratio(k, deltas, n_configs=args.samples or 200_000, seed=seed + k)
            rows += [(k, d, r, s) for d, r, s in zip(c.deltas, c.ratio, c.stderr)]
        text = _table(("k", "d_sc_m", "ratio", "stderr"), rows)
    else:
        rows = []
        for d in np.arange(30.0, 91.0, 10.0):
            g = fields.biased_gain_comparison(d, n_trials=args.samples or 10**6, seed=seed)
            rows.append((d, g.gain_uniform, g.gain_csma, g.relative_reduction, g.lost_coop_fraction,
                         g.duration_ratio))
        text = _table(("d_sd_m", "gain_uniform", "gain_csma", "relative_reduction", "lost_coop_fraction",
                       "duration_ratio"), rows)
    _emit(text, args.out, f"_{fig}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        return cmd_analyze(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (InvariantViolation, BatchError, QuadratureError, SamplingStarvationError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
