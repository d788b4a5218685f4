"""Replicated runs, CSV reports and the load / threshold sweeps built on them."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import metrics as M
from . import protocols as P
from .config import ScenarioConfig
from .engine import simulate
from .errors import BatchError, ConfigError

CSV_VERSION = "coopcsma-results/1"
Z95 = 1.959963984540054


def run_replication(cfg: ScenarioConfig, audit=False):
    """One replication; returns ``(ledger, event_log, audit)``.

    With ``audit`` every access decision is re-derived by brute force and
    ``audit`` is ``(checked, mismatches)``; otherwise it is ``None``.
    """
    sim = simulate(cfg, keep_decisions=audit)
    checks = None
    if audit:
        forced = cfg.protocol == "coop-csi" and cfg.genie == "forced-cooperation"
        bad = sum(not P.recheck_decision(d, forced=forced) for d in sim.decisions)
        checks = (len(sim.decisions), bad)
    return sim.ledger, sim.event_log, checks


def _run(args):
    try:
        return run_replication(*args)
    except Exception as exc:  # surfaced with the seed by run_batch
        return exc


@dataclass
class BatchResult:
    config: ScenarioConfig
    seeds: list
    ledgers: list
    rows: list
    summary: dict
    ci_rel: dict
    logs: list = field(default_factory=list)
    audit: tuple | None = None  # (decisions checked, mismatches) summed over replications

    @property
    def pooled(self):
        return M.merge_ledgers(self.ledgers)

    def mean(self, key):
        return self.summary[key]


def summarize(rows):
    """Column means and 95% half-widths relative to the mean (NaN with one row)."""
    keys = [k for k in rows[0] if k not in ("seed", "protocol", "genie")]
    mean, rel = {}, {}
    for k in keys:
        v = np.array([r[k] for r in rows], dtype=float)
        m = float(np.nanmean(v)) if np.any(np.isfinite(v)) else float("nan")
        mean[k] = m
        if len(v) < 2 or m == 0 or not np.isfinite(m):
            rel[k] = float("nan")
        else:
            rel[k] = float(Z95 * np.nanstd(v, ddof=1) / math.sqrt(np.sum(np.isfinite(v))) / abs(m))
    return mean, rel


def run_batch(cfg: ScenarioConfig, reps, seed=0, *, jobs=1, audit=False):
    """``reps`` replications with seeds ``seed, seed + 1, ...``.

    Replications are independent; with ``jobs > 1`` they run in worker
    processes and are collected in seed order.
    """
    if reps < 1:
        raise ConfigError("need at least one replication")
    seeds = [seed + k for k in range(reps)]
    tasks = [(cfg.replace(seed=s), audit) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_run, tasks))
    else:
        results = [_run(t) for t in tasks]
    ledgers, logs, rows = [], [], []
    checked = bad = 0
    for s, res in zip(seeds, results):
        if isinstance(res, Exception):
            raise BatchError(s, res) from res
        led, log, checks = res
        ledgers.append(led)
        logs.append(log)
        if checks:
            checked += checks[0]
            bad += checks[1]
        rows.append({"seed": s, "protocol": cfg.protocol, "genie": cfg.genie, **led.as_row()})
    mean, rel = summarize(rows)
    return BatchResult(cfg, seeds, ledgers, rows, mean, rel, logs, (checked, bad) if audit else None)


def _fmt(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def format_csv(result: BatchResult, extra=None):
    """CSV text: version comment, one row per replication, then mean and CI rows."""
    buf = io.StringIO()
    cfg = result.config
    buf.write(f"# {CSV_VERSION} protocol={cfg.protocol} genie={cfg.genie} load_kbps={cfg.load_kbps} "
              f"min_coop_rate={cfg.min_coop_rate} reps={len(result.rows)}\n")
    cols = list(result.rows[0])
    if extra:
        cols = list(extra) + cols
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in result.rows:
        w.writerow([_fmt({**(extra or {}), **r}[c]) for c in cols])
    for label, vals in (("mean", result.summary), ("ci95_rel", result.ci_rel)):
        row = []
        for c in cols:
            if c == "seed":
                row.append(label)
            elif c in vals:
                row.append(_fmt(vals[c]))
            elif extra and c in extra:
                row.append(_fmt(extra[c]))
            else:
                row.append(_fmt(result.rows[0][c]) if c in ("protocol", "genie") else "")
        w.writerow(row)
    return buf.getvalue()


def write_csv(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


@dataclass
class SweepPoint:
    threshold: float
    performed: float
    success: float
    gain: float
    throughput: float


def min_rate_sweep(cfg: ScenarioConfig, thresholds, reps, seed=0, *, baseline: BatchResult | None = None, jobs=1):
    """Coop-CSI with raised relay-search thresholds against a matched CSMA-CSI baseline.

    Performed fraction is splits over transmissions; success is the share
    of splits that delivered; gain is the relative throughput change.
    """
    thresholds = [float(t) for t in thresholds]
    if any(t < cfg.rate_min for t in thresholds):
        raise ConfigError("sweep thresholds must be at least rate_min")
    if baseline is None:
        baseline = run_batch(cfg.replace(protocol="csma-csi", genie="off", min_coop_rate=None), reps, seed, jobs=jobs)
    base = baseline.summary["throughput_kbps"]
    points, batches = [], []
    for t in thresholds:
        res = run_batch(cfg.replace(protocol="coop-csi", min_coop_rate=t), reps, seed, jobs=jobs)
        pooled = res.pooled
        br = M.coop_phase_breakdown(pooled)
        thr = res.summary["throughput_kbps"]
        points.append(SweepPoint(t, br["split"], br["coop-success"], thr / base - 1.0, thr))
        batches.append(res)
    return points, batches


def saturation_load(loads, throughput, tol=0.01):
    """Smallest load beyond which throughput changes by less than ``tol`` per step.

    Returns ``None`` when the curve never flattens.
    """
    loads = np.asarray(loads, dtype=float)
    thr = np.asarray(throughput, dtype=float)
    order = np.argsort(loads)
    loads, thr = loads[order], thr[order]
    rel = np.abs(np.diff(thr)) / np.maximum(np.abs(thr[:-1]), 1e-300)
    for i in range(len(rel)):
        if np.all(rel[i:] < tol):
            return float(loads[i])
    return None


def load_sweep(cfg: ScenarioConfig, loads, reps, seed=0, *, jobs=1):
    return [run_batch(cfg.replace(load_kbps=float(l)), reps, seed, jobs=jobs) for l in loads]
