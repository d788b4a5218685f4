"""Counters collected by a run and the figures derived from them."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from . import protocols as P
from .errors import ConfigError


@dataclass
class MetricsLedger:
    protocol: str
    warmup: float
    duration: float
    payload_bits: int
    scenario: tuple = ()  # identifies the topology/traffic draw, for matched comparisons
    # packets generated inside the measurement window and their fates
    generated: int = 0
    delivered: int = 0
    dropped: int = 0
    # every packet, warm-up included, for conservation checks
    total_generated: int = 0
    total_delivered: int = 0
    total_dropped: int = 0
    in_flight: int = 0  # queued or in service when the run stopped
    # unique deliveries (by delivery time) inside the window
    delivered_bits: float = 0.0
    deliveries: int = 0
    decisions: Counter = field(default_factory=Counter)
    noncoop: Counter = field(default_factory=Counter)
    exclusions: Counter = field(default_factory=Counter)
    coop_outcomes: Counter = field(default_factory=Counter)
    duration_sum: Counter = field(default_factory=Counter)
    duration_count: Counter = field(default_factory=Counter)
    frames_sent: Counter = field(default_factory=Counter)

    def record_duration(self, strategy, seconds):
        self.duration_sum[strategy] += seconds
        self.duration_count[strategy] += 1

    def as_row(self):
        """Flat dict used for CSV output."""
        row = {
            "throughput_kbps": aggregate_throughput(self) / 1e3,
            "pdr": pdr(self),
            "mean_duration_us": mean_duration(self) * 1e6,
            "generated": self.generated,
            "delivered": self.delivered,
            "dropped": self.dropped,
        }
        for k in (P.DIRECT, P.SPLIT, P.DEFER):
            row[f"decisions_{k}"] = self.decisions[k]
        for k in P.NONCOOP_REASONS:
            row[f"noncoop_{k}"] = self.noncoop[k]
        for k in P.EXCLUSION_REASONS:
            row[f"excluded_{k}"] = self.exclusions[k]
        for k in P.COOP_OUTCOMES:
            row[f"coop_{k}"] = self.coop_outcomes[k]
        return row


def aggregate_throughput(ledger: MetricsLedger):
    """Network-wide delivered payload rate in bit/s over the measurement window."""
    if ledger.duration <= 0:
        raise ValueError("no measured time")
    return ledger.delivered_bits / ledger.duration


def pdr(ledger: MetricsLedger):
    resolved = ledger.delivered + ledger.dropped
    return ledger.delivered / resolved if resolved else float("nan")


def mean_duration(ledger: MetricsLedger, strategy=None):
    """Mean payload airtime of completed communications."""
    keys = [strategy] if strategy else list(ledger.duration_count)
    n = sum(ledger.duration_count[k] for k in keys)
    if n == 0:
        return float("nan")
    return sum(ledger.duration_sum[k] for k in keys) / n


def duration_ratio(coop: MetricsLedger, csma: MetricsLedger):
    """Mean communication time with cooperation over the time without it."""
    if coop.scenario != csma.scenario:
        raise ConfigError("duration ratio needs ledgers from matched scenarios")
    return mean_duration(coop) / mean_duration(csma)


def coop_phase_breakdown(ledger: MetricsLedger):
    """Shares of split and non-cooperative decisions among transmissions.

    ``coop-success`` is the fraction of split attempts whose packet reached
    the destination; the remaining split attempts are broken down by the
    first failure they hit.
    """
    sent = ledger.decisions[P.DIRECT] + ledger.decisions[P.SPLIT]
    splits = ledger.decisions[P.SPLIT]
    out = {"transmissions": sent}
    out["split"] = splits / sent if sent else 0.0
    for reason in P.NONCOOP_REASONS:
        out[reason] = ledger.noncoop[reason] / sent if sent else 0.0
    resolved = sum(ledger.coop_outcomes.values())
    for outcome in P.COOP_OUTCOMES:
        out[f"coop-{outcome}"] = ledger.coop_outcomes[outcome] / resolved if resolved else 0.0
    directs = sum(ledger.noncoop.values())
    out["unsuitable-share-of-noncoop"] = ledger.noncoop[P.UNSUITABLE_RELAYS] / directs if directs else 0.0
    return out


def relay_unavailability_breakdown(ledger: MetricsLedger):
    total = sum(ledger.exclusions[r] for r in P.EXCLUSION_REASONS)
    return {r: (ledger.exclusions[r] / total if total else 0.0) for r in P.EXCLUSION_REASONS}


def merge_ledgers(ledgers):
    """Pool replications into one ledger (sums; order does not matter)."""
    ledgers = list(ledgers)
    if not ledgers:
        raise ValueError("nothing to merge")
    first = ledgers[0]
    out = MetricsLedger(first.protocol, first.warmup, 0.0, first.payload_bits, scenario=("merged",))
    for led in ledgers:
        out.duration += led.duration
        for name in ("generated", "delivered", "dropped", "total_generated", "total_delivered", "total_dropped",
                     "in_flight", "delivered_bits", "deliveries"):
            setattr(out, name, getattr(out, name) + getattr(led, name))
        for name in ("decisions", "noncoop", "exclusions", "coop_outcomes", "duration_sum", "duration_count",
                     "frames_sent"):
            getattr(out, name).update(getattr(led, name))
    return out
