import math
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from coopcsma import ScenarioConfig
from coopcsma import batch as B
from coopcsma import metrics as M
from coopcsma import protocols as P
from coopcsma.errors import ConfigError

counts = st.integers(0, 10**6)


def ledger(**kw):
    led = M.MetricsLedger("coop-csi", 1.0, 2.0, 5000, scenario=("s",))
    for k, v in kw.items():
        setattr(led, k, v)
    return led


@given(st.lists(counts, min_size=4, max_size=4), st.lists(counts, min_size=6, max_size=6),
       st.lists(counts, min_size=3, max_size=3))
def test_taxonomies_partition(excl, outcomes, noncoop):
    led = ledger(exclusions=Counter(dict(zip(P.EXCLUSION_REASONS, excl))),
                 coop_outcomes=Counter(dict(zip(P.COOP_OUTCOMES, outcomes))),
                 noncoop=Counter(dict(zip(P.NONCOOP_REASONS, noncoop))))
    led.decisions[P.SPLIT] = sum(outcomes)
    led.decisions[P.DIRECT] = sum(noncoop)
    r = M.relay_unavailability_breakdown(led)
    if sum(excl):
        assert sum(r.values()) == pytest.approx(1.0, abs=1e-12)
    br = M.coop_phase_breakdown(led)
    if sum(outcomes):
        assert sum(br[f"coop-{o}"] for o in P.COOP_OUTCOMES) == pytest.approx(1.0, abs=1e-12)
    if br["transmissions"]:
        total = br["split"] + sum(br[k] for k in P.NONCOOP_REASONS)
        assert total == pytest.approx(1.0, abs=1e-12)


def test_throughput_and_pdr():
    led = ledger(delivered_bits=1e6, delivered=9, dropped=1)
    assert M.aggregate_throughput(led) == 5e5
    assert M.pdr(led) == 0.9
    with pytest.raises(ValueError):
        M.aggregate_throughput(ledger(duration=0.0))
    assert math.isnan(M.pdr(ledger()))


def test_durations_and_ratio():
    a, b = ledger(), ledger()
    a.record_duration(P.SPLIT, 2e-3)
    a.record_duration(P.DIRECT, 4e-3)
    b.record_duration(P.DIRECT, 4e-3)
    assert M.mean_duration(a) == pytest.approx(3e-3)
    assert M.mean_duration(a, P.SPLIT) == pytest.approx(2e-3)
    assert M.duration_ratio(a, b) == pytest.approx(0.75)
    with pytest.raises(ConfigError):
        M.duration_ratio(a, ledger(scenario=("other",)))


def test_merge_is_order_free():
    a = ledger(delivered_bits=10.0, generated=3, decisions=Counter(direct=2))
    b = ledger(delivered_bits=5.0, generated=1, decisions=Counter(split=1))
    ab, ba = M.merge_ledgers([a, b]), M.merge_ledgers([b, a])
    assert ab == ba
    assert ab.duration == 4.0 and ab.delivered_bits == 15.0 and ab.decisions == Counter(direct=2, split=1)
    with pytest.raises(ValueError):
        M.merge_ledgers([])


def small():
    return ScenarioConfig(load_kbps=150.0, duration=0.3, warmup=0.1)


def test_csv_replay_and_single_rep_ci():
    one = B.run_batch(small(), 1, seed=4)
    text = B.format_csv(one)
    lines = text.splitlines()
    assert lines[0].startswith(f"# {B.CSV_VERSION}")
    ci = dict(zip(lines[1].split(","), lines[-1].split(",")))
    assert ci["seed"] == "ci95_rel" and ci["throughput_kbps"] == ""
    two = B.run_batch(small(), 2, seed=4)
    assert B.format_csv(two) == B.format_csv(B.run_batch(small(), 2, seed=4))
    assert two.rows[0] == one.rows[0]
    assert B.format_csv(two).splitlines()[-1].split(",")[2] != ""


def test_batch_audit_counts_decisions():
    res = B.run_batch(small().replace(protocol="coop-csi"), 1, seed=1, audit=True)
    checked, bad = res.audit
    assert checked > 0 and bad == 0


def test_batch_rejects_zero_reps():
    with pytest.raises(ConfigError):
        B.run_batch(small(), 0)


def test_saturation_load():
    loads = [100, 200, 300, 400, 500]
    assert B.saturation_load(loads, [1, 2, 2.5, 2.51, 2.515]) == 300
    assert B.saturation_load(loads, [1, 2, 3, 4, 5]) is None
    assert B.saturation_load(loads[::-1], [2.515, 2.51, 2.5, 2, 1]) == 300


def test_sweep_rejects_low_threshold():
    with pytest.raises(ConfigError):
        B.min_rate_sweep(small(), [0.5e6], 1)
