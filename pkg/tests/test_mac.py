import numpy as np
import pytest
from hypothesis import given, strategies as st

from coopcsma import mac
from coopcsma.channel import PathLossLaw, dbm_to_mw
from coopcsma.errors import RetryExhaustedError

LAM = float(dbm_to_mw(-100.0))
N = float(dbm_to_mw(-102.0))


def test_draw_backoff_support(rng):
    d0 = np.array([mac.draw_backoff(0, 5, rng) for _ in range(20000)])
    assert d0.min() == 0 and d0.max() == 16
    d3 = np.array([mac.draw_backoff(3, 5, rng) for _ in range(20000)])
    assert d3.max() == 128
    with pytest.raises(RetryExhaustedError):
        mac.draw_backoff(5, 5, rng, srl=5)


def test_draw_backoff_mean():
    rng = np.random.default_rng(0)
    # same law as draw_backoff, vectorised for a million draws
    draws = rng.integers(0, 2 ** (5 - 1) + 1, 10**6)
    assert draws.mean() == pytest.approx(8.0, abs=0.05)
    single = np.array([mac.draw_backoff(0, 5, np.random.default_rng(s)) for s in range(2000)])
    assert single.mean() == pytest.approx(8.0, abs=0.5)


def test_sense_examples():
    assert mac.sense(N, LAM) == mac.IDLE
    law = PathLossLaw.from_dbm(10, 3.5)
    assert mac.sense(N + law.mean_power(60.0), LAM) == mac.BUSY
    assert mac.sense(LAM, LAM) == mac.IDLE


def test_backoff_step_examples():
    s = mac.BackoffState(remaining=1, idle_slots=13)
    s2, granted = mac.backoff_step(s, mac.IDLE, difs_slots=13)
    assert s2.remaining == 0 and granted
    s = mac.BackoffState(remaining=5, idle_slots=20)
    s2, granted = mac.backoff_step(s, mac.BUSY, 13)
    assert s2.remaining == 5 and s2.frozen and not granted


def test_resume_needs_full_difs():
    s = mac.BackoffState(remaining=3, idle_slots=0, frozen=True)
    for k in range(12):
        s, g = mac.backoff_step(s, mac.IDLE, 13)
        assert s.remaining == 3 and not g
    s, g = mac.backoff_step(s, mac.IDLE, 13)  # DIFS completes
    assert s.remaining == 3
    s, g = mac.backoff_step(s, mac.BUSY, 13)  # interruption restarts DIFS
    for k in range(13):
        s, g = mac.backoff_step(s, mac.IDLE, 13)
    assert s.remaining == 3
    s, g = mac.backoff_step(s, mac.IDLE, 13)
    assert s.remaining == 2


def test_on_attempt_failure(rng):
    assert mac.on_attempt_failure(mac.BackoffState(attempt=4, srl=5), rng) is None
    assert mac.on_attempt_failure(mac.BackoffState(attempt=3, srl=4), rng) is None
    nxt = mac.on_attempt_failure(mac.BackoffState(attempt=0, srl=5), rng)
    assert nxt.attempt == 1 and 0 <= nxt.remaining <= 32


@given(st.lists(st.booleans(), max_size=60), st.integers(0, 40))
def test_counter_monotone_and_bounded(busy_pattern, n0):
    s = mac.BackoffState(remaining=n0)
    last = n0
    for b in busy_pattern:
        s, g = mac.backoff_step(s, mac.BUSY if b else mac.IDLE, 13)
        assert 0 <= s.remaining <= last
        last = s.remaining


def test_expiry_and_consumed_slots():
    t = mac.expiry_time(1.0, 4, 128e-6, 10e-6)
    assert t == pytest.approx(1.0 + 128e-6 + 40e-6)
    assert mac.slots_consumed(1.0, 1.0 + 100e-6, 128e-6, 10e-6) == 0
    assert mac.slots_consumed(1.0, 1.0 + 128e-6 + 25e-6, 128e-6, 10e-6) == 2
    assert mac.slots_consumed(1.0, t, 128e-6, 10e-6) == 4


def test_nav():
    nav = mac.NavState()
    nav.reserve(2.0)
    nav.reserve(1.0)
    assert nav.active(1.5) and not nav.active(2.0)
