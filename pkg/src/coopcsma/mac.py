"""Slotted CSMA contention: backoff draws, sensing, freezing, retries, NAV.

The engine drives these helpers from its event loop; they hold no
references to the network.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import RetryExhaustedError

BUSY = "busy"
IDLE = "idle"


def draw_backoff(attempt, cw_start, rng, srl=None):
    """Backoff length in slots, uniform on the integers [0, 2**(cw_start + attempt - 1)]."""
    if attempt < 0 or (srl is not None and attempt >= srl):
        raise RetryExhaustedError(f"attempt index {attempt} outside [0, {srl})")
    return int(rng.integers(0, 2 ** (cw_start + attempt - 1) + 1))


def sense(aggregate_power, cs_threshold):
    """Medium state for an aggregate power reading (noise included); strict comparison."""
    return BUSY if aggregate_power > cs_threshold else IDLE


@dataclass(frozen=True)
class BackoffState:
    attempt: int = 0
    remaining: int = 0
    frozen: bool = False
    cw_start: int = 5
    srl: int = 5
    idle_slots: int = 0  # idle time accumulated towards DIFS, in slots


def new_backoff(cw_start, srl, rng, attempt=0):
    return BackoffState(attempt, draw_backoff(attempt, cw_start, rng, srl), False, cw_start, srl, 0)


def backoff_step(state: BackoffState, medium, difs_slots):
    """Advance one slot. Returns ``(state, granted)``.

    A busy slot freezes the counter and restarts the DIFS wait; decrements
    only happen once ``difs_slots`` consecutive idle slots have passed.
    """
    if medium == BUSY:
        return replace(state, frozen=True, idle_slots=0), False
    waited = state.idle_slots + 1
    if waited <= difs_slots:
        state = replace(state, idle_slots=waited, frozen=waited < difs_slots)
        return state, waited == difs_slots and state.remaining == 0
    if state.remaining == 0:
        return replace(state, frozen=False, idle_slots=waited), True
    state = replace(state, remaining=state.remaining - 1, frozen=False, idle_slots=waited)
    return state, state.remaining == 0


def on_attempt_failure(state: BackoffState, rng):
    """Next attempt with a fresh draw, or ``None`` when the packet must be dropped."""
    nxt = state.attempt + 1
    if nxt >= state.srl:
        return None
    return new_backoff(state.cw_start, state.srl, rng, nxt)


def expiry_time(idle_since, remaining, difs, slot):
    """Time at which a countdown resumed at ``idle_since`` reaches zero."""
    return idle_since + difs + remaining * slot


def slots_consumed(idle_since, now, difs, slot, tol=1e-6):
    """Whole backoff slots elapsed between the end of DIFS and ``now``.

    ``tol`` is in slots and absorbs rounding at slot boundaries.
    """
    n = (now - idle_since - difs) / slot
    return max(0, int(math.floor(n + tol)))


@dataclass
class NavState:
    reserved_until: float = 0.0

    def active(self, now):
        return now < self.reserved_until

    def reserve(self, until):
        self.reserved_until = max(self.reserved_until, until)
