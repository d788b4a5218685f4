"""CSMA-CSI and Coop-CSI decision logic.

Everything here is a pure function of channel snapshots taken when the
source wins contention; the engine owns timing and physical reception.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .channel import decoded_bits, instantaneous_capacity

DIRECT = "direct"
SPLIT = "split"
DEFER = "defer"

# relay exclusion reasons
CS_BUSY = "cs-busy"
HIDDEN_SYNC = "hidden-sync"
NAV = "nav"
TX_RX_BUSY = "tx-rx-busy"
EXCLUSION_REASONS = (CS_BUSY, HIDDEN_SYNC, NAV, TX_RX_BUSY)

# cooperative phase outcomes
SUCCESS = "success"
HDR_NO_SYNC_POWER = "header-loss/no-sync-power"
HDR_NO_SYNC_BUSY = "header-loss/no-sync-busy"
HDR_CHANNEL = "header-loss/channel"
LOSS_AT_RELAY = "data-loss-at-relay"
LOSS_OVER_CD = "data-loss-over-CD"
COOP_OUTCOMES = (SUCCESS, HDR_NO_SYNC_POWER, HDR_NO_SYNC_BUSY, HDR_CHANNEL, LOSS_AT_RELAY, LOSS_OVER_CD)

# reasons for a Coop-CSI source sending directly
NO_AVAIL_RELAYS = "no-avail-relays"
UNSUITABLE_RELAYS = "unsuitable-relays"
BELOW_GATE = "below-min-coop-rate"
NONCOOP_REASONS = (NO_AVAIL_RELAYS, UNSUITABLE_RELAYS, BELOW_GATE)


def compute_direct_rate(gamma_sd, bandwidth, epsilon):
    """Rate sustaining L(1 + epsilon) bits at the current SINR."""
    return float(instantaneous_capacity(gamma_sd, bandwidth)) / (1.0 + epsilon)


def min_rate_gate(rho_sd, threshold):
    """Whether the source looks for relays at all."""
    return rho_sd >= threshold


@dataclass(frozen=True)
class NeighborStatus:
    """What the source's genie knows about one neighbour at access time."""

    node: int
    engaged: bool = False          # transmitting, or an endpoint of an exchange
    overhearing: bool = False      # synchronised to a third-party frame
    overheard_hidden: bool = False # ...whose transmitter is outside the source's sensing range
    nav_active: bool = False
    sensed: float = 0.0


def exclusion_reason(status: NeighborStatus, cs_threshold, genie="off"):
    """Reason a neighbour cannot relay, or ``None`` if it is a candidate.

    ``all-relays-available`` ignores the sensing conditions (physical and
    virtual carrier sense) but still needs the node to be free.
    """
    if status.engaged:
        return TX_RX_BUSY
    if status.overhearing:
        return HIDDEN_SYNC if status.overheard_hidden else TX_RX_BUSY
    if genie == "all-relays-available":
        return None
    if status.nav_active:
        return NAV
    if status.sensed > cs_threshold:
        return CS_BUSY
    return None


def filter_candidates(statuses, cs_threshold, genie="off"):
    """Split neighbours into relay candidates and ``{node: reason}`` exclusions."""
    candidates, excluded = [], {}
    for st in statuses:
        reason = exclusion_reason(st, cs_threshold, genie)
        if reason is None:
            candidates.append(st.node)
        else:
            excluded[st.node] = reason
    return candidates, excluded


@dataclass(frozen=True)
class SplitOption:
    relay: int
    rho_sc: float
    rho_cd: float
    l1: float
    t_split: float
    t_sc: float = math.inf


def evaluate_split(rho_sc, gamma_sd, gamma_cd, payload, bandwidth, epsilon, relay=-1):
    """Two-phase plan through one relay.

    Phase one runs at ``rho_sc`` for L / rho_sc seconds, during which the
    destination is expected to gather ``l1`` bits at the current S-D
    capacity; the relay then sends the remaining L - l1 at
    rho_cd = C(gamma_cd) / (1 + epsilon). Returns a ``SplitOption``.
    """
    if rho_sc <= 0:
        return SplitOption(relay, rho_sc, 0.0, 0.0, math.inf)
    t_sc = payload / rho_sc
    l1 = t_sc * float(instantaneous_capacity(gamma_sd, bandwidth))
    rho_cd = float(instantaneous_capacity(gamma_cd, bandwidth)) / (1.0 + epsilon)
    rest = max(0.0, payload - l1)
    if rest == 0.0:
        t2 = 0.0
    elif rho_cd <= 0:
        t2 = math.inf
    else:
        t2 = rest / rho_cd
    return SplitOption(relay, rho_sc, rho_cd, l1, t_sc + t2, t_sc)


@dataclass
class RateDecision:
    rho_sd: float
    t_sd: float
    t_max: float
    candidates: list = field(default_factory=list)
    choice: str = DEFER
    relay: int | None = None
    t_star: float = math.inf
    searched: bool = False

    @property
    def option(self):
        for c in self.candidates:
            if c.relay == self.relay:
                return c
        return None


def decide(rho_sd, options, payload, rate_min, *, gate=None, forced=False):
    """Pick the fastest of direct, split via each candidate, or defer.

    ``options`` are ``SplitOption``s for the candidates (ignored when the
    direct rate misses ``gate``). Ties prefer direct, then the lowest relay
    id. ``forced`` drops the direct option whenever a feasible split exists.
    """
    gate = rate_min if gate is None else gate
    t_sd = math.inf if rho_sd <= 0 else payload / rho_sd
    t_max = payload / rate_min
    searched = min_rate_gate(rho_sd, gate)
    options = sorted(options, key=lambda o: (o.t_split, o.relay)) if searched else []
    dec = RateDecision(rho_sd, t_sd, t_max, options, searched=searched)

    best_split = options[0] if options else None
    use_direct = not (forced and best_split is not None and best_split.t_split <= t_max)
    best, choice, relay = math.inf, DEFER, None
    if use_direct and t_sd <= t_max:
        best, choice = t_sd, DIRECT
    if best_split is not None and best_split.t_split <= t_max and best_split.t_split < best:
        best, choice, relay = best_split.t_split, SPLIT, best_split.relay
    dec.choice, dec.relay = choice, relay
    dec.t_star = best if choice != DEFER else t_max
    return dec


def recheck_decision(dec: RateDecision, forced=False):
    """Independent brute-force check that ``dec`` realises the minimum time.

    Enumerates every option explicitly; returns True when consistent.
    """
    splits = [(c.t_split, 1, SPLIT, c.relay) for c in dec.candidates]
    opts = list(splits)
    if not (forced and any(o[0] <= dec.t_max for o in splits)):
        opts.append((dec.t_sd, 0, DIRECT, None))
    feasible = [o for o in opts if o[0] <= dec.t_max]
    if not feasible:
        return dec.choice == DEFER
    t, _, choice, relay = min(feasible, key=lambda o: (o[0], o[1], -1 if o[3] is None else o[3]))
    return dec.choice == choice and dec.relay == relay and math.isclose(dec.t_star, t)


@dataclass
class CooperativeSession:
    """Destination-side state of one relayed delivery."""

    packet: int
    source: int
    relay: int
    destination: int
    rho_sc: float
    rho_cd: float
    phase: int = 1
    cached_bits: float = 0.0
    failure: str | None = None

    def cache(self, bits):
        if bits < 0:
            raise ValueError("decoded bits cannot be negative")
        self.cached_bits += bits

    @property
    def established(self):
        return self.failure is None


@dataclass(frozen=True)
class PhaseTwoResult:
    delivered: bool
    reason: str


def run_phase_two(session: CooperativeSession, relay_decoded: bool, trace, bandwidth, payload):
    """Outcome of the relay's redundancy transmission at the destination.

    ``trace`` is the C-D SINR trace over the phase-two payload interval.
    Header losses recorded on the session in phase one take precedence,
    then a relay that never decoded the payload.
    """
    if session.failure is not None:
        return PhaseTwoResult(False, session.failure)
    if not relay_decoded:
        return PhaseTwoResult(False, LOSS_AT_RELAY)
    session.phase = 2
    session.cache(decoded_bits(trace, bandwidth))
    if session.cached_bits >= payload:
        return PhaseTwoResult(True, SUCCESS)
    return PhaseTwoResult(False, LOSS_OVER_CD)
