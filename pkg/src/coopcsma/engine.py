"""Discrete-event simulation of a single-hop CSMA network with genie CSI.

One ``Simulation`` is one replication: a random topology, Poisson traffic
to one-hop neighbours, time-correlated Rayleigh fading on every link and
a capacity-based reception model with synchronisation, header decoding
and incremental-redundancy accumulation for relayed packets.
"""
from __future__ import annotations

import heapq
import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import mac
from . import protocols as P
from .channel import JakesField, decoded_bits
from .config import ScenarioConfig
from .errors import ConfigError, InvariantViolation
from .metrics import MetricsLedger

log = logging.getLogger(__name__)

DATA = "data"
DATA1 = "data1"
DATA2 = "data2"
ACK = "ack"

_TIE = 1e-9  # lets a frame end be processed before a timeout due at the same instant


def generate_topology(cfg: ScenarioConfig, rng, max_redraws=1000):
    """Uniform positions with a minimum spacing and at least one neighbour each."""
    n = cfg.n_nodes
    for _ in range(max_redraws):
        pos = rng.random((n, 2)) * (cfg.area_x, cfg.area_y)
        if n < 2:
            return pos
        d = np.hypot(*(pos[:, None, :] - pos[None, :, :]).transpose(2, 0, 1))
        np.fill_diagonal(d, np.inf)
        if d.min() < cfg.min_separation:
            continue
        if np.all((d <= cfg.neighbor_radius).any(axis=1)):
            return pos
    raise ConfigError(f"no valid placement after {max_redraws} draws")


def neighbor_lists(pos, radius):
    d = np.hypot(*(pos[:, None, :] - pos[None, :, :]).transpose(2, 0, 1))
    np.fill_diagonal(d, np.inf)
    return [np.flatnonzero(row <= radius) for row in d], d


def generate_traffic(load_kbps, payload_bits, rng, neighbors, horizon):
    """Arrival times and destinations for one node up to ``horizon`` seconds.

    Returns ``(times, dests)``; empty when the node has no neighbours.
    """
    if load_kbps <= 0:
        raise ConfigError("offered load must be positive")
    if len(neighbors) == 0:
        log.warning("isolated node excluded from traffic generation")
        return np.empty(0), np.empty(0, dtype=int)
    rate = load_kbps * 1e3 / payload_bits
    times = []
    t = 0.0
    while True:
        t += rng.exponential(1.0 / rate)
        if t > horizon:
            break
        times.append(t)
    dests = rng.choice(neighbors, size=len(times))
    return np.array(times), np.asarray(dests, dtype=int)


@dataclass
class Packet:
    id: int
    src: int
    dst: int
    t_gen: float
    delivered: bool = False


@dataclass
class Frame:
    id: int
    kind: str
    tx: int
    rx: int
    packet: Packet
    start: float
    hdr_end: float
    end: float
    rate: float
    header_bits: int
    payload_bits: float
    nav_until: float
    exchange: "Exchange" = None


@dataclass
class Exchange:
    """A source's attempt: data (possibly relayed) plus ACK."""

    packet: Packet
    source: int
    dest: int
    relay: int | None
    decision: P.RateDecision
    airtime: float
    token: int
    engaged: set = field(default_factory=set)
    session: P.CooperativeSession | None = None
    relay_ok: bool = False
    done: bool = False
    measured: bool = False
    plan: tuple = (0.0, 0.0)  # phase-two payload bits and airtime


class Node:
    __slots__ = ("id", "queue", "packet", "attempt", "remaining", "idle_since", "expiry", "token", "lock",
                 "hdr_trace", "pl_trace", "hdr_ok", "gamma", "seg_t", "arrivals", "next_arrival")

    def __init__(self, i):
        self.id = i
        self.queue = deque()
        self.packet = None
        self.attempt = 0
        self.remaining = 0
        self.idle_since = 0.0
        self.expiry = math.inf
        self.token = 0
        self.lock = None
        self.hdr_trace = []
        self.pl_trace = []
        self.hdr_ok = False
        self.gamma = 0.0
        self.seg_t = 0.0
        self.arrivals = None
        self.next_arrival = 0


class Simulation:
    def __init__(self, cfg: ScenarioConfig, positions=None, *, keep_decisions=False):
        self.cfg = cfg
        ss = np.random.SeedSequence(cfg.seed)
        s_place, s_traffic, s_fading, s_mac = ss.spawn(4)
        if cfg.placement_seed is not None:
            s_place = np.random.SeedSequence(cfg.placement_seed)
        if positions is None:
            positions = generate_topology(cfg, np.random.default_rng(s_place))
        self.pos = np.asarray(positions, dtype=float).reshape(-1, 2)
        n = self.n = len(self.pos)
        self.neighbors, dist = neighbor_lists(self.pos, cfg.neighbor_radius)
        law = cfg.law
        with np.errstate(divide="ignore"):
            self.mean = np.where(np.isfinite(dist), law.tx_power * law.ref_gain * dist ** (-law.exponent), 0.0)
        self.fading = JakesField(n, cfg.doppler_hz, np.random.default_rng(s_fading), step=cfg.fading_refresh)
        self.mac_rng = np.random.default_rng(s_mac)
        self.noise = cfg.noise
        self.cs = cfg.cs_threshold
        self.detect = cfg.detection
        self.B = cfg.bandwidth_hz

        self.nodes = [Node(i) for i in range(n)]
        horizon = cfg.sim_time
        for i, rs in enumerate(s_traffic.spawn(n)):
            t, d = generate_traffic(cfg.load_kbps, cfg.payload_bits, np.random.default_rng(rs),
                                    self.neighbors[i], horizon) if cfg.load_kbps > 0 else (np.empty(0), [])
            self.nodes[i].arrivals = (t, d)

        self.all = np.arange(n)
        self.rx_pow = np.zeros((n, n))
        self.agg = np.full(n, self.noise)
        self.nav_until = np.zeros(n)
        self.engaged = np.zeros(n, dtype=int)
        self.transmitting = np.zeros(n, dtype=bool)
        self.contending = np.zeros(n, dtype=bool)
        self.committed = np.zeros(n, dtype=bool)  # countdown ends before a new carrier can be noticed
        self.busy = np.zeros(n, dtype=bool)
        self.active = {}
        self.locked = set()
        self.heap = []
        self.seq = 0
        self.now = 0.0
        self.tick_pending = False
        self.frame_ids = 0
        self.packet_ids = 0
        self.ledger = MetricsLedger(cfg.protocol, cfg.warmup, cfg.duration, cfg.payload_bits,
                                    scenario=(cfg.n_nodes, cfg.area_x, cfg.area_y, cfg.load_kbps, cfg.seed,
                                              cfg.placement_seed, cfg.warmup, cfg.duration))
        self.event_log = [] if cfg.event_log else None
        self.decisions = [] if keep_decisions else None
        self.pending = 0
        self.hdr_air = cfg.header_bits / cfg.rate_ctrl
        self.ack_air = cfg.ack_bits / cfg.rate_ctrl
        self.coop = cfg.protocol == "coop-csi"

    # ------------------------------------------------------------------ queue
    def schedule(self, t, handler, *args):
        """Queue ``handler(*args)`` at ``t``."""
        t = float(t)
        if t < self.now - 1e-12:
            raise InvariantViolation(f"event at {t} scheduled before clock {self.now}")
        self.seq += 1
        heapq.heappush(self.heap, (t, self.seq, handler, args))

    def step(self):
        t, _, handler, args = heapq.heappop(self.heap)
        if t < self.now - 1e-12:
            raise InvariantViolation(f"popped event at {t} before clock {self.now}")
        self._advance(t)
        handler(*args)
        return t

    def start(self):
        """Queue the first arrival of every node; ``run`` calls this."""
        for node in self.nodes:
            self._schedule_arrival(node)

    def run(self):
        self.start()
        end = self.cfg.sim_time
        while self.heap and self.heap[0][0] <= end:
            self.step()
        self._advance(max(self.now, end))
        self.ledger.in_flight = self.pending
        return self.ledger

    @property
    def measuring(self):
        return self.now >= self.cfg.warmup

    def _log(self, *entry):
        if self.event_log is not None:
            self.event_log.append((self.now, *entry))

    # -------------------------------------------------------------- physics
    def _advance(self, t):
        """Close reception segments up to ``t`` and move the fading grid there."""
        if t < self.now - 1e-12:
            raise InvariantViolation("clock moved backwards")
        for j in self.locked:
            nd = self.nodes[j]
            if t > nd.seg_t:
                f = nd.lock
                trace = nd.hdr_trace if t <= f.hdr_end + 1e-12 else nd.pl_trace
                trace.append((nd.seg_t, t, nd.gamma))
                nd.seg_t = t
        self.now = max(self.now, t)
        if self.fading.advance(self.now) and self.active:
            a = np.fromiter(self.active, dtype=int)
            self.rx_pow[a] = self.mean[a] * self.fading.evolve_rows(a, self.now)
            self._recompute()

    def _recompute(self):
        self.agg = self.noise + self.rx_pow.sum(axis=0)
        for j in self.locked:
            nd = self.nodes[j]
            s = self.rx_pow[nd.lock.tx, j]
            nd.gamma = s / (self.agg[j] - s)

    def sensed_power(self, j):
        return self.agg[j]

    def _refresh(self):
        now = self.now
        busy = (self.agg > self.cs) | (self.nav_until > now) | (self.engaged > 0) | self.transmitting
        changed = np.flatnonzero((busy != self.busy) & self.contending & ~self.committed)
        self.busy = busy
        cfg = self.cfg
        for i in changed:
            nd = self.nodes[i]
            if busy[i]:
                if nd.expiry - now < cfg.slot - 1e-12:
                    # sensing happens once per slot: a carrier born during the last slot goes unnoticed
                    self.committed[i] = True
                    continue
                nd.token += 1
                used = mac.slots_consumed(nd.idle_since, now, cfg.difs, cfg.slot)
                nd.remaining = max(0, nd.remaining - used)
                nd.expiry = math.inf
            else:
                nd.token += 1
                self._arm(nd)

    def _tick(self):
        if self.active:
            self._refresh()
            self.schedule(self.fading.next_boundary(self.now), self._tick)
        else:
            self.tick_pending = False

    # -------------------------------------------------------------- traffic
    def _schedule_arrival(self, nd):
        t, d = nd.arrivals
        k = nd.next_arrival
        if k < len(t):
            self.schedule(t[k], self._on_arrival, nd.id)

    def _on_arrival(self, i):
        nd = self.nodes[i]
        t, d = nd.arrivals
        k = nd.next_arrival
        nd.next_arrival += 1
        self.packet_ids += 1
        pkt = Packet(self.packet_ids, i, int(d[k]), self.now)
        self.ledger.total_generated += 1
        if self.measuring:
            self.ledger.generated += 1
        self.pending += 1
        nd.queue.append(pkt)
        self._log("gen", pkt.id, i, pkt.dst)
        if nd.packet is None:
            self._next_packet(nd)
        self._schedule_arrival(nd)

    def _next_packet(self, nd):
        if not nd.queue:
            nd.packet = None
            return
        nd.packet = nd.queue.popleft()
        nd.attempt = 0
        self._contend(nd)

    def _contend(self, nd):
        cfg = self.cfg
        nd.remaining = mac.draw_backoff(nd.attempt, cfg.cw_start, self.mac_rng, cfg.srl)
        i = nd.id
        self.contending[i] = True
        nd.token += 1
        now = self.now
        self.busy[i] = bool(self.agg[i] > self.cs or self.nav_until[i] > now or self.engaged[i] > 0
                            or self.transmitting[i])
        nd.expiry = math.inf
        if not self.busy[i]:
            self._arm(nd)

    def _arm(self, nd):
        """Start (or resume) the countdown from an idle medium now."""
        cfg = self.cfg
        nd.idle_since = self.now
        nd.expiry = mac.expiry_time(self.now, nd.remaining, cfg.difs, cfg.slot)
        self.schedule(nd.expiry, self._on_expiry, nd.id, nd.token)

    def _resolve(self, pkt, delivered):
        led = self.ledger
        self.pending -= 1
        if delivered:
            led.total_delivered += 1
        else:
            led.total_dropped += 1
        if pkt.t_gen >= self.cfg.warmup:
            if delivered:
                led.delivered += 1
            else:
                led.dropped += 1
        self._log("resolve", pkt.id, delivered)

    def _attempt_failed(self, nd):
        nd.attempt += 1
        if nd.attempt >= self.cfg.srl:
            self._resolve(nd.packet, nd.packet.delivered)
            self._next_packet(nd)
        else:
            self._contend(nd)

    # -------------------------------------------------------------- access
    def _on_expiry(self, i, token):
        nd = self.nodes[i]
        if token != nd.token or not self.contending[i]:
            return
        self._advance(self.now)  # exact channel state for the genie
        self._refresh()
        if token != nd.token:  # medium turned busy at this very instant
            return
        self.contending[i] = False
        self.committed[i] = False
        nd.expiry = math.inf
        nd.token += 1
        self._access(nd)

    def _gamma_sd(self, s, d):
        eta_sd = self.mean[s, d] * self.fading.power_gain(s, d, self.now)
        return float(eta_sd / self.agg[d])

    def _neighbor_status(self, s, c):
        nd = self.nodes[c]
        f = nd.lock
        overhearing = f is not None
        # the source cannot sense the overheard transmitter on its own right now
        hidden = overhearing and self.rx_pow[f.tx, s] + self.noise <= self.cs
        return P.NeighborStatus(int(c), bool(self.engaged[c] > 0 or self.transmitting[c]), overhearing, bool(hidden),
                                bool(self.nav_until[c] > self.now), float(self.agg[c]))

    def _decide(self, s, d):
        cfg = self.cfg
        L = cfg.payload_bits
        gamma_sd = self._gamma_sd(s, d)
        rho_sd = P.compute_direct_rate(gamma_sd, self.B, cfg.epsilon)
        options = []
        excluded = {}
        gate = cfg.coop_gate if self.coop else math.inf
        if P.min_rate_gate(rho_sd, gate):
            statuses = [self._neighbor_status(s, c) for c in self.neighbors[s] if c != d]
            cands, excluded = P.filter_candidates(statuses, self.cs, cfg.genie)
            if cands:
                c = np.asarray(cands, dtype=int)
                k = len(c)
                tx = np.concatenate([np.full(k, s), c])
                rx = np.concatenate([c, np.full(k, d)])
                g = self.fading.power_gain(tx, rx, self.now)
                eta_sc = self.mean[s, c] * g[:k]
                eta_cd = self.mean[c, d] * g[k:]
                gamma_sc = eta_sc / self.agg[c]
                gamma_cd = eta_cd / self.agg[d]
                for j in range(k):
                    rho_sc = P.compute_direct_rate(gamma_sc[j], self.B, cfg.epsilon)
                    options.append(P.evaluate_split(rho_sc, gamma_sd, gamma_cd[j], L, self.B, cfg.epsilon,
                                                    relay=int(c[j])))
        dec = P.decide(rho_sd, options, L, cfg.rate_min, gate=gate,
                       forced=self.coop and cfg.genie == "forced-cooperation")
        return dec, excluded

    def _access(self, nd):
        cfg = self.cfg
        s = nd.id
        pkt = nd.packet
        d = pkt.dst
        dec, excluded = self._decide(s, d)
        if self.decisions is not None:
            self.decisions.append(dec)
        led = self.ledger
        measuring = self.measuring
        if measuring:
            led.decisions[dec.choice] += 1
            for reason in excluded.values():
                led.exclusions[reason] += 1
            if self.coop and dec.choice == P.DIRECT:
                if not dec.searched:
                    led.noncoop[P.BELOW_GATE] += 1
                elif not dec.candidates:
                    led.noncoop[P.NO_AVAIL_RELAYS] += 1
                else:
                    led.noncoop[P.UNSUITABLE_RELAYS] += 1
        self._log("decide", pkt.id, s, d, dec.choice, dec.relay)
        if dec.choice == P.DEFER:
            self._attempt_failed(nd)
            return

        L = cfg.payload_bits
        now = self.now
        nd.token += 1
        if dec.choice == P.DIRECT:
            airtime = L / dec.rho_sd
            data_end = now + self.hdr_air + airtime
            ack_end = data_end + cfg.sifs + self.ack_air
            ex = Exchange(pkt, s, d, None, dec, airtime, nd.token, measured=measuring)
            frame = self._frame(DATA, s, d, pkt, dec.rho_sd, cfg.header_bits, L, airtime, ack_end, ex)
        else:
            opt = dec.option
            rest = max(0.0, L - opt.l1)
            t2 = rest / opt.rho_cd if rest > 0 else 0.0
            t1 = L / opt.rho_sc
            p1_end = now + self.hdr_air + t1
            ack_end = p1_end + cfg.sifs + self.hdr_air + t2 + cfg.sifs + self.ack_air
            ex = Exchange(pkt, s, d, opt.relay, dec, t1 + t2, nd.token, measured=measuring)
            ex.session = P.CooperativeSession(pkt.id, s, opt.relay, d, opt.rho_sc, opt.rho_cd)
            ex.plan = (rest, t2)
            frame = self._frame(DATA1, s, opt.relay, pkt, opt.rho_sc, cfg.header_bits, L, t1, ack_end, ex)
        for j in (s, d, ex.relay):
            if j is not None:
                self._engage(ex, j)
        self.schedule(ack_end + _TIE, self._on_timeout, ex)
        self._start_frame(frame)

    def _frame(self, kind, tx, rx, pkt, rate, hbits, pbits, pair, nav_until, ex):
        self.frame_ids += 1
        now = self.now
        hdr_end = now + hbits / self.cfg.rate_ctrl
        return Frame(self.frame_ids, kind, tx, rx, pkt, now, hdr_end, hdr_end + pair, rate, hbits, pbits,
                     nav_until, ex)

    def _engage(self, ex, j):
        if j not in ex.engaged:
            ex.engaged.add(j)
            self.engaged[j] += 1

    def _release(self, ex, j):
        if j in ex.engaged:
            ex.engaged.discard(j)
            self.engaged[j] -= 1
            self._refresh()

    # ------------------------------------------------------------ reception
    def _intended(self, f):
        if f.kind == DATA1:
            return (f.rx, f.exchange.dest)
        return (f.rx,)

    def _start_frame(self, f):
        tx = f.tx
        self.active[tx] = f
        self.transmitting[tx] = True
        self.ledger.frames_sent[f.kind] += self.measuring
        self._log("tx", f.kind, f.id, tx, f.rx, f.packet.id)
        own = self.nodes[tx]
        if own.lock is not None:  # half duplex: an ongoing reception is abandoned
            g = own.lock
            if g.kind == DATA1 and g.exchange.dest == tx and g.exchange.session.failure is None:
                g.exchange.session.failure = P.HDR_NO_SYNC_BUSY
            self._unlock(own)
        self.rx_pow[tx] = self.mean[tx] * self.fading.evolve_rows(np.array([tx]), self.now)[0]
        rx = self.rx_pow[tx]
        for j in np.flatnonzero(rx >= self.detect):
            nd = self.nodes[j]
            if self.transmitting[j] or nd.lock is not None:
                continue
            nd.lock = f
            nd.hdr_trace, nd.pl_trace = [], []
            nd.hdr_ok = False
            nd.seg_t = self.now
            self.locked.add(int(j))
        self._recompute()
        if f.kind == DATA1:
            d = f.exchange.dest
            if self.nodes[d].lock is not f:
                reason = P.HDR_NO_SYNC_POWER if rx[d] < self.detect else P.HDR_NO_SYNC_BUSY
                f.exchange.session.failure = reason
        self.schedule(f.hdr_end, self._on_header_end, f)
        self.schedule(f.end, self._on_frame_end, f)
        if not self.tick_pending:
            self.tick_pending = True
            self.schedule(self.fading.next_boundary(self.now), self._tick)
        self._refresh()

    def _unlock(self, nd):
        nd.lock = None
        self.locked.discard(nd.id)

    def _on_header_end(self, f):
        intended = self._intended(f)
        bits_needed = f.header_bits
        for j in [j for j in self.locked if self.nodes[j].lock is f]:
            nd = self.nodes[j]
            ok = decoded_bits(nd.hdr_trace, self.B) >= bits_needed
            nd.hdr_ok = ok
            if not ok:
                self._unlock(nd)
                if f.kind == DATA1 and j == f.exchange.dest:
                    f.exchange.session.failure = P.HDR_CHANNEL
            elif j not in intended and f.nav_until > self.now:
                if f.nav_until > self.nav_until[j]:
                    self.nav_until[j] = f.nav_until
                    self.schedule(f.nav_until, self._refresh)
        self._refresh()

    def _payload_bits(self, j, f):
        """Bits decoded by node j over the payload of frame f (0 if not locked with a good header)."""
        nd = self.nodes[j]
        if nd.lock is not f or not nd.hdr_ok:
            return None
        return decoded_bits(nd.pl_trace, self.B)

    def _on_frame_end(self, f):
        tx = f.tx
        # powers and segments were closed at this instant by _advance
        results = {j: self._payload_bits(j, f) for j in self._intended(f)}
        for j in [j for j in self.locked if self.nodes[j].lock is f]:
            self._unlock(self.nodes[j])
        del self.active[tx]
        self.transmitting[tx] = False
        self.rx_pow[tx] = 0.0
        self._recompute()
        ex = f.exchange
        cfg = self.cfg
        L = cfg.payload_bits
        if f.kind == DATA:
            bits = results[f.rx]
            if bits is not None and bits >= L:
                self._delivered(ex)
                self._send_ack(ex)
            else:
                self._release(ex, ex.dest)
        elif f.kind == DATA1:
            bits_c = results[f.rx]
            ex.relay_ok = bits_c is not None and bits_c >= L
            bits_d = results[ex.dest]
            sess = ex.session
            if sess.failure is None and bits_d is None:
                sess.failure = P.HDR_CHANNEL
            if bits_d is not None:
                sess.cache(bits_d)
            if ex.relay_ok:
                rest, t2 = ex.plan
                f2 = self._frame(DATA2, ex.relay, ex.dest, ex.packet, sess.rho_cd, cfg.header_bits, rest, t2,
                                 0.0, ex)
                self.schedule(self.now + cfg.sifs, self._start_relay, f2, ex)
            else:
                self._coop_outcome(ex, sess.failure or P.LOSS_AT_RELAY)
                self._release(ex, ex.relay)
                self._release(ex, ex.dest)
        elif f.kind == DATA2:
            nd_bits = results[ex.dest]
            sess = ex.session
            self._release(ex, ex.relay)
            if nd_bits is None:
                outcome = sess.failure or P.LOSS_OVER_CD
            else:
                seg = self.nodes[ex.dest].pl_trace
                res = P.run_phase_two(sess, True, seg, self.B, L)
                outcome = res.reason
            self._coop_outcome(ex, outcome)
            if outcome == P.SUCCESS:
                self._delivered(ex)
                self._send_ack(ex)
            else:
                self._release(ex, ex.dest)
        elif f.kind == ACK:
            self._release(ex, ex.dest)
            if results[f.rx] is not None and not ex.done:
                self._finish(ex, True)
        self._refresh()

    def _start_relay(self, f2, ex):
        now = self.now
        f2.start = now
        f2.hdr_end = now + self.hdr_air
        f2.end = f2.hdr_end + ex.plan[1]
        f2.nav_until = f2.end + self.cfg.sifs + self.ack_air
        self._start_frame(f2)

    def _send_ack(self, ex):
        f = self._frame(ACK, ex.dest, ex.source, ex.packet, self.cfg.rate_ctrl, self.cfg.ack_bits, 0, 0.0, 0.0, ex)
        self.schedule(self.now + self.cfg.sifs, self._start_ack, f)

    def _start_ack(self, f):
        now = self.now
        f.start = now
        f.hdr_end = f.end = now + self.ack_air
        f.nav_until = f.end
        self._start_frame(f)

    def _coop_outcome(self, ex, outcome):
        if ex.measured:
            self.ledger.coop_outcomes[outcome] += 1
        self._log("coop", ex.packet.id, outcome)

    def _delivered(self, ex):
        pkt = ex.packet
        if ex.measured:
            self.ledger.record_duration(P.SPLIT if ex.relay is not None else P.DIRECT, ex.airtime)
        if not pkt.delivered:
            pkt.delivered = True
            if self.measuring:
                self.ledger.delivered_bits += self.cfg.payload_bits
                self.ledger.deliveries += 1
            self._log("deliver", pkt.id, pkt.src, pkt.dst, self.cfg.payload_bits)

    def _finish(self, ex, success):
        ex.done = True
        for j in list(ex.engaged):
            self._release(ex, j)
        nd = self.nodes[ex.source]
        if success:
            self._resolve(ex.packet, True)
            self._next_packet(nd)
        else:
            self._attempt_failed(nd)

    def _on_timeout(self, ex):
        if not ex.done:
            self._finish(ex, False)

    # ------------------------------------------------------------ auditing
    def brute_force_sensed(self):
        """Sensed power rebuilt from path loss and the current fading state of every active link."""
        out = np.full(self.n, self.noise)
        for tx in self.active:
            g = self.fading.gain[tx]
            out += self.mean[tx] * (g.real ** 2 + g.imag ** 2)
        return out

    def in_flight(self):
        return self.pending


def simulate(cfg: ScenarioConfig, positions=None, **kw):
    """Run one replication; returns the finished ``Simulation``."""
    sim = Simulation(cfg, positions, **kw)
    sim.run()
    return sim
