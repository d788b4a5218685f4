"""Path loss, time-correlated Rayleigh fading, SINR and capacity-based decoding.

All powers are linear milliwatts; dBm only appears in the conversion helpers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_toeplitz, toeplitz
from scipy.special import j0

from .errors import ConfigError, DegenerateGeometryError, TimeRegressionError, TraceGapError

SPEED_OF_LIGHT = 299_792_458.0
_SQRT_HALF = np.sqrt(0.5)


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(mw)


def free_space_ref_gain(carrier_hz: float) -> float:
    """Free-space power gain at 1 m, (c / 4 pi f)^2."""
    return (SPEED_OF_LIGHT / (4.0 * np.pi * carrier_hz)) ** 2


@dataclass(frozen=True)
class PathLossLaw:
    """Mean received power ``tx_power * ref_gain * d**-exponent``.

    ``ref_gain`` is the gain at the 1 m reference distance; 1.0 means the
    transmit power itself is received at 1 m.
    """

    tx_power: float
    exponent: float
    ref_gain: float = 1.0

    def __post_init__(self):
        if self.tx_power <= 0:
            raise ConfigError("transmit power must be positive")
        if self.exponent <= 2:
            raise ConfigError("path loss exponent must exceed 2")
        if self.ref_gain <= 0:
            raise ConfigError("reference gain must be positive")

    @classmethod
    def from_dbm(cls, tx_dbm, exponent, carrier_hz=None):
        ref = 1.0 if carrier_hz is None else free_space_ref_gain(carrier_hz)
        return cls(float(dbm_to_mw(tx_dbm)), exponent, ref)

    def mean_power(self, distance):
        return mean_rx_power(self, distance)


def mean_rx_power(law: PathLossLaw, distance):
    """Mean of the exponential received power at ``distance`` metres."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise DegenerateGeometryError("link distance must be positive")
    out = law.tx_power * law.ref_gain * d ** (-law.exponent)
    return float(out) if out.ndim == 0 else out


def jakes_correlation(tau, doppler):
    """Correlation J0(2 pi f_d tau) of a complex gain sampled ``tau`` apart."""
    return j0(2.0 * np.pi * np.asarray(doppler) * np.asarray(tau))


def complex_normal(rng, size=None):
    """Circularly-symmetric CN(0, 1) samples."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * np.sqrt(0.5)


@dataclass(frozen=True)
class LinkChannel:
    """Fading state of one ordered link.

    The power gain ``|gain|**2`` is Exp(1). Evolution is a first-order
    Gauss-Markov step whose one-step correlation equals the Jakes value
    for the elapsed lag.
    """

    pair: tuple
    doppler: float
    gain: complex
    last_update: float = 0.0

    @classmethod
    def new(cls, pair, doppler, rng, t=0.0):
        return cls(tuple(pair), doppler, complex(complex_normal(rng)), t)

    @property
    def power_gain(self):
        return abs(self.gain) ** 2

    def evolve(self, t_new, rng):
        return evolve_fading(self, t_new, rng)


def evolve_fading(ch: LinkChannel, t_new: float, rng) -> LinkChannel:
    lag = t_new - ch.last_update
    if lag < 0:
        raise TimeRegressionError(f"cannot evolve {ch.pair} from {ch.last_update} back to {t_new}")
    if lag == 0:
        return ch
    rho = float(jakes_correlation(lag, ch.doppler))
    g = rho * ch.gain + np.sqrt(max(0.0, 1.0 - rho * rho)) * complex(complex_normal(rng))
    return LinkChannel(ch.pair, ch.doppler, g, t_new)


class FadingField:
    """Vectorised fading state for every ordered pair of an ``n``-node network.

    Entries are evolved lazily: only the pairs a caller asks about are moved
    to the requested time.
    """

    def __init__(self, n, doppler, rng, t0=0.0, buffer=1 << 16):
        self.n = n
        self.doppler = doppler
        self.rng = rng
        self.gain = complex_normal(rng, (n, n))
        self.stamp = np.full((n, n), float(t0))
        self._omega = 2.0 * np.pi * doppler
        self._bufsize = buffer
        self._buf = np.empty(0)
        self._pos = 0

    def _innovations(self, shape):
        """CN(0, 1) draws taken from a pre-generated block of normals."""
        k = int(np.prod(shape, dtype=int))
        if self._pos + 2 * k > self._buf.size:
            self._buf = self.rng.standard_normal(max(self._bufsize, 2 * k))
            self._pos = 0
        z = self._buf[self._pos:self._pos + 2 * k]
        self._pos += 2 * k
        return (z[:k] + 1j * z[k:]).reshape(shape) * _SQRT_HALF

    def power_gain(self, tx, rx, t):
        """Evolve pairs (tx, rx) to time ``t`` and return their power gains.

        ``tx`` and ``rx`` broadcast like numpy fancy indices; each pair must
        appear only once.
        """
        lag = t - self.stamp[tx, rx]
        if lag.min() < -1e-12:
            raise TimeRegressionError("fading field asked to move backwards")
        rho = j0(self._omega * np.maximum(lag, 0.0))
        g = rho * self.gain[tx, rx] + np.sqrt(np.maximum(0.0, 1.0 - rho * rho)) * self._innovations(np.shape(rho))
        self.gain[tx, rx] = g
        self.stamp[tx, rx] = t
        return g.real ** 2 + g.imag ** 2

    def evolve_rows(self, rows, t):
        """Evolve every link out of the transmitters ``rows``; returns (len(rows), n) power gains."""
        lag = t - self.stamp[rows]
        if lag.min() < -1e-12:
            raise TimeRegressionError("fading field asked to move backwards")
        rho = j0(self._omega * np.maximum(lag, 0.0))
        g = rho * self.gain[rows] + np.sqrt(np.maximum(0.0, 1.0 - rho * rho)) * self._innovations(rho.shape)
        self.gain[rows] = g
        self.stamp[rows] = t
        return g.real ** 2 + g.imag ** 2


class JakesField:
    """Network-wide fading on a fixed time grid, for event-driven callers.

    Every ordered pair follows an AR(``order``) process fitted to the Jakes
    autocorrelation by Yule-Walker, stepped every ``step`` seconds and held
    constant in between. The correlation between any two reads therefore
    depends only on their time difference, however often the field is
    queried; a per-query Gauss-Markov update would not compose that way.
    Marginals are exactly CN(0, 1).
    """

    def __init__(self, n, doppler, rng, step=1e-3, order=200, ridge=1e-8):
        self.n = n
        self.doppler = doppler
        self.rng = rng
        self.step = float(step)
        self.order = p = int(order)
        r = j0(2.0 * np.pi * doppler * step * np.arange(p + 1))
        col = r[:p].copy()
        col[0] += ridge
        a = solve_toeplitz(col, r[1:])
        self._sigma = float(np.sqrt(max(col[0] - a @ r[1:], 0.0)))
        self._scale = 1.0 / np.sqrt(col[0])
        # coefficients ordered oldest to newest, to match the history window
        self._coef = a[::-1].copy()
        m = n * n
        chol = cholesky(toeplitz(col), lower=True)
        init = chol @ complex_normal(rng, (p, m))  # a stationary history, oldest first
        self._hist = np.empty((2 * p, m), dtype=complex)
        self._hist[:p] = init
        self._hist[p:] = init
        self._head = 0  # the window self._hist[head:head + p] holds the last p samples
        self.index = 0
        self.gain = (init[-1] * self._scale).reshape(n, n)
        self.stamp = 0.0

    def grid_index(self, t):
        return int(np.floor(t / self.step + 1e-9))

    def next_boundary(self, t):
        return (self.grid_index(t) + 1) * self.step

    def advance(self, t):
        """Move the field to the grid cell containing ``t``; returns True if it changed."""
        if t < self.stamp - 1e-12:
            raise TimeRegressionError("fading field asked to move backwards")
        self.stamp = max(self.stamp, t)
        k = self.grid_index(t)
        if k <= self.index:
            return False
        p, h = self.order, self._hist
        for _ in range(k - self.index):
            window = h[self._head:self._head + p]
            x = (self._coef @ window.view(float)).view(complex) + self._sigma * complex_normal(self.rng, h.shape[1])
            h[self._head] = x
            h[self._head + p] = x
            self._head = (self._head + 1) % p
        self.index = k
        self.gain = (x * self._scale).reshape(self.n, self.n)
        return True

    def power_gain(self, tx, rx, t):
        self.advance(t)
        g = self.gain[tx, rx]
        return g.real ** 2 + g.imag ** 2

    def evolve_rows(self, rows, t):
        self.advance(t)
        g = self.gain[rows]
        return g.real ** 2 + g.imag ** 2


def sinr(desired, interference, noise):
    """gamma = eta / (N + iota); ``interference`` may be a scalar or a sequence."""
    if noise <= 0:
        raise ConfigError("noise power must be positive")
    iota = float(np.sum(interference))
    return desired / (noise + iota)


def instantaneous_capacity(gamma, bandwidth):
    return bandwidth * np.log2(1.0 + np.asarray(gamma, dtype=float))


def decoded_bits(trace, bandwidth, *, tol=1e-12):
    """Information bits accumulated over a piecewise-constant SINR trace.

    ``trace`` is a sequence of ``(t_start, t_end, gamma)`` segments that
    must tile their interval without gaps.
    """
    seg = np.asarray(trace, dtype=float).reshape(-1, 3)
    if seg.size == 0:
        return 0.0
    starts, ends, gammas = seg.T
    if np.any(ends < starts):
        raise TraceGapError("segment ends before it starts")
    if np.any(np.abs(starts[1:] - ends[:-1]) > tol):
        raise TraceGapError("trace segments are not contiguous")
    if np.any(gammas < 0):
        raise ValueError("SINR must be non-negative")
    return math.fsum((ends - starts) * bandwidth * np.log2(1.0 + gammas))  # exact sum keeps it monotone
