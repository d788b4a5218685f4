"""Spatial probability fields induced by carrier sensing.

``idle_probability`` is the chance that a node senses a single Rayleigh
faded transmitter below the carrier-sense threshold. The availability
field averages it over a carrier-sense-biased interferer position
(grid quadrature), the relay-gain field averages the split-region
probability the same way (Monte Carlo).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from ..config import ScenarioConfig
from ..errors import ConfigError, QuadratureError, SamplingStarvationError
from ..geometry import DEFAULT_REGION, Region, distance
from .throughput import capacities, coop_rate, split_region

# distances are floored here so co-located points stay finite
MIN_DISTANCE = 1.0


def _defaults(law, cs_threshold, noise):
    cfg = ScenarioConfig()
    return (law or cfg.law,
            cfg.cs_threshold if cs_threshold is None else cs_threshold,
            cfg.noise if noise is None else noise)


def _idle_from_distance(d, law, cs_threshold, noise):
    d = np.asarray(d, dtype=float)
    with np.errstate(divide="ignore"):
        mean = np.where(d > 0, law.tx_power * law.ref_gain * np.where(d > 0, d, 1.0) ** (-law.exponent), np.inf)
        return -np.expm1(-(cs_threshold - noise) / mean)


def idle_probability(p_s, p_i, law=None, cs_threshold=None, noise=None):
    """Pr{eta_si + N < Lambda} = 1 - exp(-(Lambda - N) / (P d^-alpha))."""
    law, cs_threshold, noise = _defaults(law, cs_threshold, noise)
    if cs_threshold <= noise:
        raise ConfigError("sensing impossible: threshold not above noise")
    d = distance(p_s, p_i)
    if np.any(d <= 0):
        raise ValueError("interferer must not coincide with the sensing node")
    out = _idle_from_distance(d, law, cs_threshold, noise)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class Field:
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray  # indexed [ix, iy]
    stderr: np.ndarray | None = None
    residual: float | None = None

    def at(self, x, y):
        ix = int(np.argmin(np.abs(self.xs - x)))
        iy = int(np.argmin(np.abs(self.ys - y)))
        return float(self.values[ix, iy])


def _trapezoid_weights(n):
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


def _idle_field_once(p_s, region, window, step, law, cs_threshold, noise):
    xs, ys = region.nodes(step)
    weights = np.outer(_trapezoid_weights(xs.size), _trapezoid_weights(ys.size))
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    w = _idle_from_distance(np.hypot(X - p_s[0], Y - p_s[1]), law, cs_threshold, noise) * weights

    # window nodes sit on the same lattice (offsets counted from region origin)
    kx0 = int(round((window.x0 - region.x0) / step))
    kx1 = int(round((window.x1 - region.x0) / step))
    ky0 = int(round((window.y0 - region.y0) / step))
    ky1 = int(round((window.y1 - region.y0) / step))
    dx = np.arange(kx0 - (xs.size - 1), kx1 + 1)
    dy = np.arange(ky0 - (ys.size - 1), ky1 + 1)
    kernel = _idle_from_distance(step * np.hypot(dx[:, None], dy[None, :]), law, cs_threshold, noise)
    num = fftconvolve(kernel, w, mode="valid")
    wx = region.x0 + step * np.arange(kx0, kx1 + 1)
    wy = region.y0 + step * np.arange(ky0, ky1 + 1)
    return wx, wy, num / w.sum()


def _snap(window, region, step):
    """Window shrunk/expanded onto the ``step`` lattice anchored at the region origin."""
    sx = lambda v: region.x0 + step * round((v - region.x0) / step)
    sy = lambda v: region.y0 + step * round((v - region.y0) / step)
    return Region(sx(window.x0), sx(window.x1), sy(window.y0), sy(window.y1))


def relay_idle_field(p_s=(0.0, 0.0), region: Region = DEFAULT_REGION, window: Region | None = None, step=0.5, *,
                     law=None, cs_threshold=None, noise=None, check=True, tol=0.005):
    """Probability that a relay at each window node senses the medium idle.

    The interferer is spread over ``region`` with density proportional to
    its own idle probability w.r.t. the source. Integrals use the
    trapezoid rule on a ``step`` lattice; with ``check`` the lattice is
    halved and the largest relative change is returned as ``residual``
    (``QuadratureError`` above ``tol``).
    """
    law, cs_threshold, noise = _defaults(law, cs_threshold, noise)
    window = _snap(window or region, region, step)
    wx, wy, vals = _idle_field_once(p_s, region, window, step, law, cs_threshold, noise)
    field = Field(wx, wy, vals)
    if check:
        _, _, fine = _idle_field_once(p_s, region, window, step / 2, law, cs_threshold, noise)
        fine = fine[::2, ::2]
        residual = float(np.max(np.abs(vals - fine) / np.abs(fine)))
        field.residual = residual
        if residual > tol:
            raise QuadratureError("idle field did not converge under grid halving", residual)
    return field


def sample_biased_positions(n, p_s, region, rng, law, cs_threshold, noise, max_rounds=10_000):
    """``n`` points in ``region`` with density proportional to the idle probability w.r.t. ``p_s``."""
    env = _idle_from_distance(region.farthest_distance(p_s), law, cs_threshold, noise)
    out = np.empty((0, 2))
    for _ in range(max_rounds):
        need = n - len(out)
        if need <= 0:
            return out[:n]
        cand = region.uniform(rng, max(2 * need, 1024))
        acc = _idle_from_distance(distance(cand, p_s), law, cs_threshold, noise) / env
        out = np.concatenate([out, cand[rng.random(len(cand)) < acc]])
    raise SamplingStarvationError("could not draw biased interferer positions")


def relay_gain_field(p_s=(0.0, 0.0), p_d=(60.0, 0.0), xs=None, ys=None, n_samples=10**5, seed=0, *,
                     region: Region = DEFAULT_REGION, law=None, cs_threshold=None, noise=None, bandwidth=1e6):
    """Probability that a relay at (x, y) lands in the split region.

    One set of interferer positions and unit exponentials is shared by
    all grid points.
    """
    if n_samples < 10**5:
        raise ValueError("relay_gain_field needs at least 1e5 samples")
    law, cs_threshold, noise = _defaults(law, cs_threshold, noise)
    xs = np.arange(-30.0, 91.0, 5.0) if xs is None else np.asarray(xs, dtype=float)
    ys = np.arange(-40.0, 41.0, 5.0) if ys is None else np.asarray(ys, dtype=float)
    rng = np.random.default_rng(seed)
    p_i = sample_biased_positions(n_samples, p_s, region, rng, law, cs_threshold, noise)
    std = rng.standard_exponential((5, n_samples))
    mean = lambda d: law.mean_power(np.maximum(d, MIN_DISTANCE))
    m_sd = mean(distance(p_s, p_d))
    iota_d = mean(distance(p_i, p_d))
    vals = np.empty((xs.size, ys.size))
    for ix, x in enumerate(xs):
        for iy, y in enumerate(ys):
            p_c = (x, y)
            c_sd, c_sc, c_cd = capacities(std, m_sd, mean(distance(p_s, p_c)), mean(distance(p_c, p_d)),
                                          mean(distance(p_i, p_c)), iota_d, noise, bandwidth)
            vals[ix, iy] = split_region(c_sd, c_sc, c_cd).mean()
    return Field(xs, ys, vals, np.sqrt(vals * (1 - vals) / n_samples))


def _sample_configurations(k, n_configs, p_s, region, rng, law, cs_threshold, noise, max_rounds):
    """Sequential rejection sampling of ``n_configs`` k-interferer layouts at once.

    Interferer j is accepted with probability F(p_s, p_j) prod_m F(p_m, p_j).
    Each factor is divided by its maximum over the region, which leaves the
    accepted law unchanged but keeps acceptance rates workable.
    """
    pts = np.empty((n_configs, k, 2))
    anchors = [np.broadcast_to(np.asarray(p_s, dtype=float), (n_configs, 2))]
    corners = region.corners
    for j in range(k):
        pending = np.arange(n_configs)
        for _ in range(max_rounds):
            if pending.size == 0:
                break
            cand = region.uniform(rng, pending.size)
            acc = np.ones(pending.size)
            for a in anchors:
                a_p = a[pending]
                far = np.max(np.hypot(corners[None, :, 0] - a_p[:, None, 0], corners[None, :, 1] - a_p[:, None, 1]), axis=1)
                acc *= _idle_from_distance(distance(cand, a_p), law, cs_threshold, noise) / \
                    _idle_from_distance(far, law, cs_threshold, noise)
            ok = rng.random(pending.size) < acc
            pts[pending[ok], j] = cand[ok]
            pending = pending[~ok]
        else:
            raise SamplingStarvationError(f"interferer {j + 1} of {k}: retry budget exhausted")
        if pending.size:
            raise SamplingStarvationError(f"interferer {j + 1} of {k}: retry budget exhausted")
        anchors.append(pts[:, j].copy())
    return pts


def sample_csma_interferers(k, p_s=(0.0, 0.0), region: Region = DEFAULT_REGION, rng=None, *, law=None,
                            cs_threshold=None, noise=None, max_rounds=100_000, n_configs=None):
    """Positions of ``k`` interferers that all respect carrier sensing.

    Returns a ``(k, 2)`` array, or ``(n_configs, k, 2)`` when ``n_configs``
    is given.
    """
    if k < 1:
        raise ValueError("need at least one interferer")
    law, cs_threshold, noise = _defaults(law, cs_threshold, noise)
    rng = np.random.default_rng(rng)
    n = 1 if n_configs is None else n_configs
    pts = _sample_configurations(k, n, p_s, region, rng, law, cs_threshold, noise, max_rounds)
    return pts[0] if n_configs is None else pts


@dataclass
class AvailabilityCurve:
    k: int
    deltas: np.ndarray
    ratio: np.ndarray
    stderr: np.ndarray


def availability_ratio(k, deltas, p_s=(0.0, 0.0), p_d=(60.0, 0.0), n_configs=200_000, seed=0, *,
                       region: Region = DEFAULT_REGION, law=None, cs_threshold=None, noise=None):
    """M(d_sc) / M(0) for a relay on the source-destination line with ``k`` interferers.

    The relay senses idle only if each interferer individually stays below
    the threshold (product of idle probabilities).
    """
    law, cs_threshold, noise = _defaults(law, cs_threshold, noise)
    rng = np.random.default_rng(seed)
    cfgs = _sample_configurations(k, n_configs, p_s, region, rng, law, cs_threshold, noise, 100_000)
    p_s = np.asarray(p_s, dtype=float)
    u = np.asarray(p_d, dtype=float) - p_s
    u /= np.linalg.norm(u)
    base = np.prod(_idle_from_distance(distance(cfgs, p_s), law, cs_threshold, noise), axis=1)
    deltas = np.asarray(deltas, dtype=float)
    ratio = np.empty(deltas.size)
    se = np.empty(deltas.size)
    for i, dlt in enumerate(deltas):
        p_c = p_s + dlt * u
        v = np.prod(_idle_from_distance(distance(cfgs, p_c), law, cs_threshold, noise), axis=1)
        r = v.mean() / base.mean()
        ratio[i] = r
        se[i] = (v - r * base).std(ddof=1) / np.sqrt(n_configs) / base.mean()
    return AvailabilityCurve(k, deltas, ratio, se)


@dataclass
class BiasedGain:
    d_sd: float
    gain_uniform: float
    gain_csma: float
    lost_coop_fraction: float
    duration_ratio: float
    sigma2: float

    @property
    def relative_reduction(self):
        """Share of the uniform-interference excess gain lost under carrier sensing."""
        return (self.gain_uniform - self.gain_csma) / (self.gain_uniform - 1.0)


def biased_gain_comparison(d_sd, region: Region = DEFAULT_REGION, n_trials=10**6, seed=0, *, law=None,
                           cs_threshold=None, noise=None, bandwidth=1e6, payload=5000, rate_min=0.95e6,
                           batch=500_000):
    """Cooperation gain with a uniformly placed relay, with and without carrier sensing.

    Carrier-sense case: one interferer biased by the source's sensing,
    interference at relay and destination tied to its position, relay
    usable with its idle probability (averaged analytically). Uniform case:
    i.i.d. interference whose mean matches the carrier-sense case at the
    destination, relay always usable. Durations are averaged over performed
    split transmissions no longer than ``payload / rate_min``.
    """
    law, cs_threshold, noise = _defaults(law, cs_threshold, noise)
    rng = np.random.default_rng(seed)
    p_s = np.zeros(2)
    p_d = np.array([float(d_sd), 0.0])
    mean = lambda d: law.mean_power(np.maximum(d, MIN_DISTANCE))
    m_sd = mean(d_sd)
    t_max = payload / rate_min

    # first pass fixes sigma2 for the uniform case from the biased interferer law
    probe = sample_biased_positions(min(n_trials, 10**6), p_s, region, rng, law, cs_threshold, noise)
    sigma2 = float(mean(distance(probe, p_d)).mean())

    acc = dict(dir_u=0.0, coop_u=0.0, dir_c=0.0, coop_c=0.0, split_c=0.0, lost_c=0.0,
               dur_u=0.0, n_u=0.0, dur_c=0.0, n_c=0.0)
    done = 0
    while done < n_trials:
        n = min(batch, n_trials - done)
        p_c = region.uniform(rng, n)
        p_i = sample_biased_positions(n, p_s, region, rng, law, cs_threshold, noise)
        std = rng.standard_exponential((5, n))
        m_sc = mean(distance(p_s, p_c))
        m_cd = mean(distance(p_c, p_d))

        c_sd, c_sc, c_cd = capacities(std, m_sd, m_sc, m_cd, sigma2, sigma2, noise, bandwidth)
        rate, sp = coop_rate(c_sd, c_sc, c_cd)
        acc["dir_u"] += c_sd.sum()
        acc["coop_u"] += rate.sum()
        with np.errstate(divide="ignore"):
            t = payload / rate
        ok = sp & (t <= t_max)
        acc["dur_u"] += t[ok].sum()
        acc["n_u"] += ok.sum()

        c_sd, c_sc, c_cd = capacities(std, m_sd, m_sc, m_cd, mean(distance(p_i, p_c)), mean(distance(p_i, p_d)),
                                      noise, bandwidth)
        rate, sp = coop_rate(c_sd, c_sc, c_cd)
        avail = _idle_from_distance(distance(p_i, p_c), law, cs_threshold, noise)
        acc["dir_c"] += c_sd.sum()
        acc["coop_c"] += np.where(sp, avail * rate + (1 - avail) * c_sd, c_sd).sum()
        acc["split_c"] += sp.sum()
        acc["lost_c"] += (sp * (1 - avail)).sum()
        with np.errstate(divide="ignore"):
            t = payload / rate
        ok = sp & (t <= t_max)
        acc["dur_c"] += (avail * t)[ok].sum()
        acc["n_c"] += avail[ok].sum()
        done += n

    return BiasedGain(
        d_sd=float(d_sd),
        gain_uniform=acc["coop_u"] / acc["dir_u"],
        gain_csma=acc["coop_c"] / acc["dir_c"],
        lost_coop_fraction=acc["lost_c"] / acc["split_c"],
        duration_ratio=(acc["dur_u"] / acc["n_u"]) / (acc["dur_c"] / acc["n_c"]),
        sigma2=sigma2,
    )
