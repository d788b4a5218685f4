"""Average throughput of direct and proactive-cooperative delivery.

Fading is block-constant over a packet and interference at the relay and
destination is Rayleigh with a given mean, so every quantity is an
expectation over five independent exponentials
``(eta_sd, eta_sc, eta_cd, iota_c, iota_d)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..channel import PathLossLaw
from ..config import ScenarioConfig
from ..geometry import DEFAULT_REGION, Region, distance
from .special import g_function

_SINGULAR_REL = 1e-6


@dataclass(frozen=True)
class AnalyticScene:
    p_s: tuple
    p_d: tuple
    p_c: tuple | None = None
    p_i: tuple | None = None
    sigma2: float = 0.0
    law: PathLossLaw = field(default_factory=lambda: ScenarioConfig().law)
    noise: float = field(default_factory=lambda: ScenarioConfig().noise)
    bandwidth: float = 1e6
    cs_threshold: float = field(default_factory=lambda: ScenarioConfig().cs_threshold)
    region: Region = DEFAULT_REGION

    @property
    def m_sd(self):
        return self.law.mean_power(distance(self.p_s, self.p_d))

    @property
    def m_sc(self):
        return self.law.mean_power(distance(self.p_s, self.p_c))

    @property
    def m_cd(self):
        return self.law.mean_power(distance(self.p_c, self.p_d))


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float


def tau_direct_means(m_sd, sigma2, noise, bandwidth):
    """Mean of B log2(1 + eta/(N + iota)) with eta ~ Exp(m_sd), iota ~ Exp(sigma2)."""
    if sigma2 <= 0:
        return float(g_function(-noise / m_sd, bandwidth))
    if abs(m_sd - sigma2) <= _SINGULAR_REL * m_sd:
        # the limit exists; average two symmetric perturbations around it
        lo = tau_direct_means(m_sd, sigma2 * (1 - 2 * _SINGULAR_REL), noise, bandwidth)
        hi = tau_direct_means(m_sd, sigma2 * (1 + 2 * _SINGULAR_REL), noise, bandwidth)
        return 0.5 * (lo + hi)
    g_sig = g_function(-noise / m_sd, bandwidth)
    g_int = g_function(-noise / sigma2, bandwidth)
    return float(m_sd / (m_sd - sigma2) * (g_sig - g_int))


def tau_direct(scene: AnalyticScene) -> float:
    return tau_direct_means(scene.m_sd, scene.sigma2, scene.noise, scene.bandwidth)


def t_split_closed(c_sc, c_cd, c_sd, payload):
    """Two-phase delivery time L (C_sc + C_cd - C_sd) / (C_sc C_cd); +inf when a hop is dead."""
    c_sc = np.asarray(c_sc, dtype=float)
    c_cd = np.asarray(c_cd, dtype=float)
    den = c_sc * c_cd
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, payload * (c_sc + c_cd - c_sd) / np.where(den > 0, den, 1.0), np.inf)
    return float(out) if out.ndim == 0 else out


def split_region(c_sd, c_sc, c_cd):
    """Membership of Delta_split: both hops at least as fast as the direct link."""
    return (np.asarray(c_sc) >= c_sd) & (np.asarray(c_cd) >= c_sd)


def coop_rate(c_sd, c_sc, c_cd):
    """Per-sample rate chosen by the cooperative policy (L / T*)."""
    sp = split_region(c_sd, c_sc, c_cd)
    den = c_sc + c_cd - c_sd
    with np.errstate(divide="ignore", invalid="ignore"):
        split = np.where(sp & (den > 0), c_sc * c_cd / np.where(den > 0, den, 1.0), 0.0)
    return np.where(sp, split, c_sd), sp


def capacities(std_exp, m_sd, m_sc, m_cd, iota_c_mean, iota_d_mean, noise, bandwidth):
    """Capacities of the three links from unit exponentials ``std_exp`` (shape (5, n))."""
    e_sd, e_sc, e_cd, u_c, u_d = std_exp
    iota_c = u_c * iota_c_mean
    iota_d = u_d * iota_d_mean
    c_sd = bandwidth * np.log2(1 + e_sd * m_sd / (noise + iota_d))
    c_sc = bandwidth * np.log2(1 + e_sc * m_sc / (noise + iota_c))
    c_cd = bandwidth * np.log2(1 + e_cd * m_cd / (noise + iota_d))
    return c_sd, c_sc, c_cd


def _paired(coop, direct):
    n = coop.size
    mc, md = coop.mean(), direct.mean()
    ratio = mc / md
    # delta method for a ratio of paired means
    resid = coop - ratio * direct
    se_ratio = resid.std(ddof=1) / np.sqrt(n) / md
    return Estimate(mc, coop.std(ddof=1) / np.sqrt(n)), Estimate(md, direct.std(ddof=1) / np.sqrt(n)), Estimate(ratio, se_ratio)


def tau_coop(scene: AnalyticScene, n_samples=10**6, rng=None, *, return_all=False):
    """Monte Carlo estimate of the cooperative throughput for a relay at ``scene.p_c``.

    Interference at relay and destination is i.i.d. with mean ``scene.sigma2``.
    With ``return_all`` the paired direct-link estimate and the ratio are
    returned as well.
    """
    if n_samples < 10**5:
        raise ValueError("tau_coop needs at least 1e5 samples")
    rng = np.random.default_rng(rng)
    std = rng.standard_exponential((5, n_samples))
    c_sd, c_sc, c_cd = capacities(std, scene.m_sd, scene.m_sc, scene.m_cd, scene.sigma2, scene.sigma2,
                                  scene.noise, scene.bandwidth)
    rate, _ = coop_rate(c_sd, c_sc, c_cd)
    coop, direct, ratio = _paired(rate, c_sd)
    return (coop, direct, ratio) if return_all else coop


@dataclass
class GainGrid:
    sigma2: np.ndarray
    distances: np.ndarray
    ratio: np.ndarray
    stderr: np.ndarray
    tau_coop: np.ndarray
    tau_direct: np.ndarray


def gain_grid(sigma2_values, distances, n_samples=10**6, seed=0, *, law=None, noise=None, bandwidth=1e6,
              batch=250_000):
    """tau_coop / tau_direct over (sigma2, d_sd) with a midpoint relay.

    The same unit exponentials are reused at every grid point so the
    surface is smooth in both coordinates.
    """
    cfg = ScenarioConfig()
    law = law or cfg.law
    noise = cfg.noise if noise is None else noise
    sig = np.asarray(sigma2_values, dtype=float)
    dist = np.asarray(distances, dtype=float)
    shape = (dist.size, sig.size)
    s_coop = np.zeros(shape)
    s_dir = np.zeros(shape)
    s_cc = np.zeros(shape)
    s_dd = np.zeros(shape)
    s_cd = np.zeros(shape)
    rng = np.random.default_rng(seed)
    done = 0
    while done < n_samples:
        n = min(batch, n_samples - done)
        std = rng.standard_exponential((5, n))
        for i, d in enumerate(dist):
            m_sd = law.mean_power(d)
            m_half = law.mean_power(d / 2)
            for j, s2 in enumerate(sig):
                c_sd, c_sc, c_cd = capacities(std, m_sd, m_half, m_half, s2, s2, noise, bandwidth)
                rate, _ = coop_rate(c_sd, c_sc, c_cd)
                s_coop[i, j] += rate.sum()
                s_dir[i, j] += c_sd.sum()
                s_cc[i, j] += (rate * rate).sum()
                s_dd[i, j] += (c_sd * c_sd).sum()
                s_cd[i, j] += (rate * c_sd).sum()
        done += n
    mc = s_coop / n_samples
    md = s_dir / n_samples
    ratio = mc / md
    var_c = s_cc / n_samples - mc ** 2
    var_d = s_dd / n_samples - md ** 2
    cov = s_cd / n_samples - mc * md
    var_r = (var_c - 2 * ratio * cov + ratio ** 2 * var_d) / md ** 2
    se = np.sqrt(np.maximum(var_r, 0.0) / n_samples)
    return GainGrid(sig, dist, ratio, se, mc, md)


def is_unimodal(values, tol=0.0):
    """True when ``values`` rise (weakly, up to ``tol``) to one peak and then fall."""
    v = np.asarray(values, dtype=float)
    k = int(np.argmax(v))
    rising = np.all(np.diff(v[: k + 1]) >= -tol)
    falling = np.all(np.diff(v[k:]) <= tol)
    return bool(rising and falling)
