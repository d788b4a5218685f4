"""Scenario configuration and its ``key = value`` text format.

Defaults describe the standard scenario: 35 nodes in
300 m x 300 m, 10 dBm, -102 dBm noise, -96 dBm detection, -100 dBm carrier
sense, alpha 3.5, f_d 11.1 Hz, 2.4 GHz, 1 MHz, 0.532 Mbit/s control rate,
0.95 Mbit/s minimum rate, epsilon 0.15, CW_start 5, SRL 4 (Coop-CSI) /
5 (CSMA-CSI), 10/128/10 us slot/DIFS/SIFS, 112-bit headers and ACKs and
5000-bit payloads.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

from .channel import PathLossLaw, dbm_to_mw
from .errors import ConfigError

PROTOCOLS = ("csma-csi", "coop-csi")
GENIE_MODES = ("off", "all-relays-available", "forced-cooperation")
REFERENCES = ("free-space", "unit")


@dataclass(frozen=True)
class ScenarioConfig:
    # topology and traffic
    n_nodes: int = 35
    area_x: float = 300.0
    area_y: float = 300.0
    neighbor_radius: float = 60.0
    min_separation: float = 1.0
    load_kbps: float = 100.0
    # physical layer
    tx_power_dbm: float = 10.0
    noise_dbm: float = -102.0
    detection_dbm: float = -96.0
    cs_threshold_dbm: float = -100.0
    path_loss_exponent: float = 3.5
    path_loss_reference: str = "free-space"
    doppler_hz: float = 11.1
    carrier_hz: float = 2.4e9
    bandwidth_hz: float = 1e6
    fading_refresh: float = 1e-3
    # protocol
    protocol: str = "csma-csi"
    rate_ctrl: float = 0.532e6
    rate_min: float = 0.95e6
    min_coop_rate: float | None = None
    epsilon: float = 0.15
    genie: str = "off"
    # MAC
    cw_start: int = 5
    srl_coop: int = 4
    srl_csma: int = 5
    slot: float = 10e-6
    difs: float = 128e-6
    sifs: float = 10e-6
    header_bits: int = 112
    payload_bits: int = 5000
    ack_bits: int = 112
    # run control
    duration: float = 20.0
    warmup: float = 5.0
    seed: int = 0
    placement_seed: int | None = None
    event_log: bool = field(default=False, compare=False)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.genie not in GENIE_MODES:
            raise ConfigError(f"genie must be one of {GENIE_MODES}, got {self.genie!r}")
        if self.path_loss_reference not in REFERENCES:
            raise ConfigError(f"path_loss_reference must be one of {REFERENCES}")
        if self.cs_threshold_dbm <= self.noise_dbm:
            raise ConfigError("carrier-sense threshold must exceed the noise floor")
        if self.payload_bits <= 0 or self.header_bits <= 0 or self.ack_bits <= 0:
            raise ConfigError("frame sizes must be positive")
        if self.duration <= 0 or self.warmup < 0:
            raise ConfigError("duration must be positive and warm-up non-negative")
        if self.area_x <= 0 or self.area_y <= 0 or self.n_nodes < 0:
            raise ConfigError("area must be positive")
        if self.load_kbps < 0:
            raise ConfigError("offered load must be non-negative")
        if min(self.srl_coop, self.srl_csma) < 1:
            raise ConfigError("short retry limit must be at least 1")
        if self.rate_min <= 0 or self.rate_ctrl <= 0 or self.epsilon < 0:
            raise ConfigError("rates must be positive and epsilon non-negative")
        if self.min_coop_rate is not None and self.min_coop_rate < self.rate_min:
            raise ConfigError("min_coop_rate must be at least rate_min")

    # derived quantities, linear units
    @property
    def tx_power(self):
        return float(dbm_to_mw(self.tx_power_dbm))

    @property
    def noise(self):
        return float(dbm_to_mw(self.noise_dbm))

    @property
    def detection(self):
        return float(dbm_to_mw(self.detection_dbm))

    @property
    def cs_threshold(self):
        return float(dbm_to_mw(self.cs_threshold_dbm))

    @property
    def law(self):
        carrier = self.carrier_hz if self.path_loss_reference == "free-space" else None
        return PathLossLaw.from_dbm(self.tx_power_dbm, self.path_loss_exponent, carrier)

    @property
    def srl(self):
        return self.srl_coop if self.protocol == "coop-csi" else self.srl_csma

    @property
    def coop_gate(self):
        return self.rate_min if self.min_coop_rate is None else self.min_coop_rate

    @property
    def t_max(self):
        return self.payload_bits / self.rate_min

    @property
    def sim_time(self):
        return self.warmup + self.duration

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_text(self):
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {'none' if v is None else v}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {
    "int": int,
    "float": float,
    "str": str,
    "bool": lambda s: s.lower() in ("1", "true", "yes", "on"),
    "float | None": float,
    "int | None": int,
}


def parse_config(text: str, **overrides) -> ScenarioConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    known = {f.name: f.type for f in fields(ScenarioConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if val.lower() == "none":
            values[key] = None
            continue
        try:
            values[key] = _FIELD_TYPES[known[key]](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ScenarioConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, **overrides) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, **overrides)

