"""
Run configuration: a minimal sectioned ``key=value`` format.

Grammar::

    document := line*
    line     := blank | comment | section | pair
    comment  := ws* '#' anything
    section  := ws* '[' name ']' ws*
    pair     := ws* key ws* '=' ws* value ws*

Sections do not nest. Unknown sections or keys, duplicate keys and pairs
outside a section are errors. Absent keys take the defaults below, which
reproduce the 1000-component alpha = 1.5 spectrum with T2 = 5 ms.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .mc_oracle import FRESH, PERSISTENT
from .noise_model import ConstantRateSpectrum, make_arithmetic_spectrum


@dataclass(frozen=True)
class SpectrumBlock:
    alpha: float = 1.5
    gamma1_per_s: float = 1.0
    step_per_s: float = 1.0
    n_components: int = 1000
    t2_ms: float | None = 5.0
    amplitude_per_s: float | None = None
    constant_rate_per_s: float | None = None
    f_min_hz: float | None = None
    f_max_hz: float | None = None
    n_freq: int = 200

    @property
    def amplitude(self):
        if self.amplitude_per_s is not None:
            return self.amplitude_per_s
        return 1.0 / (self.t2_ms * 1e-3)

    @property
    def gamma_max(self):
        return self.gamma1_per_s + (self.n_components - 1) * self.step_per_s

    @property
    def band(self):
        """Frequency band in Hz; defaults to gamma_1 < pi f < gamma_M."""
        lo = self.f_min_hz if self.f_min_hz is not None else self.gamma1_per_s / math.pi
        hi = self.f_max_hz if self.f_max_hz is not None else self.gamma_max / math.pi
        return lo, hi

    def build(self):
        if self.constant_rate_per_s is not None:
            return ConstantRateSpectrum(self.constant_rate_per_s)
        return self.build_mixture()

    def build_mixture(self):
        return make_arithmetic_spectrum(
            self.amplitude, self.alpha, self.gamma1_per_s, self.step_per_s, self.n_components
        )


@dataclass(frozen=True)
class ProtocolBlock:
    name: str | None = None
    total_time_s: float | None = None
    t_min_s: float = 1e-4
    t_max_s: float = 1.0
    n_points: int = 200
    spacing: str = "log"
    n_measurements: tuple = (1, 2, 3, 4, 5)
    electron_p: float = 0.0
    curve_path: str | None = None

    def time_grid(self):
        if self.spacing == "log":
            return np.geomspace(self.t_min_s, self.t_max_s, self.n_points)
        return np.linspace(self.t_min_s, self.t_max_s, self.n_points)


@dataclass(frozen=True)
class McBlock:
    n_trajectories: int = 10_000
    dt_s: float | None = None
    seed: int = 0
    noise_mode: str = FRESH
    rate_scale: float = 1.0


@dataclass(frozen=True)
class OutputBlock:
    csv_path: str | None = None
    svg_path: str | None = None


@dataclass(frozen=True)
class RunConfig:
    spectrum: SpectrumBlock = field(default_factory=SpectrumBlock)
    protocol: ProtocolBlock = field(default_factory=ProtocolBlock)
    mc: McBlock = field(default_factory=McBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def mc_time_step(self):
        """Configured dt, or 1/(20 gamma_max) when absent."""
        if self.mc.dt_s is not None:
            return self.mc.dt_s
        return 1.0 / (20.0 * self.spectrum.gamma_max)


def _float(key, raw):
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}", key=key) from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite", key=key)
    return value


def _int(key, raw):
    try:
        return int(raw, 10)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}", key=key) from None


def _int_list(key, raw):
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"{key}: expected a comma-separated list of integers", key=key)
    return tuple(_int(key, s) for s in items)


def _str(key, raw):
    if not raw:
        raise ConfigError(f"{key}: empty value", key=key)
    return raw


# section -> key -> converter
_SCHEMA = {
    "spectrum": {
        "alpha": _float, "gamma1_per_s": _float, "step_per_s": _float,
        "n_components": _int, "t2_ms": _float, "amplitude_per_s": _float,
        "constant_rate_per_s": _float, "f_min_hz": _float, "f_max_hz": _float,
        "n_freq": _int,
    },
    "protocol": {
        "name": _str, "total_time_s": _float, "t_min_s": _float, "t_max_s": _float,
        "n_points": _int, "spacing": _str, "n_measurements": _int_list,
        "electron_p": _float, "curve_path": _str,
    },
    "mc": {
        "n_trajectories": _int, "dt_s": _float, "seed": _int, "noise_mode": _str,
        "rate_scale": _float,
    },
    "output": {"csv_path": _str, "svg_path": _str},
}


def _tokenize(text):
    """Yield (section, key, raw_value, line_no) after grammar checks."""
    section = None
    seen = {}
    for no, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if s.startswith("["):
            if not s.endswith("]") or len(s) < 3:
                raise ConfigError(f"malformed section header {s!r}", line=no)
            section = s[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]", line=no)
            continue
        if "=" not in s:
            raise ConfigError(f"expected key=value, got {s!r}", line=no)
        if section is None:
            raise ConfigError("key=value outside of any [section]", line=no)
        key, raw = (p.strip() for p in s.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=no)
        if key not in _SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", line=no, key=key)
        if (section, key) in seen:
            raise ConfigError(
                f"duplicate key {key!r} in [{section}] (lines {seen[section, key]} and {no})",
                line=no, key=key,
            )
        seen[section, key] = no
        yield section, key, raw, no


def parse_config(text):
    """Parse and validate a configuration document into a :class:`RunConfig`."""
    values = {name: {} for name in _SCHEMA}
    for section, key, raw, no in _tokenize(text):
        try:
            values[section][key] = _SCHEMA[section][key](key, raw)
        except ConfigError as exc:
            raise ConfigError(str(exc), line=no, key=key) from None

    sp = values["spectrum"]
    if "t2_ms" in sp and "amplitude_per_s" in sp:
        raise ConfigError("give only one of t2_ms and amplitude_per_s", key="amplitude_per_s")
    if "amplitude_per_s" in sp:
        sp["t2_ms"] = None
    if "n_measurements" in values["protocol"]:
        values["protocol"]["n_measurements"] = tuple(values["protocol"]["n_measurements"])
    cfg = RunConfig(
        spectrum=SpectrumBlock(**sp),
        protocol=ProtocolBlock(**values["protocol"]),
        mc=McBlock(**values["mc"]),
        output=OutputBlock(**values["output"]),
    )
    validate(cfg)
    return cfg


def _require(cond, key, message):
    if not cond:
        raise ConfigError(f"{key}: {message}", key=key)


def validate(cfg):
    sp, pr, mc = cfg.spectrum, cfg.protocol, cfg.mc
    _require(0 < sp.alpha < 2, "alpha", "must lie in (0, 2)")
    _require(sp.gamma1_per_s > 0, "gamma1_per_s", "must be positive")
    _require(sp.step_per_s > 0, "step_per_s", "must be positive")
    _require(sp.n_components >= 1, "n_components", "must be at least 1")
    if sp.t2_ms is not None:
        _require(sp.t2_ms > 0, "t2_ms", "must be positive")
    if sp.amplitude_per_s is not None:
        _require(sp.amplitude_per_s > 0, "amplitude_per_s", "must be positive")
    if sp.constant_rate_per_s is not None:
        _require(sp.constant_rate_per_s >= 0, "constant_rate_per_s", "must be non-negative")
    lo, hi = sp.band
    _require(0 < lo < hi, "f_min_hz", "need 0 < f_min_hz < f_max_hz")
    _require(sp.n_freq >= 2, "n_freq", "must be at least 2")

    _require(pr.t_min_s > 0, "t_min_s", "must be positive")
    _require(pr.t_max_s > pr.t_min_s, "t_max_s", "must exceed t_min_s")
    _require(pr.n_points >= 2, "n_points", "must be at least 2")
    _require(pr.spacing in ("log", "linear"), "spacing", "must be 'log' or 'linear'")
    if pr.total_time_s is not None:
        _require(pr.total_time_s > 0, "total_time_s", "must be positive")
    _require(all(n >= 0 for n in pr.n_measurements), "n_measurements", "must be non-negative")
    _require(0 <= pr.electron_p <= 1, "electron_p", "must lie in [0, 1]")
    if pr.curve_path is not None:
        _require(os.access(pr.curve_path, os.R_OK), "curve_path", f"cannot read {pr.curve_path!r}")

    _require(mc.n_trajectories >= 100, "n_trajectories", "must be at least 100")
    if mc.dt_s is not None:
        _require(mc.dt_s > 0, "dt_s", "must be positive")
    _require(0 <= mc.seed < 2**64, "seed", "must be an unsigned 64-bit integer")
    _require(mc.noise_mode in (FRESH, PERSISTENT), "noise_mode",
             f"must be {FRESH!r} or {PERSISTENT!r}")
    _require(mc.rate_scale > 0, "rate_scale", "must be positive")

    for key in ("csv_path", "svg_path"):
        path = getattr(cfg.output, key)
        if path is not None:
            check_writable(path, key)


def check_writable(path, key="path"):
    parent = os.path.dirname(os.path.abspath(path)) or "."
    _require(os.path.isdir(parent) and os.access(parent, os.W_OK), key,
             f"directory of {path!r} is not writable")


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
