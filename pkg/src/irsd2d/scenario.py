"""Experiment configuration, validation and random scenario materialization."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import yaml

from .rng import substream
from .ssca import check_exponents


class ConfigError(ValueError):
    """Raised when a configuration violates a field invariant."""


_QUANTITY = re.compile(r"^\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([A-Za-z/]*)\s*$")


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1e3


def parse_quantity(value: Any) -> float:
    """Convert ``value`` to a linear float.

    Plain numbers are returned unchanged. Strings may carry a unit suffix:
    ``dB`` (power ratio), ``dBm`` (watts) or ``dBm/Hz`` (watts per hertz).
    """
    if isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    m = _QUANTITY.match(str(value))
    if not m:
        raise ConfigError(f"cannot parse quantity {value!r}")
    number, unit = float(m.group(1)), m.group(2).lower()
    if unit == "":
        return number
    if unit == "db":
        return db_to_linear(number)
    if unit in ("dbm", "dbm/hz"):
        return dbm_to_watts(number)
    raise ConfigError(f"unknown unit {m.group(2)!r} in {value!r}")


@dataclass(frozen=True)
class TaskUserProfile:
    task_bits: float
    cycles_per_bit: float
    local_cpu: float
    weight: float
    tx_power: float
    position: tuple


@dataclass(frozen=True)
class HelperProfile:
    helper_cpu: float
    noise_power: float
    position: Optional[tuple]
    is_blank: bool = False


@dataclass(frozen=True)
class ScenarioConfig:
    # system dimensions
    n_users: int = 8
    n_helpers: int = 10
    n_elements: int = 40
    slots_per_frame: int = 100
    n_frames: int = 300
    # radio
    bandwidth: float = 2e6
    rician_factor: float = db_to_linear(3.0)
    pathloss_ref: float = db_to_linear(-30.0)
    ref_distance: float = 1.0
    exponent_uu: float = 3.2
    exponent_ui: float = 2.2
    noise_density: float = dbm_to_watts(-174.0)
    tx_power: float = dbm_to_watts(24.0)
    wavelength: float = 0.125
    los_mode: str = "ula"
    direct_fading: str = "rician"
    # geometry, metres
    user_center: tuple = (-5.0, 0.0)
    helper_center: tuple = (5.0, 0.0)
    user_radius: float = 10.0
    helper_radius: float = 10.0
    user_height: float = 1.0
    irs_x: float = 0.0
    irs_y: float = 0.0
    irs_height: float = 3.0
    # tasks and computing
    task_bits_range: tuple = (1e6, 5e6)
    cycles_per_bit: float = 12.0
    local_cpu: float = 1e9
    weight: float = 1.0
    helper_cpu_range: tuple = (0.5e9, 2.5e9)
    # long-timescale optimizer; varpi=None calibrates from the first sample gradient
    varpi: Optional[float] = None
    initial_step: float = math.pi
    rho_exponent: float = 0.7
    gamma_exponent: float = 0.9
    # single-timescale baseline
    sts_max_iters: int = 50
    sts_tol: float = 1e-6
    # bookkeeping
    bits_per_coefficient: int = 8
    trials: int = 10
    rng_seed: int = 0

    @property
    def noise_power(self) -> float:
        return self.noise_density * self.bandwidth

    @property
    def irs_position(self) -> tuple:
        return (self.irs_x, self.irs_y, self.irs_height)

    def replace(self, **changes) -> "ScenarioConfig":
        return validate(dataclasses.replace(self, **changes))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_INT_FIELDS = {"n_users", "n_helpers", "n_elements", "slots_per_frame", "n_frames",
               "sts_max_iters", "bits_per_coefficient", "trials", "rng_seed"}
_PAIR_FIELDS = {"user_center", "helper_center", "task_bits_range", "helper_cpu_range"}
_STR_FIELDS = {"los_mode": ("ula", "ones"), "direct_fading": ("rician", "rayleigh")}

# short names accepted in config files
_ALIASES = {
    "I": "n_users", "J": "n_helpers", "M": "n_elements", "T_s": "slots_per_frame",
    "T_f": "n_frames", "B": "bandwidth", "beta": "rician_factor", "C_0": "pathloss_ref",
    "D_0": "ref_distance", "alpha_uu": "exponent_uu", "alpha_uI": "exponent_ui",
    "R_1": "user_radius", "R_2": "helper_radius", "y_I": "irs_y", "seed": "rng_seed",
    "p": "tx_power", "N_0": "noise_density",
}


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def validate(config: ScenarioConfig) -> ScenarioConfig:
    """Check every invariant of ``config`` and return it unchanged."""
    c = config
    for name in ("n_users", "n_helpers", "n_elements", "slots_per_frame", "n_frames"):
        pretty = {"n_users": "I", "n_helpers": "J", "n_elements": "M",
                  "slots_per_frame": "T_s", "n_frames": "T_f"}[name]
        _check(getattr(c, name) >= 1, f"{pretty} must be ≥ 1 (field {name})")
    _check(c.bandwidth > 0, "bandwidth must be > 0")
    _check(c.rician_factor >= 0, "rician_factor must be ≥ 0")
    _check(c.pathloss_ref > 0, "pathloss_ref must be > 0")
    for name in ("ref_distance", "exponent_uu", "exponent_ui", "noise_density", "tx_power",
                 "wavelength", "user_radius", "helper_radius", "user_height", "irs_height",
                 "cycles_per_bit", "local_cpu", "weight", "initial_step", "sts_tol"):
        _check(getattr(c, name) > 0, f"{name} must be > 0")
    _check(c.varpi is None or c.varpi > 0, "varpi must be > 0")
    lo, hi = c.task_bits_range
    _check(0 < lo <= hi, "task_bits_range must satisfy 0 < low ≤ high")
    lo, hi = c.helper_cpu_range
    _check(0 < lo <= hi, "helper_cpu_range must satisfy 0 < low ≤ high")
    for name, allowed in _STR_FIELDS.items():
        _check(getattr(c, name) in allowed, f"{name} must be one of {allowed}")
    _check(c.sts_max_iters >= 1, "sts_max_iters must be ≥ 1")
    _check(c.bits_per_coefficient >= 1, "bits_per_coefficient must be ≥ 1")
    _check(c.trials >= 1, "trials must be ≥ 1")
    try:
        check_exponents(c.rho_exponent, c.gamma_exponent)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return c


def _flatten(raw: dict, out: dict) -> dict:
    for key, value in raw.items():
        if isinstance(value, dict):
            _flatten(value, out)
        else:
            name = _ALIASES.get(key, key)
            if name in out:
                raise ConfigError(f"field {name} given twice")
            out[name] = value
    return out


def config_from_dict(raw: dict, base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    """Build a validated config from a (possibly sectioned) mapping."""
    flat = _flatten(raw or {}, {})
    changes: dict[str, Any] = {}
    for name, value in flat.items():
        if name not in _FIELDS:
            raise ConfigError(f"unknown config field {name!r}")
        if name in _INT_FIELDS:
            if isinstance(value, bool) or float(value) != int(value):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            value = int(value)
        elif name in _PAIR_FIELDS:
            if not isinstance(value, (list, tuple)) or len(value) != 2:
                raise ConfigError(f"{name} must be a pair, got {value!r}")
            value = tuple(parse_quantity(v) for v in value)
        elif name in _STR_FIELDS:
            value = str(value)
        elif name == "varpi" and (value is None or str(value).lower() == "auto"):
            value = None
        else:
            value = parse_quantity(value)
        changes[name] = value
    return validate(dataclasses.replace(base or ScenarioConfig(), **changes))


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    with path.open() as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(raw)


def _points_in_circle(rng: np.random.Generator, n: int, center: Sequence[float],
                      radius: float, height: float) -> np.ndarray:
    r = radius * np.sqrt(rng.uniform(size=n))
    a = 2.0 * np.pi * rng.uniform(size=n)
    return np.column_stack([center[0] + r * np.cos(a), center[1] + r * np.sin(a),
                            np.full(n, height)])


def materialize(config: ScenarioConfig, seed: Optional[int] = None, trial: int = 0):
    """Draw user positions, task sizes and helper CPU speeds.

    Deterministic in ``(config, seed, trial)``; ``seed`` defaults to
    ``config.rng_seed``.
    """
    seed = config.rng_seed if seed is None else seed
    rng = substream(seed, trial, "placement")
    c = config
    upos = _points_in_circle(rng, c.n_users, c.user_center, c.user_radius, c.user_height)
    hpos = _points_in_circle(rng, c.n_helpers, c.helper_center, c.helper_radius, c.user_height)
    bits = rng.uniform(*c.task_bits_range, size=c.n_users)
    cpu = rng.uniform(*c.helper_cpu_range, size=c.n_helpers)
    users = [TaskUserProfile(float(bits[i]), c.cycles_per_bit, c.local_cpu, c.weight,
                             c.tx_power, tuple(upos[i])) for i in range(c.n_users)]
    helpers = [HelperProfile(float(cpu[j]), c.noise_power, tuple(hpos[j]))
               for j in range(c.n_helpers)]
    return users, helpers


def pad_blank_users(helpers: list, n_users: int) -> list:
    """Append zero-CPU helpers so there are at least ``n_users`` of them."""
    helpers = list(helpers)
    if n_users <= len(helpers):
        return helpers
    noise = helpers[0].noise_power if helpers else 1.0
    blanks = [HelperProfile(0.0, noise, None, True) for _ in range(n_users - len(helpers))]
    return helpers + blanks


def check_profiles(users, helpers) -> None:
    for u in users:
        if min(u.task_bits, u.cycles_per_bit, u.local_cpu, u.weight, u.tx_power) <= 0:
            raise ConfigError(f"task user profile has a non-positive field: {u}")
    for h in helpers:
        if h.helper_cpu < 0 or h.noise_power <= 0 or (h.helper_cpu == 0) != h.is_blank:
            raise ConfigError(f"invalid helper profile: {h}")

