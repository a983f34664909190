"""Strict TOML run configuration.

Every section and key is optional; unknown sections or keys are rejected.
Values are checked against the preconditions of the operations they feed
before any computation starts.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigurationError, DomainError
from .functionals import GaussianProfile, SharedProfileFunctional
from .spectral import DEFAULT_POINTS, GridSpec
from .thermal import ThermalParams

_SCHEMA = {
    "thermal": {"beta", "mass", "lambda_order"},
    "K1": {"coeffs", "amplitude", "width"},
    "K2": {"coeffs", "amplitude", "width"},
    "K3": {"coeffs", "amplitude", "width"},
    "grid": {"n_points", "nu_max"},
    "time": {"t", "t_min", "t_max", "t_steps"},
    "cutoff": {"n_max", "ramp"},
    "ness": {"t_min", "t_max", "t_steps"},
    "oracle": {"dims", "trials", "seed", "t_min", "t_max", "beta_min", "beta_max", "scale"},
    "tolerance": {"positivity", "balance", "density", "oracle", "kms"},
    "output": {"dir"},
}


@dataclass(frozen=True)
class OracleSettings:
    dims: tuple = (2, 3, 4, 6)
    trials: int = 20
    seed: int = 0
    t_min: float = -3.0
    t_max: float = 3.0
    beta_min: float = 0.2
    beta_max: float = 4.0
    scale: float = 0.5


@dataclass(frozen=True)
class Tolerances:
    positivity: float = 1e-10
    balance: float = 1e-6
    density: float = 1e-2
    oracle: float = 1e-9
    kms: float = 1e-11


@dataclass(frozen=True)
class RunConfig:
    thermal: ThermalParams = ThermalParams(1.0, 1.0)
    K1: SharedProfileFunctional = SharedProfileFunctional((1.0,))
    K2: SharedProfileFunctional = SharedProfileFunctional((0.0,))
    K3: SharedProfileFunctional = SharedProfileFunctional((0.0,))
    grid: GridSpec = GridSpec()
    times: tuple = (0.0, 0.5, 1.0, 2.0, 5.0)
    n_max: int = 8
    ramp: str = "smoothstep"
    ness_times: tuple = field(default_factory=lambda: tuple(np.logspace(1.0, 3.0, 41)))
    oracle: OracleSettings = OracleSettings()
    tolerance: Tolerances = Tolerances()
    out_dir: str = "out"

    def summary(self):
        """Plain-dict view for report metadata."""
        return {
            "thermal": {"beta": self.thermal.beta, "mass": self.thermal.mass,
                        "lambda_order": self.thermal.lambda_order},
            **{name: {"coeffs": list(k.coeffs), "amplitude": k.profile.amplitude, "width": k.profile.width}
               for name, k in (("K1", self.K1), ("K2", self.K2), ("K3", self.K3))},
            "grid": {"n_points": self.grid.n_points, "nu_max": self.grid.nu_max},
            "time": list(self.times),
            "cutoff": {"n_max": self.n_max, "ramp": self.ramp},
            "ness_times": [self.ness_times[0], self.ness_times[-1], len(self.ness_times)],
            "oracle": vars(self.oracle) | {"dims": list(self.oracle.dims)},
            "tolerance": vars(self.tolerance),
        }


def _num(sec, key, val, kind=float, positive=False, nonneg=False):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigurationError(f"[{sec}] {key} must be a number, got {val!r}")
    if kind is int and int(val) != val:
        raise ConfigurationError(f"[{sec}] {key} must be an integer, got {val!r}")
    val = kind(val)
    if not math.isfinite(val):
        raise ConfigurationError(f"[{sec}] {key} must be finite")
    if positive and not val > 0:
        raise ConfigurationError(f"[{sec}] {key} must be > 0, got {val!r}")
    if nonneg and val < 0:
        raise ConfigurationError(f"[{sec}] {key} must be >= 0, got {val!r}")
    return val


def _times(sec, d, default):
    if "t" in d:
        if any(k in d for k in ("t_min", "t_max", "t_steps")):
            raise ConfigurationError(f"[{sec}] give either t or t_min/t_max/t_steps, not both")
        ts = d["t"] if isinstance(d["t"], list) else [d["t"]]
        if not ts:
            raise ConfigurationError(f"[{sec}] t must not be empty")
        return tuple(_num(sec, "t", x) for x in ts)
    if any(k in d for k in ("t_min", "t_max", "t_steps")):
        missing = {"t_min", "t_max", "t_steps"} - set(d)
        if missing:
            raise ConfigurationError(f"[{sec}] missing {sorted(missing)}")
        lo = _num(sec, "t_min", d["t_min"])
        hi = _num(sec, "t_max", d["t_max"])
        n = _num(sec, "t_steps", d["t_steps"], int, positive=True)
        if hi < lo:
            raise ConfigurationError(f"[{sec}] t_max must be >= t_min")
        return tuple(np.linspace(lo, hi, n)) if sec == "time" else tuple(np.logspace(np.log10(lo), np.log10(hi), n))
    return default


def load_config(path=None, text=None):
    """Parse a TOML file (or string) into a validated :class:`RunConfig`."""
    if text is None:
        if path is None:
            return RunConfig()
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"config {path} is not valid TOML: {exc}") from None
    else:
        try:
            raw = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"config is not valid TOML: {exc}") from None
    return parse_config(raw)


def parse_config(raw: dict):
    for sec, body in raw.items():
        if sec not in _SCHEMA:
            raise ConfigurationError(f"unknown config section [{sec}]")
        if not isinstance(body, dict):
            raise ConfigurationError(f"[{sec}] must be a table")
        extra = set(body) - _SCHEMA[sec]
        if extra:
            raise ConfigurationError(f"unknown key(s) {sorted(extra)} in [{sec}]")
    base = RunConfig()
    kw = {}

    th = raw.get("thermal", {})
    try:
        kw["thermal"] = ThermalParams(
            _num("thermal", "beta", th.get("beta", 1.0)),
            _num("thermal", "mass", th.get("mass", 1.0)),
            _num("thermal", "lambda_order", th.get("lambda_order", 2), int))
    except DomainError as exc:
        raise ConfigurationError(f"[thermal] {exc}") from None

    for name in ("K1", "K2", "K3"):
        d = raw.get(name)
        if d is None:
            continue
        cs = d.get("coeffs", [0.0])
        cs = cs if isinstance(cs, list) else [cs]
        cs = [_num(name, "coeffs", c) for c in cs]
        try:
            prof = GaussianProfile(_num(name, "amplitude", d.get("amplitude", 1.0)),
                                   _num(name, "width", d.get("width", 1.0), positive=True))
            kw[name] = SharedProfileFunctional(tuple(cs), prof)
        except DomainError as exc:
            raise ConfigurationError(f"[{name}] {exc}") from None
    # absent blocks are the zero functional with the common profile and order
    present = [kw[n] for n in ("K1", "K2", "K3") if n in kw]
    ref = present[0] if present else base.K1
    for name in ("K1", "K2", "K3"):
        if name not in kw:
            kw[name] = SharedProfileFunctional.zero(ref.order, ref.profile) if present else getattr(base, name)
    profiles = {kw[n].profile for n in ("K1", "K2", "K3")}
    orders = {kw[n].order for n in ("K1", "K2", "K3")}
    if len(profiles) > 1:
        raise ConfigurationError("K1, K2, K3 must share amplitude and width")
    if len(orders) > 1:
        raise ConfigurationError("K1, K2, K3 must have the same number of coefficients")

    g = raw.get("grid", {})
    nu_max = g.get("nu_max")
    kw["grid"] = GridSpec(_num("grid", "n_points", g.get("n_points", DEFAULT_POINTS), int, positive=True),
                          None if nu_max is None else _num("grid", "nu_max", nu_max, positive=True))

    kw["times"] = _times("time", raw.get("time", {}), base.times)
    kw["ness_times"] = _times("ness", raw.get("ness", {}), base.ness_times)
    if min(kw["ness_times"]) <= 0:
        raise ConfigurationError("[ness] times must be > 0")

    c = raw.get("cutoff", {})
    kw["n_max"] = _num("cutoff", "n_max", c.get("n_max", base.n_max), int, positive=True)
    ramp = c.get("ramp", base.ramp)
    if ramp not in ("smoothstep", "sharp"):
        raise ConfigurationError(f"[cutoff] ramp must be 'smoothstep' or 'sharp', got {ramp!r}")
    kw["ramp"] = ramp

    o = raw.get("oracle", {})
    dflt = OracleSettings()
    dims = o.get("dims", list(dflt.dims))
    dims = dims if isinstance(dims, list) else [dims]
    dims = tuple(_num("oracle", "dims", x, int) for x in dims)
    if not dims or any(not 2 <= x <= 16 for x in dims):
        raise ConfigurationError("[oracle] dims must lie in [2, 16]")
    osets = OracleSettings(
        dims,
        _num("oracle", "trials", o.get("trials", dflt.trials), int, positive=True),
        _num("oracle", "seed", o.get("seed", dflt.seed), int, nonneg=True),
        _num("oracle", "t_min", o.get("t_min", dflt.t_min)),
        _num("oracle", "t_max", o.get("t_max", dflt.t_max)),
        _num("oracle", "beta_min", o.get("beta_min", dflt.beta_min), positive=True),
        _num("oracle", "beta_max", o.get("beta_max", dflt.beta_max), positive=True),
        _num("oracle", "scale", o.get("scale", dflt.scale), positive=True),
    )
    if osets.t_max < osets.t_min or osets.beta_max < osets.beta_min:
        raise ConfigurationError("[oracle] ranges must satisfy min <= max")
    kw["oracle"] = osets

    tol = raw.get("tolerance", {})
    dt = Tolerances()
    kw["tolerance"] = Tolerances(**{k: _num("tolerance", k, tol.get(k, getattr(dt, k)), positive=True)
                                    for k in vars(dt)})

    out = raw.get("output", {})
    d = out.get("dir", base.out_dir)
    if not isinstance(d, str) or not d:
        raise ConfigurationError("[output] dir must be a non-empty string")
    kw["out_dir"] = d
    return RunConfig(**kw)
