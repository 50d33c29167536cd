"""Run configuration and its flat key-value file format.

A config file is INI-style ``key = value`` lines; a leading ``[run]``
section header is optional.  Profiles are given as short strings:

* schedule: ``exp:RATE:POWER`` or ``custom:E1,E2,...[:TAIL_RATIO]``
* rho: ``quadratic:C``, ``exp:LAMBDA`` or ``table:T0,T1,...;V0,V1,...``
* rho_tilde: ``T0:SCALE:POWER``
"""
from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, fields

from .errors import ConfigError, InvalidProfile, InvalidSchedule
from .lattice import CustomSchedule, ExponentialSchedule
from .potentials import ExponentialRho, PotentialParams, QuadraticRho, RhoTilde, TableRho
from .wermer import N_MAX

# fields that do not change results and stay out of the hash
UNHASHED = ("outdir", "threads")


@dataclass
class RunConfig:
    schedule: str = "exp:1.0:2.0"
    rho: str = "quadratic:1.0"
    rho_tilde: str = "1.0:1.0:3.0"
    level: int = 6
    t_u: float = -1.0
    t_a: float = -1.0
    seed: int = 0
    threads: int = 1
    outdir: str = "out"
    # spiral / slice
    count: int = 11
    z0: str = "2+0j"
    n: int = 8
    # phi-map
    field: str = "phi_n"
    plane: str = "z"
    center: str = "0+0j"
    fixed: str = "0+0j"
    half_width: float = 1.0
    pixels: int = 128
    # levi
    samples: int = 1000
    h: float = 1e-4
    tol: float = 1e-2
    z_radius: float = 0.05
    w_spread: float = 0.1
    # lelong
    lelong_level: int = 3
    lelong_z0: str = "auto"
    radii: str = "1e-2,1e-3,1e-4,1e-5,1e-6"
    directions: int = 32
    # volume / sublevel-decay
    region: str = "A"
    box: str = "-2,2"
    N: int = 1_000_000
    a: float = 1.0
    deltas: str = "1,0.5,0.25,0.125"
    # lift / monodromy
    j: int = 2
    loop_radius: float = 0.4
    window: str = "1,5"
    sheet: str = "+++++"
    j_max: int = 8
    basepoints: int = 50
    # walk
    walk_levels: int = 16
    zp: str = "0.5+0.5j"
    zq: str = "2.3-0.7j"
    # disk-probe
    t: float = -1.0
    centers: int = 64
    re_half: float = 2.0
    im_half: float = 2.0
    # green-cert
    delta: float = 0.1
    norms: str = "0,0.3,0.6,0.9,1.2"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def hash(self) -> str:
        d = {k: v for k, v in self.to_dict().items() if k not in UNHASHED}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def to_text(self) -> str:
        lines = ["[run]"] + [f"{k} = {v}" for k, v in self.to_dict().items()]
        return "\n".join(lines) + "\n"

    # parsed views -----------------------------------------------------
    def params(self, level: int | None = None) -> PotentialParams:
        return PotentialParams(parse_schedule(self.schedule), parse_rho(self.rho),
                               parse_rho_tilde(self.rho_tilde),
                               self.level if level is None else level, self.t_u, self.t_a)

    def box4(self) -> list[tuple[float, float]]:
        return parse_box(self.box)


FIELD_TYPES = {f.name: type(f.default) for f in fields(RunConfig)}


def coerce(name: str, raw: str):
    """Convert the text ``raw`` for field ``name``; raises :class:`ConfigError`."""
    if name not in FIELD_TYPES:
        raise ConfigError(name, "unknown field")
    kind = FIELD_TYPES[name]
    raw = raw.strip()
    try:
        if kind is int:
            v = float(raw)
            if not v.is_integer():
                raise ValueError(f"{raw!r} is not an integer")
            return int(v)
        if kind is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(name, str(exc)) from None


def load_file(path: str) -> dict:
    with open(path) as fh:
        text = fh.read()
    if not text.lstrip().startswith("["):
        text = "[run]\n" + text
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc)) from None
    out = {}
    for sec in cp.sections():
        for k, v in cp.items(sec):
            out[k] = coerce(k, v)
    return out


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    cfg = RunConfig(**{**(file_values or {}), **(overrides or {})})
    validate(cfg)
    return cfg


def parse_complex(text: str, name: str = "value") -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(name, f"cannot parse complex number {text!r}") from None


def parse_floats(text: str, name: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(name, f"cannot parse number list {text!r}") from None


def parse_schedule(text: str):
    parts = text.split(":")
    try:
        if parts[0] == "exp":
            rate = float(parts[1]) if len(parts) > 1 else 1.0
            power = float(parts[2]) if len(parts) > 2 else 2.0
            return ExponentialSchedule(rate, power)
        if parts[0] == "custom" and len(parts) >= 2:
            vals = parse_floats(parts[1], "schedule")
            return CustomSchedule(vals, float(parts[2])) if len(parts) > 2 else CustomSchedule(vals)
    except (InvalidSchedule, ValueError) as exc:
        raise ConfigError("schedule", str(exc)) from None
    raise ConfigError("schedule", f"unrecognized schedule {text!r}")


def parse_rho(text: str):
    kind, _, rest = text.partition(":")
    try:
        if kind == "quadratic":
            return QuadraticRho(float(rest) if rest else 1.0)
        if kind == "exp":
            return ExponentialRho(float(rest) if rest else 1.0)
        if kind == "table":
            ts, _, vs = rest.partition(";")
            return TableRho(parse_floats(ts, "rho"), parse_floats(vs, "rho"))
    except (InvalidProfile, ValueError) as exc:
        raise ConfigError("rho", str(exc)) from None
    raise ConfigError("rho", f"unrecognized profile {text!r}")


def parse_rho_tilde(text: str) -> RhoTilde:
    vals = parse_floats(text.replace(":", ","), "rho_tilde")
    try:
        return RhoTilde(*vals)
    except (InvalidProfile, TypeError) as exc:
        raise ConfigError("rho_tilde", str(exc)) from None


def parse_box(text: str) -> list[tuple[float, float]]:
    v = parse_floats(text, "box")
    if len(v) == 2:
        v = v * 4
    if len(v) != 8:
        raise ConfigError("box", "expected lo,hi or eight values")
    box = [(v[2 * i], v[2 * i + 1]) for i in range(4)]
    if any(not (math.isfinite(lo) and math.isfinite(hi) and hi > lo) for lo, hi in box):
        raise ConfigError("box", "box is degenerate")
    return box


def validate(cfg: RunConfig) -> None:
    if not 1 <= cfg.level <= N_MAX:
        raise ConfigError("level", f"must lie in 1..{N_MAX}")
    for name in ("t_u", "t_a", "h", "tol", "half_width", "z_radius", "w_spread", "a", "delta", "t"):
        if not math.isfinite(getattr(cfg, name)):
            raise ConfigError(name, "must be finite")
    for name in ("h", "half_width", "z_radius", "w_spread", "a", "delta", "re_half", "im_half"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(name, "must be positive")
    cfg.params()  # schedule and profiles
    if not 1 <= cfg.n <= N_MAX:
        raise ConfigError("n", f"must lie in 1..{N_MAX}")
    if not 1 <= cfg.walk_levels <= N_MAX:
        raise ConfigError("walk_levels", f"must lie in 1..{N_MAX}")
    parse_box(cfg.box)
    for name in ("count", "pixels", "samples", "directions", "N", "centers", "basepoints", "j", "j_max",
                 "threads"):
        if getattr(cfg, name) < 1:
            raise ConfigError(name, "must be >= 1")
    radii = parse_floats(cfg.radii, "radii")
    if not radii or any(not 0 < r < 1 for r in radii) or any(b >= a for a, b in zip(radii, radii[1:])):
        raise ConfigError("radii", "must be strictly decreasing values in (0, 1)")
    d = parse_floats(cfg.deltas, "deltas")
    if not d or any(x <= 0 for x in d) or any(b >= a for a, b in zip(d, d[1:])):
        raise ConfigError("deltas", "must be strictly decreasing positive values")
    if cfg.field not in ("phi_n", "phi_tilde"):
        raise ConfigError("field", "must be phi_n or phi_tilde")
    if cfg.plane not in ("z", "w"):
        raise ConfigError("plane", "must be z or w")
    if cfg.region not in ("A", "U", "ball"):
        raise ConfigError("region", "must be A, U or ball")
    win = parse_floats(cfg.window, "window")
    if len(win) != 2 or not 1 <= win[0] <= win[1] or win[1] - win[0] + 1 > N_MAX:
        raise ConfigError("window", "expected m,n with 1 <= m <= n")
    if any(c not in "+-" for c in cfg.sheet):
        raise ConfigError("sheet", "use a string of + and -")
    if not 0 < cfg.loop_radius < 0.5:
        raise ConfigError("loop_radius", "must lie in (0, 1/2)")
    for name in ("z0", "center", "fixed", "zp", "zq"):
        parse_complex(getattr(cfg, name), name)
    if cfg.lelong_z0 != "auto":
        parse_complex(cfg.lelong_z0, "lelong_z0")
    parse_floats(cfg.norms, "norms")
