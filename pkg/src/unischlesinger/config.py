"""Experiment configuration: parsing, validation and defaults."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .families import FAMILIES

CONFIG_KEYS = (
    "family", "family_params", "N", "M", "N_B", "h", "m_max", "n_max",
    "probes", "diffeo", "suites", "seed", "tolerances",
)
SUITES = ("factorization", "schlesinger", "integrability", "bridge")

DEFAULT_TOLERANCES = {
    "jump": 1e-10,
    "oracle": 1e-10,
    "uniqueness": 1e-11,
    "det_formula": 1e-9,
    "det_ode": 1e-8,
    "additive_jump": 1e-8,
    "B0": 1e-9,
    "omega_field": 1e-9,
    "routes": 1e-8,
    "decay": 1e-2,
    "schlesinger": 1e-6,
    "isomonodromy": 1e-7,
    "integrability": 1e-6,
    "virasoro": 1e-5,
    "ks": 1e-12,
    "tmap": 1e-6,
    "order": 0.3,
    "floor": 2e-12,
}
# order and floor describe the fit, not a residual bound
UNSCALED = ("order", "floor")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    family: str
    family_params: dict = field(default_factory=dict)
    N: int = 2
    M: tuple = (64,)
    N_B: int = 16
    h: tuple = (1e-4,)
    m_max: int = 3
    n_max: int = 3
    probes: tuple = (0.0, 0.5, 2.0, 10.0)
    diffeo: dict | None = None
    suites: tuple = SUITES
    seed: int = 0
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        for name in ("N", "N_B", "m_max", "n_max"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < (0 if name == "m_max" else 1):
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if not self.M or any(not isinstance(m, int) or m < 1 for m in self.M):
            raise ConfigError(f"M must be a positive integer or list of them, got {self.M!r}")
        if not self.h or any(not isinstance(h, (int, float)) or h <= 0 for h in self.h):
            raise ConfigError(f"h must be a positive number or list of them, got {self.h!r}")
        if max(self.m_max, self.n_max) > self.N_B // 2:
            raise ConfigError(f"index window ({self.m_max}, {self.n_max}) exceeds N_B/2 = {self.N_B // 2}")
        if self.N_B + 1 > min(self.M):
            raise ConfigError(f"N_B = {self.N_B} needs M >= {self.N_B + 1}")
        bad = [s for s in self.suites if s not in SUITES]
        if bad or not self.suites:
            raise ConfigError(f"unknown suites {bad}; expected a non-empty subset of {SUITES}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance keys {sorted(unknown)}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.diffeo is not None:
            extra = set(self.diffeo) - {"cos", "sin", "const", "cutoff"}
            if extra:
                raise ConfigError(f"unknown diffeo keys {sorted(extra)}")

    @property
    def ordered_suites(self) -> tuple:
        """Selected suites in dependency order."""
        return tuple(s for s in SUITES if s in self.suites)

    def tolerance(self, key: str, scale: float = 1.0) -> float:
        tol = {**DEFAULT_TOLERANCES, **self.tolerances}[key]
        return tol if key in UNSCALED else tol * scale

    def resolved_tolerances(self, scale: float = 1.0) -> dict:
        return {k: self.tolerance(k, scale) for k in DEFAULT_TOLERANCES}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["probes"] = [[p.real, p.imag] if isinstance(p, complex) else p for p in self.probes]
        for key in ("M", "h", "suites"):
            d[key] = list(d[key])
        return d


def _as_tuple(v) -> tuple:
    return tuple(v) if isinstance(v, (list, tuple)) else (v,)


def _probe(p):
    if isinstance(p, (list, tuple)):
        if len(p) != 2:
            raise ConfigError(f"complex probe must be [re, im], got {p!r}")
        return complex(p[0], p[1])
    if isinstance(p, (int, float)) and not isinstance(p, bool):
        return float(p)
    raise ConfigError(f"bad probe {p!r}")


def parse_config(raw: dict) -> ExperimentConfig:
    """Build a config from a decoded JSON object; unknown keys are errors."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    if "family" not in raw:
        raise ConfigError("config needs a 'family'")
    kw = dict(raw)
    for key in ("M", "h", "suites"):
        if key in kw:
            kw[key] = _as_tuple(kw[key])
    if "probes" in kw:
        kw["probes"] = tuple(_probe(p) for p in kw["probes"])
    for key in ("family_params", "tolerances"):
        if kw.get(key) is None:
            kw[key] = {}
        elif not isinstance(kw[key], dict):
            raise ConfigError(f"{key} must be an object")
    try:
        return ExperimentConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(raw)
