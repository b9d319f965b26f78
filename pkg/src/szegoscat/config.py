"""Experiment configuration and run manifest."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .families import FAMILIES
from .lab import KAPPA_CEILING

__all__ = ["STAGES", "DEFAULT_TOLERANCES", "ExperimentConfig", "RunManifest"]

STAGES = ("opuc", "geronimus", "evolve", "waveop", "lab")

#: Every tolerance used by a pass/fail flag; copied into each manifest.
DEFAULT_TOLERANCES = {
    "orthonormality": 1e-8,
    "szego_identity": 1e-10,
    "szego_modulus": 1e-8,
    "szego_closed_form": 1e-8,
    "density_resolution": 1e-8,
    "geronimus_defect": 1e-12,
    "unitarity": 1e-12,
    "route_agreement": 1e-6,
    "oracle_mismatch": 1e-5,
    "isometry": 1e-8,
    "completeness": 1e-6,
    "scattering_ratio": 0.5,
    "stabilized_zero": 1e-9,
    "g_matrix": 1e-8,
    "gamma_mass": 1e-10,
}

_DEFAULT_TEST_STATE = {"delta": math.pi / 16, "x0": 3 * math.pi / 4, "width": None}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one run.

    ``family`` is a descriptor understood by
    :func:`szegoscat.families.generate_family`.
    """

    family: dict = field(default_factory=lambda: {"kind": "single", "index": 0, "value": 0.5})
    stages: tuple = STAGES
    grid_M: int | None = None
    kappas: tuple = (8, 16, 32)
    T_list: tuple = (64.0, 256.0, 1024.0, 4096.0)
    evolve_T: tuple = (1.0, 5.0, 50.0, 200.0)
    test_state: dict = field(default_factory=lambda: dict(_DEFAULT_TEST_STATE))
    weights: str = "ones"
    arc_m: tuple = (64, 128)
    arc_count: int = 16
    pca_n: tuple = (16, 32, 64, 128, 256, 512, 1024, 2048)
    g_k_max: int = 12
    seed: int = 0
    strict_l2: bool = False
    allow_large_kappa: bool = False
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    out_dir: str = "out"

    def __post_init__(self):
        if not isinstance(self.family, dict) or self.family.get("kind") not in FAMILIES:
            raise ConfigError(f"family must name one of {sorted(FAMILIES)}")
        stages = tuple(self.stages)
        unknown = [s for s in stages if s not in STAGES]
        if unknown or not stages:
            raise ConfigError(f"unknown stages {unknown}; choose from {STAGES}")
        object.__setattr__(self, "stages", tuple(s for s in STAGES if s in stages))
        if self.grid_M is not None:
            M = int(self.grid_M)
            if M < 16 or M & (M - 1):
                raise ConfigError(f"grid_M must be a power of two >= 16, got {self.grid_M}")
        kappas = tuple(int(k) for k in self.kappas)
        for k in kappas:
            if k < 4:
                raise ConfigError(f"kappa must be >= 4, got {k}")
            if k > KAPPA_CEILING and not self.allow_large_kappa:
                raise ConfigError(
                    f"kappa={k} exceeds the ceiling {KAPPA_CEILING}; use --allow-large-kappa")
        object.__setattr__(self, "kappas", kappas)
        for name in ("T_list", "evolve_T"):
            vals = tuple(float(t) for t in getattr(self, name))
            if any(not math.isfinite(t) or t < 0 for t in vals):
                raise ConfigError(f"{name} must hold finite nonnegative times")
            object.__setattr__(self, name, vals)
        object.__setattr__(self, "arc_m", tuple(int(m) for m in self.arc_m))
        object.__setattr__(self, "pca_n", tuple(int(n) for n in self.pca_n))
        ts = dict(_DEFAULT_TEST_STATE)
        ts.update(self.test_state or {})
        object.__setattr__(self, "test_state", ts)
        if self.weights not in ("ones", "unimodular", "fhat"):
            raise ConfigError(f"unknown weight generator {self.weights!r}")
        tol = dict(DEFAULT_TOLERANCES)
        extra = set(self.tolerances) - set(tol)
        if extra:
            raise ConfigError(f"unknown tolerances {sorted(extra)}")
        tol.update({k: float(v) for k, v in self.tolerances.items()})
        object.__setattr__(self, "tolerances", tol)

    @classmethod
    def from_dict(cls, d):
        names = set(cls.__dataclass_fields__)
        extra = set(d) - names
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        try:
            d = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(d)

    def to_dict(self):
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    @property
    def digest(self):
        """SHA-256 of the canonical JSON form, excluding the output directory."""
        d = self.to_dict()
        d.pop("out_dir")
        text = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class RunManifest:
    config_hash: str
    version: str
    tolerances: dict
    config: dict
    timings: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)
