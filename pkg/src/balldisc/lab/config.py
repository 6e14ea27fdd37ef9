"""Experiment configuration: versioned JSON, validated against each kind's hypotheses."""
from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

SCHEMA_VERSION = 1

KINDS = ("lp_lower", "lp_sharp", "morrey_lower", "morrey_sharp", "jitter_rates", "holder_rates",
         "signed_weights", "certificate_audit")


class ConfigError(ValueError):
    """Configuration violates a hypothesis or the schema."""


# per-kind defaults; anything the user sets wins.  The sharp kinds avoid
# r = 1/4: in d = 1 it makes w(Hk) vanish for even H and the value is 0.
_DEFAULTS = {
    "lp_lower": dict(N=[16, 64, 256], p=2.0, families=["jittered", "grid_shift"], replicates=5),
    "lp_sharp": dict(H=[4, 8, 16, 32], p=2.0, r=0.2, density={"recipe": "periodized_bump", "M": 4}),
    "morrey_lower": dict(N=[16, 64, 256], lam=1.0, families=["jittered", "grid_shift"], replicates=5),
    "morrey_sharp": dict(H=[4, 8, 16], lam=0.5, r=0.2, bump_M=[2, 4, 8]),
    "jitter_rates": dict(H=[2, 4, 8, 16], density={"recipe": "constant"}, expected_slope=None),
    "holder_rates": dict(H=[4, 8, 16, 32, 64], beta=1.0, r=0.25, slope_tolerance=0.15),
    "signed_weights": dict(k=list(range(1, 33)), slope_tolerance=0.3),
    "certificate_audit": dict(N=[16, 64, 256], M=[4, 8, 16, 32], kernel="fejer_tensor",
                              replicates=4, alpha="uniform"),
}


@dataclass
class ExperimentConfig:
    kind: str
    d: int = 1
    N: list | None = None
    H: list | None = None
    k: list | None = None
    M: list | None = None
    bump_M: list | None = None
    density: dict = field(default_factory=lambda: {"recipe": "constant"})
    r: float | None = None
    a: float = 0.1
    b: float = 0.4
    p: float | None = None
    lam: float | None = None
    beta: float | None = None
    kernel: str = "fejer_tensor"
    kernel_order: int = 2
    families: list | None = None
    alpha: str = "uniform"
    seed: int = 0
    tolerance: float = 1e-8
    replicates: int = 0
    expected_slope: float | None = None
    slope_tolerance: float = 0.10
    threads: int = 1
    schema_version: int = SCHEMA_VERSION

    # ---------------------------------------------------------------- build
    @classmethod
    def from_dict(cls, raw):
        raw = dict(raw)
        if raw.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {raw.get('schema_version')}")
        kind = raw.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        merged = copy.deepcopy(_DEFAULTS[kind])
        merged.update({k: v for k, v in raw.items() if v is not None})
        cfg = cls(**merged)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path, overrides=None):
        raw = json.loads(Path(path).read_text())
        raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(raw)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    # ----------------------------------------------------------- validation
    def validate(self):
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.d in (1, 2, 3), f"d must be 1, 2 or 3, got {self.d}")
        need(0 < self.a < self.b < 0.5, f"need 0 < a < b < 1/2, got a={self.a}, b={self.b}")
        if self.r is not None:
            need(0 < self.r < 0.5, f"need 0 < r < 1/2, got {self.r}")
        if self.p is not None:
            need(1 < self.p <= 2, f"need 1 < p <= 2, got {self.p}")
        if self.lam is not None:
            need(0 < self.lam <= self.d, f"need 0 < lambda <= d = {self.d}, got {self.lam}")
        if self.beta is not None:
            need(0 < self.beta <= 1, f"need 0 < beta <= 1, got {self.beta}")
        need(self.tolerance > 0, "tolerance must be positive")
        need(0 <= self.seed < 2**64, "seed must be an unsigned 64-bit integer")
        need(self.threads >= 1, "threads must be >= 1")
        for name in ("N", "H", "k", "M", "bump_M"):
            v = getattr(self, name)
            if v is not None:
                need(len(v) >= 1 and all(int(x) == x and x >= 1 for x in v),
                     f"{name} must be a nonempty list of positive integers")
                need(list(v) == sorted(v), f"{name} must be ascending")
        kind = self.kind
        if kind in ("lp_lower", "lp_sharp"):
            need(self.p is not None, f"{kind} needs p")
        if kind in ("morrey_lower", "morrey_sharp"):
            need(self.lam is not None, f"{kind} needs lam")
        if kind == "morrey_sharp":
            need(self.lam < self.d, "morrey_sharp needs 0 < lambda < d")
        if kind == "holder_rates":
            need(self.beta is not None, "holder_rates needs beta")
        if kind in ("lp_lower", "morrey_lower", "certificate_audit"):
            need(self.N is not None, f"{kind} needs N")
        if kind in ("lp_sharp", "morrey_sharp", "jitter_rates", "holder_rates"):
            need(self.H is not None and len(self.H) >= (3 if kind != "morrey_sharp" else 1),
                 f"{kind} needs an H list (>= 3 entries for slope fits)")
        if kind == "certificate_audit":
            need(self.kernel in ("fejer_tensor", "smooth_bump"), f"unknown kernel {self.kernel!r}")
            need(self.alpha in ("uniform", "random", "signed"), f"unknown alpha scheme {self.alpha!r}")
        if kind in ("morrey_lower",) and self.lam is not None and self.lam >= 2:
            need(self.kernel == "smooth_bump" and 2 * self.kernel_order + self.d + 1 >= self.lam + 1,
                 "lambda >= 2 needs a smooth_bump kernel with decay order >= lambda + 1")
        if kind == "signed_weights":
            need(self.k is not None and len(self.k) >= 3, "signed_weights needs >= 3 frequencies k")
        if self.replicates and kind == "jitter_rates":
            need(self.replicates >= 100, "Monte Carlo needs >= 100 replicates")
        return self
