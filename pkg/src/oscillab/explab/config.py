"""Experiment configuration: one dataclass, per-experiment defaults, JSON/TOML loading."""
from dataclasses import dataclass, field, fields, asdict, replace
import json
import math
import os

from ..errors import ConfigError

EXPERIMENTS = ("knapp", "wavepackets", "transequi", "rescale", "decouple", "partition",
               "exponents", "phase", "broad")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    n: int = 2
    lam: float = 4096.0
    r: float = 256.0
    rho: float = 64.0
    K: float = 2.0
    k: int = 2
    A: int = 1
    p: float = 4.0
    alpha: float = 0.0
    delta: float = 0.1
    delta_m: float = 0.1
    eps: float = 0.1
    c_n: float = 4.0
    grid: int = 16384
    samples: int = 100
    seed: int = 0
    scales: tuple = ()
    pairs: tuple = ()
    extra: dict = field(default_factory=dict)
    out_dir: str = "reports"

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.name!r}; choose from {EXPERIMENTS}")
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if self.lam <= 0 or self.r < 1:
            raise ConfigError("need lam > 0 and r >= 1")
        if self.name in ("wavepackets", "transequi"):
            self.check_scales(self.r, self.rho)
            for r, rho in self.pairs:
                self.check_scales(r, rho)
        if self.grid < 8:
            raise ConfigError("grid must have at least 8 points per axis")
        object.__setattr__(self, "scales", tuple(self.scales))
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))

    def check_scales(self, r, rho):
        if not (math.sqrt(r) - 1e-9 <= rho <= r + 1e-9):
            raise ConfigError(f"scale ordering violated: need sqrt(r) <= rho <= r, "
                              f"got r={r}, rho={rho}; raise rho or lower r")
        cap = self.lam ** (1 - self.eps)
        if r > cap * (1 + 1e-12):
            raise ConfigError(f"r={r} exceeds lam^(1-eps)={cap:.4g}; raise lam or lower r")

    def to_dict(self):
        d = asdict(self)
        d["scales"] = list(self.scales)
        d["pairs"] = [list(p) for p in self.pairs]
        return d

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


DEFAULTS = {
    "knapp": dict(n=2, p=4.0, scales=(1 / 8, 1 / 16, 1 / 32), grid=1024,
                  extra={"box": 256.0, "offsets": [-0.2, 0.3]}),
    "wavepackets": dict(n=2, lam=4096.0, r=256.0, rho=64.0, delta=0.1, grid=16384,
                        extra={"v_radius": 1024.0, "x0_frac": 0.3, "ball_per_axis": 128}),
    "transequi": dict(n=2, lam=4096.0, r=256.0, rho=64.0, delta=0.1, delta_m=0.1,
                      grid=16384, samples=10, pairs=((256.0, 64.0), (1024.0, 128.0)),
                      extra={"z": "hyperplane", "v_radius": 1024.0, "x0_frac": 0.3}),
    "rescale": dict(n=2, lam=1024.0, K=2.0, samples=100, grid=4096,
                    extra={"corners": 1000, "w": [0.25]}),
    "decouple": dict(n=2, lam=1024.0, K=8.0, p=4.0, samples=1000, grid=64,
                     extra={"trials": 8}),
    "partition": dict(n=3, samples=10000, extra={"d": 4, "lines": 1000}),
    "exponents": dict(n=3, k=2, extra={"n_max": 20}),
    "phase": dict(n=3, lam=64.0, samples=1000, extra={"l2_functions": 20, "l2_slices": 8}),
    "broad": dict(n=3, K=8.0, k=2, p=4.0, samples=100, extra={"A_values": [1, 2, 4]}),
}


def default_config(name, **overrides):
    if name not in DEFAULTS:
        raise ConfigError(f"unknown experiment {name!r}")
    base = dict(DEFAULTS[name])
    extra = dict(base.pop("extra", {}))
    extra.update(overrides.pop("extra", None) or {})
    base.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(name=name, extra=extra, **base)


def load_config(path, name=None, **overrides):
    """Read JSON or TOML; keys mirror ExperimentConfig fields, unknown keys go to `extra`."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if path.endswith(".toml"):
        try:
            import tomllib as toml
        except ModuleNotFoundError:
            try:
                import tomli as toml
            except ModuleNotFoundError as exc:
                raise ConfigError("TOML configs need Python 3.11+ or the tomli package") from exc
        data = toml.loads(raw.decode("utf-8"))
    else:
        data = json.loads(raw.decode("utf-8"))
    name = name or data.pop("name", None) or data.pop("experiment", None)
    data.pop("name", None)
    known = {f.name for f in fields(ExperimentConfig)}
    extra = dict(data.pop("extra", {}))
    for k in list(data):
        if k not in known:
            extra[k] = data.pop(k)
    data.update({k: v for k, v in overrides.items() if v is not None})
    return default_config(name, extra=extra, **data)


def out_path(cfg, suffix):
    os.makedirs(cfg.out_dir, exist_ok=True)
    return os.path.join(cfg.out_dir, f"{cfg.name}.{suffix}")
