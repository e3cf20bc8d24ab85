"""Experiment configuration: TOML files with [offspring], [step], [experiment]."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..errors import ConfigError, InvalidParameters, RegimeError
from ..gw import scale_policy
from ..offspring import OffspringLaw, make_offspring
from ..steps import StepLaw, make_step

ESTIMATORS = ("direct", "factorized", "both")


@dataclass(frozen=True)
class ExperimentConfig:
    offspring: dict
    step: dict
    d: int
    n_list: tuple[int, ...]
    r_list: tuple[float, ...]
    estimator: str = "direct"
    M: int = 2000
    budget: int = 10**6
    eps_trunc: float = 1e-3
    cap: int = 10**7
    master_seed: int = 0
    workers: int = 1
    output: str | None = None
    format: str = "csv"
    field_mode: str = "lebesgue"
    scale: str = "auto"
    tolerance: float = 0.03
    shells: int = 16
    pilot_fraction: float = 0.1
    name: str = "experiment"
    law: OffspringLaw = field(default=None, compare=False, repr=False)
    step_law: StepLaw = field(default=None, compare=False, repr=False)

    @property
    def regime(self) -> str:
        return self.law.regime.value

    def a_n(self, n: int) -> float:
        if self.scale == "raw":
            return 1.0
        return scale_policy(self.law, self.d)(n)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


def _as_tuple(x, typ):
    if isinstance(x, (list, tuple)):
        return tuple(typ(v) for v in x)
    return (typ(x),)


def config_from_dict(tree: dict) -> ExperimentConfig:
    """Build and validate a config from the parsed key-value tree."""
    try:
        off = dict(tree["offspring"])
        stp = dict(tree["step"])
        exp = dict(tree["experiment"])
    except KeyError as exc:
        raise ConfigError(f"config is missing section [{exc.args[0]}]")
    try:
        d = int(exp.get("d", stp.get("d", 1)))
        stp.setdefault("d", d)
        law = make_offspring(off.pop("kind"), **off)
        step_law = make_step(stp.pop("component"), **stp)
    except KeyError as exc:
        raise ConfigError(f"missing key {exc.args[0]!r}")
    except InvalidParameters as exc:
        raise ConfigError(str(exc))
    if step_law.d != d:
        raise ConfigError(f"step dimension {step_law.d} does not match experiment d = {d}")
    if "n" not in exp or "r" not in exp:
        raise ConfigError("[experiment] needs both n and r")
    cfg = ExperimentConfig(
        offspring=dict(tree["offspring"]), step=dict(tree["step"]), d=d,
        n_list=_as_tuple(exp["n"], int), r_list=_as_tuple(exp["r"], float),
        estimator=str(exp.get("estimator", "direct")).lower(),
        M=int(exp.get("M", 2000)), budget=int(exp.get("budget", 10**6)),
        eps_trunc=float(exp.get("eps_trunc", 1e-3)), cap=int(exp.get("cap", 10**7)),
        master_seed=int(exp.get("seed", exp.get("master_seed", 0))),
        workers=int(exp.get("workers", 1)), output=exp.get("output"),
        format=str(exp.get("format", "csv")).lower(),
        field_mode=str(exp.get("field_mode", "lebesgue")).lower(),
        scale=str(exp.get("scale", "auto")).lower(),
        tolerance=float(exp.get("tolerance", 0.03)),
        shells=int(exp.get("shells", 16)),
        pilot_fraction=float(exp.get("pilot_fraction", 0.1)),
        name=str(exp.get("name", "experiment")),
        law=law, step_law=step_law,
    )
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.estimator not in ESTIMATORS:
        raise ConfigError(f"estimator must be one of {ESTIMATORS}, got {cfg.estimator!r}")
    if cfg.M < 100:
        raise ConfigError(f"M must be at least 100, got {cfg.M}")
    if not 0.0 < cfg.eps_trunc <= 0.01:
        raise ConfigError(f"eps_trunc must lie in (0, 0.01], got {cfg.eps_trunc}")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg.format!r}")
    if cfg.scale not in ("auto", "raw"):
        raise ConfigError(f"scale must be auto or raw, got {cfg.scale!r}")
    if any(n < 0 for n in cfg.n_list) or any(not (r > 0 and math.isfinite(r)) for r in cfg.r_list):
        raise ConfigError("n values must be >= 0 and r values positive")
    if cfg.cap < 1 or cfg.workers < 1 or cfg.budget < 1:
        raise ConfigError("cap, workers and budget must be positive")
    if cfg.scale == "auto":
        try:
            scale_policy(cfg.law, cfg.d)
        except RegimeError as exc:
            raise ConfigError(str(exc))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        tree = tomllib.loads(path.read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    return config_from_dict(tree)
