#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   utils/config.py
@Time    :   2026/10/19
@Desc    :   Experiment configuration: typed model, YAML / key=value loading, config hash
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from mobility.geo import Grid
from privacy.pim import PimParams
from utils.errors import ConfigError
from workflow.attacks import Attack, AttackConfig
from workflow.base import FingerprintConfig, Scheme

DEFAULT_CONFIG_PATHS = (
    Path("config/experiment.yaml"),
    Path("experiment.yaml"),
)

# YAML sections are flattened into the same key space as key=value files
SECTIONS = ("grid", "pim", "fingerprint", "attack", "experiment", "utility", "runtime")


class ExperimentConfig(BaseModel):
    """Every knob of a run; defaults are the desk-scale reproduction settings"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    # grid
    n: int = Field(30, ge=2)
    x_min: float = 0.0
    y_min: float = 0.0
    x_max: float = 30.0
    y_max: float = 30.0
    # data
    trajectory_count: int = Field(100, ge=1)
    trajectory_length: int = Field(100, ge=2)
    model_corpus_size: int = Field(200, ge=1)
    model_support: int = Field(4, ge=1)
    # dp
    epsilon: Optional[float] = Field(None, gt=0)
    epsilons: List[float] = Field(default_factory=lambda: [0.9, 1.7, 2.5])
    delta: float = Field(0.01, gt=0, lt=1)
    isotropic_samples: int = Field(4096, ge=16)
    post_process: bool = True
    # fingerprinting
    scheme: Scheme = Scheme.DSFS
    schemes: List[Scheme] = Field(default_factory=lambda: [Scheme.DSFS, Scheme.PFS, Scheme.BONEH_SHAW, Scheme.TARDOS])
    n_analyzers: int = Field(100, ge=1)
    p: float = Field(0.4, gt=0, lt=1)
    tau: float = Field(0.005, ge=0, le=1)
    theta: float = Field(0.5, ge=0, le=1)
    sigma: Optional[float] = Field(None, ge=0, le=1)
    omega: float = Field(0.01, gt=0, lt=1)
    bs_block: Optional[int] = Field(None, ge=1)
    code_length: Optional[int] = Field(None, ge=1)
    # attack
    attack: Attack = Attack.NONE
    p_r: float = Field(0.8, ge=0, le=1)
    p_c: float = Field(0.8, ge=0, le=1)
    tau_attack: Optional[float] = Field(None, ge=0, le=1)
    p_e: Optional[float] = Field(None, ge=0, le=1)
    c: int = Field(3, ge=2)
    p_a: float = Field(0.4, ge=0, lt=1)
    leak_count: int = Field(1, ge=1)
    # experiment
    sweep_variable: Optional[str] = None
    sweep_values: List[Any] = Field(default_factory=list)
    trials: int = Field(200, ge=1)
    master_seed: int = Field(0, ge=0)
    query_count: int = Field(200, ge=1)
    pattern_count: int = Field(200, ge=1)
    # runtime
    max_workers: int = Field(1, ge=1)
    log_level: str = "INFO"
    log_dir: str = "logs"
    output_dir: str = "results"

    @model_validator(mode="after")
    def _check(self) -> "ExperimentConfig":
        if self.sweep_variable is not None:
            if self.sweep_variable not in type(self).model_fields:
                raise ValueError(f"unknown sweep variable {self.sweep_variable!r}")
            if self.sweep_variable in ("sweep_variable", "sweep_values"):
                raise ValueError("cannot sweep over the sweep settings themselves")
            if not self.sweep_values:
                raise ValueError("sweep_values must be nonempty when sweep_variable is set")
        if self.leak_count > self.trajectory_count:
            raise ValueError(f"leak_count {self.leak_count} exceeds trajectory_count {self.trajectory_count}")
        if not self.epsilons:
            raise ValueError("epsilons must be nonempty")
        Grid(n=self.n, x_min=self.x_min, y_min=self.y_min, x_max=self.x_max, y_max=self.y_max)
        return self

    # -- derived parameter objects ----------------------------------------

    @property
    def grid(self) -> Grid:
        return Grid(n=self.n, x_min=self.x_min, y_min=self.y_min, x_max=self.x_max, y_max=self.y_max)

    def pim_params(self, epsilon: Optional[float] = None) -> PimParams:
        eps = epsilon if epsilon is not None else self.epsilon
        if eps is None:
            raise ConfigError("no epsilon configured for a DP run")
        return PimParams(epsilon=eps, delta=self.delta, isotropic_samples=self.isotropic_samples)

    @property
    def fingerprint(self) -> FingerprintConfig:
        return FingerprintConfig(
            p=self.p, tau=self.tau, theta=self.theta, sigma=self.sigma,
            c=self.c, omega=self.omega, bs_block=self.bs_block, code_length=self.code_length,
        )

    @property
    def attack_config(self) -> AttackConfig:
        """Attacker defaults: the defender's tau, and p_e equal to the true ratio"""
        return AttackConfig(
            p_r=self.p_r,
            p_c=self.p_c,
            tau_attack=self.tau if self.tau_attack is None else self.tau_attack,
            p_e=self.p if self.p_e is None else self.p_e,
            c=self.c,
            p_a=self.p_a,
        )

    @property
    def colluders(self) -> int:
        return min(self.c, self.n_analyzers) if self.attack.is_collusion else 1

    # -- sweeps -------------------------------------------------------------

    def with_updates(self, **updates: Any) -> "ExperimentConfig":
        """Validated copy with some fields replaced"""
        try:
            return type(self).model_validate({**self.model_dump(), **updates})
        except ValidationError as e:
            raise ConfigError(f"invalid configuration update {updates}: {e}") from e

    def sweep(self) -> Iterator[Tuple[Any, "ExperimentConfig"]]:
        """(sweep value, config at that value); a single point when no sweep is configured"""
        if self.sweep_variable is None:
            yield None, self
            return
        for value in self.sweep_values:
            yield value, self.with_updates(**{self.sweep_variable: value})

    def config_hash(self) -> str:
        return config_hash(self)


def config_hash(cfg: BaseModel) -> str:
    """SHA-256 of the canonical JSON of the effective config"""
    canonical = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _flatten(data: Dict[str, Any]) -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key, value in data.items():
        if key in SECTIONS and isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    return flat


def parse_key_values(text: str) -> Dict[str, Any]:
    """Flat key=value lines; values are parsed as YAML scalars or flow lists, '#' starts a comment"""
    out: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            out[key] = yaml.safe_load(value) if value else None
        except yaml.YAMLError as e:
            raise ConfigError(f"line {lineno}: cannot parse value {value!r}: {e}") from e
    return out


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".yaml", ".yml"):
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must contain a mapping at the top level")
        return _flatten(data)
    return parse_key_values(text)


def default_config_file() -> Optional[Path]:
    for path in DEFAULT_CONFIG_PATHS:
        if path.exists():
            return path
    return None


def build_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """File values (explicit path or a default location), then overrides on top"""
    values: Dict[str, Any] = {}
    source = Path(path) if path else default_config_file()
    if source is not None:
        values.update(load_config_file(source))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return ExperimentConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
