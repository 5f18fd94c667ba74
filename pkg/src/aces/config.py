"""Experiment configuration: YAML file schema and validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .clifford import DEFAULT_1Q_SET, DEFAULT_2Q_SET, GateKind
from .generator import ExperimentDesignSpec, geometric_half_depths
from .noise import DEFAULT_ERROR_RANGES


class ConfigError(ValueError):
    pass


@dataclass
class RankRetryConfig:
    max_attempts: int = 4
    extra_circuits: int = 3
    retry_pad_depth: int = 10


@dataclass
class NoiseConfig:
    source: str = "random"  # "random" or "file"
    ranges: dict = field(default_factory=lambda: dict(DEFAULT_ERROR_RANGES))
    path: str | None = None


@dataclass
class ExperimentConfig:
    n: int
    circuits: int
    depth_min: int
    depth_max: int
    pad_depth: int
    weight2_fraction: float
    weight_cap: int
    shots: list[int]
    seed: int
    output_dir: str
    noise: NoiseConfig
    rank_retry: RankRetryConfig
    gate_set_1q: tuple[GateKind, ...] = DEFAULT_1Q_SET
    gate_set_2q: tuple[GateKind, ...] = DEFAULT_2Q_SET

    def design_spec(self) -> ExperimentDesignSpec:
        return ExperimentDesignSpec(
            n=self.n,
            circuit_count=self.circuits,
            half_depths=geometric_half_depths(self.depth_min, self.depth_max, self.circuits),
            pad_depth=self.pad_depth,
            weight2_fraction=self.weight2_fraction,
            weight_cap=self.weight_cap,
            seed=self.seed,
            one_q_set=self.gate_set_1q,
            two_q_set=self.gate_set_2q,
        )


def load_config(path, seed_override=None, shots_override=None, out_override=None) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path) as f:
        raw = yaml.safe_load(f)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a YAML mapping")
    try:
        noise_raw = raw.get("noise", {})
        noise = NoiseConfig(
            source=noise_raw.get("source", "random"),
            ranges={k: tuple(v) for k, v in noise_raw.get(
                "ranges", DEFAULT_ERROR_RANGES).items()},
            path=noise_raw.get("path"),
        )
        retry_raw = raw.get("rank_retry", {})
        retry = RankRetryConfig(
            max_attempts=int(retry_raw.get("max_attempts", RankRetryConfig.max_attempts)),
            extra_circuits=int(retry_raw.get("extra_circuits", RankRetryConfig.extra_circuits)),
            retry_pad_depth=int(retry_raw.get("retry_pad_depth", RankRetryConfig.retry_pad_depth)),
        )
        shots = shots_override or [int(s) for s in raw["shots"]]
        cfg = ExperimentConfig(
            n=int(raw["n"]),
            circuits=int(raw["circuits"]),
            depth_min=int(raw.get("depth_min", 2)),
            depth_max=int(raw.get("depth_max", 16)),
            pad_depth=int(raw.get("pad_depth", 5)),
            weight2_fraction=float(raw.get("weight2_fraction", 1.0)),
            weight_cap=int(raw.get("weight_cap", 6)),
            shots=list(shots),
            seed=int(seed_override if seed_override is not None else raw["seed"]),
            output_dir=str(out_override or raw.get("output_dir", "out")),
            noise=noise,
            rank_retry=retry,
            gate_set_1q=tuple(GateKind(k) for k in raw.get(
                "gate_set_1q", [k.value for k in DEFAULT_1Q_SET])),
            gate_set_2q=tuple(GateKind(k) for k in raw.get(
                "gate_set_2q", [k.value for k in DEFAULT_2Q_SET])),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key: {exc}") from exc
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.n < 2:
        raise ConfigError("need n >= 2")
    if cfg.circuits < 1:
        raise ConfigError("need at least one circuit")
    if any(s < 1 for s in cfg.shots):
        raise ConfigError("shots values must be >= 1")
    if cfg.noise.source not in ("random", "file"):
        raise ConfigError(f"unknown noise source {cfg.noise.source!r}")
    if cfg.noise.source == "file":
        if not cfg.noise.path:
            raise ConfigError("noise.source=file needs noise.path")
        if not Path(cfg.noise.path).exists():
            raise ConfigError(f"noise model file not found: {cfg.noise.path}")
    for name, (lo, hi) in cfg.noise.ranges.items():
        if lo < 0 or hi >= 1 or hi < lo:
            raise ConfigError(f"invalid error range {name}: ({lo}, {hi})")
