"""Run configuration: JSON on disk, typed dataclasses in memory.

Every key has a default (the tiny desk-scale configuration); unknown keys are
rejected so typos fail loudly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from .errors import FormatError


@dataclass
class NetConfig:
    scales: int = 2
    base_channels: int = 16
    blocks_per_scale: int = 1
    heads: int = 4
    dw_kernels: list = field(default_factory=lambda: [3, 5])
    sdu_kernels: list = field(default_factory=lambda: [1, 3, 5])
    ffn_expansion: int = 2


@dataclass
class DiffusionConfig:
    steps: int = 50
    beta_start: float = 0.002
    beta_end: float = 0.4
    loss: str = "l1"
    denoiser_base: int = 16
    time_dim: int = 32

    def validate(self):
        if self.steps < 1:
            raise FormatError(f"diffusion.steps must be >= 1, got {self.steps}")
        if not (0.0 < self.beta_start <= self.beta_end < 1.0):
            raise FormatError("diffusion betas must satisfy 0 < start <= end < 1")
        if self.loss not in ("l1", "l2"):
            raise FormatError(f"diffusion.loss must be l1 or l2, got {self.loss!r}")


@dataclass
class TrainConfig:
    lr: float = 2e-3
    stage1_steps: int = 2000
    stage2_steps: int = 2000
    loss_h_weight: float = 1.0
    loss_a_weight: float = 0.1
    seed: int = 0


@dataclass
class RunConfig:
    net: NetConfig = field(default_factory=NetConfig)
    diffusion: DiffusionConfig = field(default_factory=DiffusionConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def to_dict(self) -> dict:
        return asdict(self)


def _build(cls, data: dict, path: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise FormatError(f"unknown config key(s) under {path or 'root'}: {sorted(unknown)}")
    return cls(**data)


def config_from_dict(data: dict) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise FormatError(f"unknown config key(s): {sorted(unknown)}")
    cfg = RunConfig(
        net=_build(NetConfig, data.get("net", {}), "net"),
        diffusion=_build(DiffusionConfig, data.get("diffusion", {}), "diffusion"),
        train=_build(TrainConfig, data.get("train", {}), "train"),
    )
    cfg.diffusion.validate()
    return cfg


def load_config(path) -> RunConfig:
    with open(path) as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"config parse error at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(data, dict):
        raise FormatError("config root must be a JSON object")
    return config_from_dict(data)


def save_config(cfg: RunConfig, path) -> None:
    with open(path, "w") as f:
        json.dump(cfg.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
