"""Model hyperparameters and the ``key = value`` config file format."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class ModelConfig:
    m: int = 60
    K: int = 100
    filter_widths: tuple[int, ...] = (2, 3, 4)
    feature_maps: int = 128
    pool_window: int = 5
    conv_depth: int = 1
    dense_depth: int = 2
    dense_hidden: int = 60
    dropout: float = 0.2
    learning_rate: float = 0.001
    batch_size: int = 50
    epochs: int = 100
    threshold: float = 0.5
    embeddings_trainable: bool = True
    seed: int = 0

    def __post_init__(self):
        widths = tuple(sorted({int(h) for h in self.filter_widths}))
        object.__setattr__(self, "filter_widths", widths)
        self.validate()

    def validate(self):
        for name in ("m", "K", "feature_maps", "pool_window", "conv_depth",
                     "dense_depth", "dense_hidden", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.conv_depth > 4 or self.dense_depth > 3:
            raise ConfigError("conv_depth must be 1-4 and dense_depth 1-3")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if not self.filter_widths or min(self.filter_widths) < 1:
            raise ConfigError("filter_widths must be a non-empty set of positive widths")
        if not 0 <= self.dropout < 1:
            raise ConfigError(f"dropout must lie in [0, 1), got {self.dropout}")
        if not 0 < self.threshold < 1:
            raise ConfigError(f"threshold must lie in (0, 1), got {self.threshold}")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        for h in self.filter_widths:
            if conv_output_length(self.m, h, self.conv_depth) < 1:
                raise ConfigError(
                    f"width {h} at depth {self.conv_depth} does not fit a sequence of length {self.m}"
                )

    def with_(self, **changes) -> "ModelConfig":
        return replace(self, **changes)


def conv_output_length(m: int, h: int, depth: int) -> int:
    return m - depth * (h - 1)


def pooled_length(config: ModelConfig, h: int) -> int:
    return math.ceil(conv_output_length(config.m, h, config.conv_depth) / config.pool_window)


def flatten_size(config: ModelConfig) -> int:
    """Length of the concatenated pooled feature vector."""
    return config.feature_maps * sum(pooled_length(config, h) for h in config.filter_widths)


FIELD_NAMES = tuple(f.name for f in fields(ModelConfig))


def _parse_value(name: str, text: str):
    text = text.strip()
    if name == "filter_widths":
        return tuple(int(v) for v in text.replace(" ", "").strip("{}()[]").split(",") if v)
    if name == "embeddings_trainable":
        low = text.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if name in ("dropout", "learning_rate", "threshold"):
        return float(text)
    return int(text)


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def parse_config_text(text: str, base: ModelConfig | None = None) -> ModelConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in FIELD_NAMES:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _parse_value(key, value)
        except ValueError as exc:
            raise ConfigError(f"config line {lineno}: bad value for {key}: {exc}") from None
    return replace(base, **values) if base is not None else ModelConfig(**values)


def read_config(path: str | Path, base: ModelConfig | None = None) -> ModelConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"), base)


def config_to_text(config: ModelConfig) -> str:
    return "".join(f"{k} = {format_value(v)}\n" for k, v in asdict(config).items())


def write_config(config: ModelConfig, path: str | Path) -> None:
    Path(path).write_text(config_to_text(config), encoding="utf-8")
