"""Pipeline configuration: every tunable constant with its default, plus a
human-readable `key = value` file format. Unknown keys are rejected."""

from __future__ import annotations

from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError, FormatVersionMismatch, ParseError

FORMAT_HEADER = "crec-format v1 config"


@dataclass
class PipelineConfig:
    delta_threshold: int = 200  # changed lines (added + deleted) per sample
    min_tokens: int = 30
    min_lines: int = 6
    theta: float = 0.8
    link_floor: float = 0.5
    l_th: float = 0.4
    window_fraction: Fraction = Fraction(1, 10)
    recent_fraction: Fraction = Fraction(1, 4)
    boost_rounds: int = 50
    recommend_threshold: float = 0.5
    aggregation: str = "mean"
    seed: int = 0

    def validate(self) -> None:
        if self.delta_threshold < 1:
            raise ConfigError("delta_threshold must be >= 1")
        if self.min_tokens < 1 or self.min_lines < 1:
            raise ConfigError("min_tokens and min_lines must be >= 1")
        if not 0.0 < self.theta <= 1.0:
            raise ConfigError("theta must be in (0, 1]")
        if not 0.0 <= self.link_floor <= 1.0:
            raise ConfigError("link_floor must be in [0, 1]")
        if not 0.0 <= self.l_th <= 1.0:
            raise ConfigError("l_th must be in [0, 1]")
        if not 0 < self.window_fraction <= 1 or not 0 < self.recent_fraction <= 1:
            raise ConfigError("window/recent fractions must be in (0, 1]")
        if self.boost_rounds < 1:
            raise ConfigError("boost_rounds must be >= 1")
        if not 0.0 < self.recommend_threshold <= 1.0:
            raise ConfigError("recommend_threshold must be in (0, 1]")
        if self.aggregation not in ("mean", "max"):
            raise ConfigError("aggregation must be mean or max")


def _format_value(value) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return repr(value) if isinstance(value, float) else str(value)


def _parse_value(name: str, kind, raw: str):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is Fraction:
            num, _, den = raw.partition("/")
            return Fraction(int(num), int(den)) if den else Fraction(int(num))
        return raw
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def save_config(config: PipelineConfig, path: str | Path) -> None:
    config.validate()
    lines = [FORMAT_HEADER]
    for f in fields(config):
        lines.append(f"{f.name} = {_format_value(getattr(config, f.name))}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_config(path: str | Path) -> PipelineConfig:
    if not Path(path).exists():
        raise ConfigError(f"config file not found: {path}")
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty config file", 1)
    head = lines[0].split()
    if len(head) != 3 or head[0] != "crec-format" or head[2] != "config":
        raise ParseError(f"bad header: {lines[0]!r}", 1)
    if head[1] != "v1":
        raise FormatVersionMismatch(f"unsupported config format version {head[1]}")
    known = {f.name: f.type for f in fields(PipelineConfig)}
    types = {"int": int, "float": float, "Fraction": Fraction, "str": str}
    config = PipelineConfig()
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, eq, raw = (part.strip() for part in line.partition("="))
        if eq != "=":
            raise ParseError(f"expected 'key = value': {line!r}", lineno)
        if key not in known:
            raise ConfigError(f"unknown config key: {key}")
        kind = types.get(str(known[key]), str)
        setattr(config, key, _parse_value(key, kind, raw))
    config.validate()
    return config
