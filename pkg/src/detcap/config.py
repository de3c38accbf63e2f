"""Experiment configuration files (TOML)."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .alphabet import ConfigAlphabet
from .capacity import CONVERSE_FACTORS, RoundSchedule
from .schemes import FamilySpec

DEMO_CONFIG = "theorem1_demo"


class ConfigError(ValueError):
    """The experiment configuration is missing or malformed."""


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    alphabet: ConfigAlphabet
    families: tuple[FamilySpec, ...]
    schedule: RoundSchedule
    grid: tuple[int, ...]
    epsilon: float = 0.05
    delta: float = 0.05
    s: float | None = None
    converse_factors: tuple[float, ...] = CONVERSE_FACTORS
    replicates: int = 10_000
    seed: int = 0
    k_check: int = 3
    raw: dict = field(default_factory=dict, compare=False, repr=False)


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"missing '{key}' in [{where}]")
    return d[key]


def parse_config(data: dict, name: str = "experiment") -> ExperimentConfig:
    try:
        alpha = _require(data, "alphabet", "top level")
        alphabet = ConfigAlphabet(tuple(_require(alpha, "values", "alphabet")),
                                  tuple(alpha["weights"]) if "weights" in alpha else None)
        fams = data.get("family") or data.get("families")
        if not fams:
            raise ConfigError("no [[family]] entries")
        if isinstance(fams, dict):
            fams = [fams]
        families = tuple(FamilySpec.from_dict(f) for f in fams)
        labels = [f.name for f in families]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"family labels must be unique, got {labels}")
        schedule = RoundSchedule.from_dict(data.get("schedule", {}))
        grid = tuple(int(n) for n in _require(data.get("grid", {}), "n", "grid"))
        if not grid:
            raise ConfigError("empty n-grid")
        if any(n < 1 for n in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"n-grid must be positive and strictly ascending, got {list(grid)}")
        target = data.get("target", {})
        replicates = int(data.get("replicates", 10_000))
        if replicates < 2:
            raise ConfigError("replicates must be at least 2")
        seed = int(data.get("seed", 0))
        if seed < 0:
            raise ConfigError("seed must be nonnegative")
        return ExperimentConfig(
            name=str(data.get("name", name)),
            alphabet=alphabet,
            families=families,
            schedule=schedule,
            grid=grid,
            epsilon=float(target.get("epsilon", 0.05)),
            delta=float(target.get("delta", 0.05)),
            s=float(target["s"]) if "s" in target else None,
            converse_factors=tuple(float(f) for f in target.get("converse_factors", CONVERSE_FACTORS)),
            replicates=replicates,
            seed=seed,
            k_check=int(data.get("k_check", 3)),
            raw=data,
        )
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config not found: {path}")
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parse_config(data, path.stem)


def bundled_config_path(name: str = DEMO_CONFIG) -> Path:
    return Path(str(resources.files("detcap") / "data" / f"{name}.toml"))


def resolve_config(ref: str | Path) -> ExperimentConfig:
    """Load a config file, or a bundled config by bare name."""
    p = Path(ref)
    if not p.exists() and p.suffix == "" and bundled_config_path(str(ref)).is_file():
        p = bundled_config_path(str(ref))
    return load_config(p)
