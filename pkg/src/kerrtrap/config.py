"""Run configuration: black-hole parameters, named tolerances, seed and output."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .spacetime import BlackHoleParams

# name -> default
TOLERANCES = {
    "rtol": 1e-10,
    "atol": 1e-10,
    "root_separation": 1e-8,
    "theta_min": 1e-3,
    "xi_floor": 1e-3,
    "neighborhood_phi": 0.1,
    "neighborhood_r": 0.2,
    "fd_step": 1e-5,
    "canonical_dual": 1e-5,
    "canonical_fd": 1e-3,
    "rank_floor": 1e-8,
}

CONFIG_KEYS = {"mass", "spin", "lambda", "alpha", "seed", "grid", "output", "format"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: BlackHoleParams
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCES))
    seed: int = 0
    output: Path | None = None
    fmt: str = "json"
    alpha: float = 0.5
    grid: tuple = (64, 32, 2)

    def tol(self, name: str) -> float:
        return self.tolerances[name]


def check_tolerances(tols: dict) -> dict:
    unknown = sorted(set(tols) - set(TOLERANCES))
    if unknown:
        raise ConfigError(f"unknown tolerance name(s): {', '.join(unknown)}")
    for k, v in tols.items():
        if not v > 0:
            raise ConfigError(f"tolerance {k} must be positive")
    return dict(TOLERANCES) | tols


def parse_grid(text: str) -> tuple:
    parts = text.lower().replace(",", "x").split("x")
    try:
        vals = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}") from exc
    if any(v < 1 for v in vals):
        raise ConfigError("grid sizes must be positive")
    return vals


def read_config_file(path: str | Path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment. Tolerances as ``tol-<name>``."""
    out: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-") if key.startswith("tol") else key
        if key.startswith("tol-"):
            out.setdefault("tolerances", {})[key[4:].replace("-", "_")] = float(value)
        elif key in CONFIG_KEYS:
            out[key] = value
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    if "tolerances" in out:
        check_tolerances(out["tolerances"])
    return out
