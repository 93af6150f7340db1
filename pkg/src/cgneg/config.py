"""Run configuration: built-in defaults, then a config file, then flags.

The file format is ``key = value`` per line with ``#`` comments. The file
is taken from ``--config`` or, failing that, the ``CGNEG_CONFIG``
environment variable.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from typing import Optional

CONFIG_ENV = "CGNEG_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    # negativity quadrature; None picks the route default (1e-6 oscillator, 1e-4 grid/well)
    tol: Optional[float] = None
    # radial cutoff (oscillator) or first tail panel edge (square well); None = automatic
    cutoff: Optional[float] = None
    max_refinement_levels: int = 6
    max_tail_panels: int = 16
    # coarse-graining; None means unsmoothed
    delta: Optional[float] = None
    kernel: str = "paper"
    # grid commands: refinement factor over the resolution rule, momentum extent
    refine: float = 1.0
    pmax: Optional[float] = None
    workers: int = 1
    output_dir: str = "."

    def merged(self, **overrides) -> "RunConfig":
        """Copy with every non-None override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _convert(name: str, raw: str):
    kind = _FIELDS[name].type
    if raw.lower() in ("none", ""):
        if "Optional" not in str(kind):
            raise ConfigError(f"{name} may not be empty")
        return None
    try:
        if "int" in str(kind):
            return int(raw)
        if "float" in str(kind):
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for {name}") from None
    return raw


def parse_config(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (t.strip() for t in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _convert(key, value)
    if "kernel" in out and out["kernel"] not in ("paper", "unit"):
        raise ConfigError(f"kernel must be 'paper' or 'unit', got {out['kernel']!r}")
    return out


def load_config(path: Optional[str] = None) -> RunConfig:
    """Defaults overlaid with the config file at ``path`` or $CGNEG_CONFIG, if any."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return RunConfig()
    with open(path, encoding="utf-8") as fh:
        return replace(RunConfig(), **parse_config(fh.read()))
