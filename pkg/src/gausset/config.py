"""Settings files: YAML or JSON with sections ``embeddings``, ``encoder``,
``loss``, ``weak``, ``train`` and ``corpus``.

Keys are addressed with dots, e.g. ``embeddings.max_terms``.
"""

from __future__ import annotations

import copy
from typing import Any, Optional

import yaml

DEFAULTS: dict[str, dict[str, Any]] = {
    # embeddings.dim is only asserted when set (300 for the GloVe release)
    "embeddings": {"path": None, "max_terms": 200_000, "dim": None},
    "encoder": {"hidden": 64, "dim": None},
    "loss": {"margin": 0.1},
    "weak": {"window": 5, "labeler": "max", "pairs": 100_000},
    "train": {"learning_rate": 1e-3, "batch_size": 512, "optimizer": "adam", "rng_seed": 0},
    "corpus": {"path": None},
}


class ConfigError(ValueError):
    pass


def load_config(path: Optional[str] = None) -> dict[str, dict[str, Any]]:
    """Defaults merged with the file at ``path`` (if any); unknown keys are errors."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is None:
        return cfg
    with open(path, encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    for section, values in data.items():
        if section not in cfg:
            raise ConfigError(f"{path}: unknown section {section!r}")
        if not isinstance(values, dict):
            raise ConfigError(f"{path}: section {section!r} must be a mapping")
        for key, value in values.items():
            if key not in cfg[section]:
                raise ConfigError(f"{path}: unknown key {section}.{key}")
            cfg[section][key] = value
    return cfg


def get(cfg: dict, dotted: str) -> Any:
    section, key = dotted.split(".", 1)
    return cfg[section][key]
