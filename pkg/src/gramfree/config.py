"""Experiment config files (TOML).

Top-level keys mirror :class:`~gramfree.experiments.ExperimentConfig`; the
sampler lives in a ``[sampler]`` table and may nest (``[sampler.inner]``,
``[[sampler.parts]]``, ``[[sampler.per_index]]``). Two optional tables,
``[negligibility]`` and ``[selftest]``, hold parameters of those commands.

Example::

    d = 50
    k_max = 10
    trials = 10000
    master_seed = 7

    [sampler]
    kind = "gaussian"
    decay = 0.5
"""
from __future__ import annotations

import sys

from .errors import ConfigError
from .experiments import ExperimentConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXTRA_SECTIONS = ("negligibility", "selftest")


def load_mapping(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None


def build_config(mapping: dict | None = None, **overrides) -> tuple[ExperimentConfig, dict]:
    """Resolve a config mapping plus overrides (``None`` values are ignored).

    Returns the experiment config and the extra command sections.
    """
    data = dict(mapping or {})
    extras = {name: dict(data.pop(name, {}) or {}) for name in EXTRA_SECTIONS}
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    try:
        return ExperimentConfig.from_dict(data), extras
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path=None, **overrides) -> tuple[ExperimentConfig, dict]:
    return build_config(load_mapping(path) if path else {}, **overrides)
