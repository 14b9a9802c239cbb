"""YAML/JSON model configuration.

Three model kinds are recognised by the ``model`` key::

    model: hawkes
    mu: [1.0, 1.0]
    kernels:
      - [{type: zero}, {type: exp, alpha: 0.5, beta: 1.0}]
      - [{type: exp, alpha: 0.5, beta: 1.0}, {type: zero}]

    model: microstructure
    nu: 1.0
    phi: {type: exp, alpha: 0.5, beta: 1.0}

    model: leadlag
    mu1: 1.0
    mu3: 1.0
    h: {type: exp, alpha: 0.5, beta: 1.0}
    g: {type: shifted, base: {type: exp, alpha: 0.5, beta: 1.0}, shift: 0.5, h: 0.001, horizon: 40.5}

Kernel entries are ``{type: zero}``, ``{type: exp, alpha, beta}`` or
``{type: tab, h, values: [...]}``; ``{type: shifted, ...}`` is expanded to a
tabulated kernel.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .errors import ConfigError
from .kernels import KernelMatrix, kernel_from_dict, shifted_kernel
from .model import HawkesModel
from .price_models import LeadLagModel, MicrostructureModel


def parse_kernel(cfg):
    if isinstance(cfg, dict) and cfg.get("type") == "shifted":
        base = parse_kernel(cfg["base"])
        return shifted_kernel(base, float(cfg["shift"]), float(cfg["h"]), float(cfg["horizon"]))
    return kernel_from_dict(cfg)


def model_from_config(cfg: dict):
    """Return a HawkesModel, MicrostructureModel or LeadLagModel."""
    if not isinstance(cfg, dict):
        raise ConfigError("model config must be a mapping")
    kind = cfg.get("model", "hawkes")
    try:
        if kind == "hawkes":
            rows = [[parse_kernel(c) for c in r] for r in cfg["kernels"]]
            return HawkesModel(cfg["mu"], KernelMatrix(rows), bool(cfg.get("asymptotic", False)))
        if kind == "microstructure":
            return MicrostructureModel(float(cfg["nu"]), parse_kernel(cfg["phi"]))
        if kind == "leadlag":
            return LeadLagModel(float(cfg["mu1"]), float(cfg["mu3"]),
                                parse_kernel(cfg["h"]), parse_kernel(cfg["g"]))
    except KeyError as exc:
        raise ConfigError(f"missing key {exc} in {kind} model config") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind} model config: {exc}") from exc
    raise ConfigError(f"unknown model kind {kind!r}")


def load_model(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"model file not found: {path}")
    try:
        cfg = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return model_from_config(cfg)


def as_hawkes(model) -> HawkesModel:
    return model if isinstance(model, HawkesModel) else model.hawkes


def dump_model(model, path) -> None:
    Path(path).write_text(yaml.safe_dump(model.to_config(), sort_keys=False))
