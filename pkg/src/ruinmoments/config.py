"""JSON model files.

Schema::

    {"p": 1.0, "sigma2": 0.0, "lambda": 1.0,
     "claims": {"kind": "exponential", "gamma": 0.667}}

or with ``"claims": {"kind": "phase-type", "alpha": [...], "T": [[...], ...]}``.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import DomainError
from .model import RiskModel
from .phasetype import PhaseTypeDistribution


class ConfigError(Exception):
    """Unreadable, malformed or schema-violating model file."""


def _number(obj: dict, key: str, where: str) -> float:
    if key not in obj:
        raise ConfigError(f"{where}: missing field '{key}'")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: field '{key}' must be a number, got {type(v).__name__}")
    return float(v)


def _vector(v, where: str) -> list[float]:
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{where} must be a nonempty array of numbers")
    for e in v:
        if isinstance(e, bool) or not isinstance(e, (int, float)):
            raise ConfigError(f"{where} must contain only numbers")
    return [float(e) for e in v]


def _claims(obj, where: str = "claims") -> PhaseTypeDistribution:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    kind = obj.get("kind")
    if kind == "exponential":
        return PhaseTypeDistribution.exponential(_number(obj, "gamma", where))
    if kind == "phase-type":
        if "alpha" not in obj or "T" not in obj:
            raise ConfigError(f"{where}: phase-type claims need 'alpha' and 'T'")
        alpha = _vector(obj["alpha"], f"{where}.alpha")
        T = obj["T"]
        if not isinstance(T, list) or len(T) != len(alpha):
            raise ConfigError(f"{where}.T must have {len(alpha)} rows to match alpha")
        rows = [_vector(r, f"{where}.T[{i}]") for i, r in enumerate(T)]
        for i, r in enumerate(rows):
            if len(r) != len(alpha):
                raise ConfigError(f"{where}.T[{i}] has {len(r)} entries, expected {len(alpha)}")
        return PhaseTypeDistribution(tuple(alpha), tuple(map(tuple, rows)))
    raise ConfigError(f"{where}.kind must be 'exponential' or 'phase-type', got {kind!r}")


def model_from_dict(obj) -> RiskModel:
    if not isinstance(obj, dict):
        raise ConfigError("top level must be an object")
    unknown = set(obj) - {"p", "sigma2", "lambda", "claims", "name"}
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(sorted(unknown))}")
    if "claims" not in obj:
        raise ConfigError("missing field 'claims'")
    try:
        return RiskModel(
            _number(obj, "p", "model"),
            _number(obj, "sigma2", "model"),
            _number(obj, "lambda", "model"),
            _claims(obj["claims"]),
        )
    except DomainError as e:
        raise ConfigError(str(e)) from e


def parse_config(text: str, source: str = "<string>") -> RiskModel:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from e
    try:
        return model_from_dict(obj)
    except ConfigError as e:
        raise ConfigError(f"{source}: {e}") from e


def load_config(path) -> RiskModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror or e}") from e
    return parse_config(text, str(path))


def model_to_dict(model: RiskModel) -> dict:
    c = model.claims
    if c.is_exponential:
        claims = {"kind": "exponential", "gamma": c.rate}
    else:
        claims = {"kind": "phase-type", "alpha": list(c.alpha), "T": [list(r) for r in c.T]}
    return {"p": model.p, "sigma2": model.sigma2, "lambda": model.lam, "claims": claims}
