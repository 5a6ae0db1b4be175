"""Experiment configuration: a single JSON document, validated before any simulation."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..strip import StripKernel
from ..tails import DomainError
from ..walk import IncrementLaw

MODEL_TYPES = ("walk", "strip", "none")

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "heavywalk experiment",
    "type": "object",
    "required": ["model", "horizon", "replicas", "master_seed"],
    "description": "either the required keys or a 'preset' name",
    "properties": {
        "name": {"type": "string"},
        "model": {
            "type": "object",
            "required": ["type"],
            "properties": {
                "type": {"enum": list(MODEL_TYPES)},
                "law": {"type": "object", "description": "IncrementLaw, for type=walk"},
                "kernel": {"type": "object", "description": "StripKernel, for type=strip"},
            },
        },
        "horizon": {"type": "integer", "minimum": 2},
        "replicas": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer", "minimum": 0},
        "levels": {"type": "array", "items": {"type": "number"}},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["check"],
                "properties": {
                    "check": {"type": "string"},
                    "label": {"type": "string"},
                    "gating": {"type": "boolean"},
                    "params": {"type": "object"},
                },
            },
        },
        "output_dir": {"type": ["string", "null"]},
        "preset": {"type": "string", "description": "start from a named preset; other keys override"},
    },
}


class ConfigError(DomainError):
    """Invalid configuration; ``fields`` lists every offending entry."""

    def __init__(self, problems):
        self.fields = [p[0] for p in problems]
        self.problems = problems
        super().__init__("; ".join(f"{k}: {msg}" for k, msg in problems))


@dataclass
class CheckSpec:
    check: str
    params: dict = field(default_factory=dict)
    label: str = ""
    gating: bool = True

    def to_dict(self):
        return {"check": self.check, "params": self.params, "label": self.label or self.check,
                "gating": self.gating}


@dataclass
class ExperimentConfig:
    model_type: str
    horizon: int
    replicas: int
    master_seed: int
    model: object = None
    levels: tuple = ()
    checks: list = field(default_factory=list)
    output_dir: str | None = None
    name: str = ""

    def to_dict(self):
        model = {"type": self.model_type}
        if self.model_type == "walk":
            model["law"] = self.model.to_dict()
        elif self.model_type == "strip":
            model["kernel"] = self.model.to_dict()
        return {"name": self.name, "model": model, "horizon": self.horizon,
                "replicas": self.replicas, "master_seed": self.master_seed,
                "levels": list(self.levels), "checks": [c.to_dict() for c in self.checks],
                "output_dir": self.output_dir}

    def config_hash(self):
        """SHA-256 of the canonical JSON, output location excluded."""
        d = self.to_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    @classmethod
    def from_dict(cls, d):
        from .checks import CHECKS

        problems = []
        if not isinstance(d, dict):
            raise ConfigError([("<root>", "config must be a JSON object")])
        if "preset" in d:
            from .presets import preset_config

            d = {**preset_config(d["preset"]), **{k: v for k, v in d.items() if k != "preset"}}
        for key in ("model", "horizon", "replicas", "master_seed"):
            if key not in d:
                problems.append((key, "missing"))
        known = set(SCHEMA["properties"])
        for key in d:
            if key not in known:
                problems.append((key, "unknown field"))

        horizon = d.get("horizon")
        if "horizon" in d and not (isinstance(horizon, int) and horizon >= 2):
            problems.append(("horizon", "must be an integer >= 2"))
        replicas = d.get("replicas")
        if "replicas" in d and not (isinstance(replicas, int) and replicas >= 1):
            problems.append(("replicas", "must be an integer >= 1"))
        seed = d.get("master_seed")
        if "master_seed" in d and not (isinstance(seed, int) and seed >= 0):
            problems.append(("master_seed", "must be a nonnegative integer"))

        model_d = d.get("model", {})
        mtype, model = None, None
        if "model" in d:
            mtype = model_d.get("type") if isinstance(model_d, dict) else None
            if mtype not in MODEL_TYPES:
                problems.append(("model.type", f"must be one of {MODEL_TYPES}"))
            elif mtype == "walk":
                try:
                    model = IncrementLaw.from_dict(model_d["law"])
                except (KeyError, TypeError, ValueError) as exc:
                    problems.append(("model.law", str(exc) or "invalid"))
            elif mtype == "strip":
                try:
                    model = StripKernel.from_dict(model_d["kernel"])
                except (KeyError, TypeError, ValueError) as exc:
                    problems.append(("model.kernel", str(exc) or "invalid"))

        levels = d.get("levels", [])
        if not isinstance(levels, list) or not all(isinstance(x, (int, float)) for x in levels):
            problems.append(("levels", "must be a list of numbers"))
            levels = []

        checks = []
        for i, c in enumerate(d.get("checks", [])):
            where = f"checks[{i}]"
            if not isinstance(c, dict) or "check" not in c:
                problems.append((where, "needs a 'check' name"))
                continue
            name = c["check"]
            if name not in CHECKS:
                problems.append((f"{where}.check", f"unknown check {name!r}"))
                continue
            spec = CheckSpec(name, dict(c.get("params", {})), c.get("label", ""), bool(c.get("gating", True)))
            for field_name, msg in CHECKS[name].validate(spec.params, mtype, model, levels):
                problems.append((f"{where}.params.{field_name}", msg))
            checks.append(spec)

        out = d.get("output_dir")
        if out is not None and not isinstance(out, str):
            problems.append(("output_dir", "must be a string or null"))
        if problems:
            raise ConfigError(problems)
        return cls(mtype, horizon, replicas, seed, model, tuple(float(x) for x in levels),
                   checks, out, d.get("name", ""))

    @classmethod
    def load(cls, path):
        try:
            d = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError([("<file>", f"not valid JSON: {exc}")]) from exc
        return cls.from_dict(d)
