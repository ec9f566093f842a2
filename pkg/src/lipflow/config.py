"""Run manifests parsed from a minimal sectioned key-value text format.

Grammar: `[section]` headers, `key = value` lines, `#` comments, blank lines.
Sections: [scenario], [objective], [penalty], [training], [output], and an
optional [surface] grid. Unknown sections or keys are errors; all parse and
validation errors carry the offending key path or line number.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

from .dynamics import TrainConfig
from .lipschitz import PenaltyConfig
from .objectives import ObjectiveSpec, builtin_objective
from .scenarios import Scenario, build_preset


class ConfigError(ValueError):
    pass


_SCENARIO_KEYS = {"preset", "count", "c", "sigma", "distance", "dim", "n",
                  "seed", "separation", "spread", "real_csv", "fake_csv"}
_OBJECTIVE_KEYS = {"name", "eps"}
_PENALTY_KEYS = {"kind", "lambda", "k0", "smax_capacity", "blend_batch"}
_TRAINING_KEYS = {"d_steps", "eta", "outer_iters", "lr", "beta1", "beta2",
                  "k_probes", "widths", "activation", "seed",
                  "stop_w1_fraction"}
_OUTPUT_KEYS = {"dir", "snapshot_every"}
_SURFACE_KEYS = {"x_min", "x_max", "y_min", "y_max", "nx", "ny",
                 "activations", "lrs", "depths"}
_SECTIONS = {
    "scenario": _SCENARIO_KEYS, "objective": _OBJECTIVE_KEYS,
    "penalty": _PENALTY_KEYS, "training": _TRAINING_KEYS,
    "output": _OUTPUT_KEYS, "surface": _SURFACE_KEYS,
}

_INT_KEYS = {"count", "dim", "n", "seed", "smax_capacity", "blend_batch",
             "d_steps", "outer_iters", "k_probes", "snapshot_every",
             "nx", "ny"}
_FLOAT_KEYS = {"c", "sigma", "distance", "separation", "spread", "eps",
               "lambda", "k0", "eta", "lr", "beta1", "beta2",
               "stop_w1_fraction", "x_min", "x_max", "y_min", "y_max"}


@dataclass
class RunManifest:
    scenario: Scenario
    objective: ObjectiveSpec
    objective_name: str
    train: TrainConfig
    seed: int
    out_dir: str
    widths: list
    activation: str
    snapshot_every: int
    surface: Optional[dict] = None
    manifest_hash: str = ""
    stop_w1_fraction: float = 0.0
    raw_sections: dict = field(default_factory=dict)


def _parse_sections(text: str) -> dict:
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SECTIONS:
                raise ConfigError(
                    f"line {lineno}: unknown section [{current}]; expected one "
                    f"of {sorted(_SECTIONS)}")
            sections.setdefault(current, {})
            continue
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _SECTIONS[current]:
            raise ConfigError(
                f"line {lineno}: unknown key {current}.{key}; valid keys: "
                f"{sorted(_SECTIONS[current])}")
        if key in sections[current]:
            raise ConfigError(f"line {lineno}: duplicate key {current}.{key}")
        sections[current][key] = value
    return sections


def _convert(section: str, key: str, value: str):
    path = f"{section}.{key}"
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if key == "widths":
        try:
            return [int(v) for v in value.split(",")]
        except ValueError:
            raise ConfigError(f"{path}: expected comma-separated integers")
    if key in ("activations", "lrs", "depths"):
        items = [v.strip() for v in value.split(",")]
        if key == "lrs":
            try:
                return [float(v) for v in items]
            except ValueError:
                raise ConfigError(f"{path}: expected comma-separated numbers")
        if key == "depths":
            try:
                return [int(v) for v in items]
            except ValueError:
                raise ConfigError(f"{path}: expected comma-separated integers")
        return items
    return value


def _require(sections: dict, section: str, key: str):
    if section not in sections or key not in sections[section]:
        raise ConfigError(f"missing required key {section}.{key}")
    return sections[section][key]


def parse_config(text: str) -> RunManifest:
    raw = _parse_sections(text)
    sections = {
        sec: {k: _convert(sec, k, v) for k, v in kv.items()}
        for sec, kv in raw.items()
    }

    preset = _require(sections, "scenario", "preset")
    scen_params = {k: v for k, v in sections["scenario"].items() if k != "preset"}
    try:
        scenario = build_preset(preset, scen_params)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"scenario: {e}")

    obj_name = _require(sections, "objective", "name")
    obj_kwargs = {}
    if "eps" in sections["objective"]:
        obj_kwargs["eps"] = sections["objective"]["eps"]
    try:
        objective = builtin_objective(obj_name, **obj_kwargs)
    except ValueError as e:
        raise ConfigError(f"objective.name: {e}")

    pen_sec = sections.get("penalty", {})
    try:
        penalty = PenaltyConfig(
            kind=_require(sections, "penalty", "kind"),
            lam=float(_require(sections, "penalty", "lambda")),
            k0=pen_sec.get("k0", 0.0),
            smax_capacity=pen_sec.get("smax_capacity", 0),
            blend_batch=pen_sec.get("blend_batch", 64))
    except ValueError as e:
        raise ConfigError(f"penalty.{e}" if "penalty." not in str(e) else str(e))

    tr = sections.get("training", {})
    try:
        train = TrainConfig(
            objective=objective, penalty=penalty,
            d_steps=tr.get("d_steps", 50), eta=tr.get("eta", 0.05),
            outer_iters=tr.get("outer_iters", 100), lr=tr.get("lr", 1e-3),
            beta1=tr.get("beta1", 0.0), beta2=tr.get("beta2", 0.9),
            k_probes=tr.get("k_probes", 512))
    except ValueError as e:
        raise ConfigError(f"training: {e}")

    out = sections.get("output", {})
    digest = hashlib.sha256(text.encode()).hexdigest()[:16]
    return RunManifest(
        scenario=scenario, objective=objective, objective_name=obj_name,
        train=train, seed=tr.get("seed", 0), out_dir=out.get("dir", "."),
        widths=tr.get("widths", [scenario.dim, 64, 64, 1]),
        activation=tr.get("activation", "relu"),
        snapshot_every=out.get("snapshot_every", 0),
        surface=sections.get("surface"),
        manifest_hash=digest,
        stop_w1_fraction=tr.get("stop_w1_fraction", 0.0),
        raw_sections=sections)


def parse_config_file(path: str) -> RunManifest:
    with open(path) as fh:
        return parse_config(fh.read())
