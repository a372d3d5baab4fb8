"""Experiment configuration files.

A config is a YAML mapping with exactly one model section (``ring``,
``effective``, ``wkb`` or ``beam``) plus optional ``sweep``, ``solver`` and
``output`` sections. Unknown keys are rejected with their line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .eigensolver import DEFAULT_SEED, DEFAULT_TOL
from .fock import DEFAULT_MAX_DIMENSION


class ConfigError(ValueError):
    pass


def _number(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise TypeError("expected a number")
    if not math.isfinite(v):
        raise TypeError("expected a finite number")
    return float(v)


def _integer(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError("expected an integer")
    return int(v)


def _seed(v):
    if isinstance(v, str):
        return int(v, 0)
    return _integer(v)


def _boolean(v):
    if not isinstance(v, bool):
        raise TypeError("expected true or false")
    return v


def _choice(*options):
    def check(v):
        if v not in options:
            raise TypeError(f"expected one of {', '.join(options)}")
        return v
    return check


def _links(v):
    if not isinstance(v, list) or not all(isinstance(p, list) and len(p) == 2 for p in v):
        raise TypeError("expected a list of [link_index, strength] pairs")
    return [[_integer(i), _number(s)] for i, s in v]


def _numbers(v):
    if not isinstance(v, list):
        raise TypeError("expected a list of numbers")
    return [_number(x) for x in v]


def _optional(check):
    return lambda v: None if v is None else check(v)


# key -> (validator, default)
MODEL_SCHEMAS: dict[str, dict[str, tuple]] = {
    "ring": {
        "M": (_integer, 8),
        "N": (_integer, 10),
        "U": (_number, 1.0),
        "t": (_number, 1.0),
        "weak_links": (_links, [[2, 0.5], [5, 0.8], [8, 0.8]]),
        "Omega": (_number, math.pi),
        "flux_mode": (_choice("per-link", "single-link", "verbatim"), "per-link"),
        "flux_link": (_optional(_integer), None),
    },
    "effective": {
        "M": (_integer, 12),
        "J": (_number, 1.0),
        "Jp": (_number, 0.7),
        "Jpp": (_number, 0.8),
        "U": (_number, 0.5),
        "Omega": (_number, math.pi),
        "kinetic": (_choice("two-angle", "with-theta0"), "two-angle"),
        "levels": (_integer, 6),
        "basis_size": (_integer, 41),
        "include_quadratic": (_boolean, False),
    },
    "wkb": {
        "U": (_number, 1.0),
        "points": (_integer, 4001),
    },
    "beam": {
        "grid": (_integer, 512),
        "M": (_integer, 8),
        "radius_um": (_number, 7.5),
        "pixel_um": (_number, 0.1),
        "spot_sigma_um": (_number, 1.2),
        "depths": (_optional(_numbers), None),
        "mixing": (_number, 0.4),
        "mraf_iterations": (_integer, 20),
        "alpha": (_number, 0.3),
        "max_iter": (_integer, 30),
        "threshold": (_number, 2.0),
        "verbatim_discrepancy": (_boolean, False),
        "noise_sigma": (_number, 0.0),
        "propagation": (_choice("far-field", "angular-spectrum"), "far-field"),
        "distance_um": (_number, 0.0),
        "pitch_um": (_number, 8.0),
        "wavelength_um": (_number, 0.828),
        "aberration": ("mapping", None),
    },
}

ABERRATION_SCHEMA = {
    "tilt_x": (_number, 0.0),
    "tilt_y": (_number, 0.0),
    "defocus": (_number, 0.0),
    "astig_0": (_number, 0.0),
    "astig_45": (_number, 0.0),
    "reference_radius_px": (_number, 150.0),
    "nonuniformity": (_number, 0.0),
}

SOLVER_SCHEMA = {
    "k": (_integer, 4),
    "tol": (_number, DEFAULT_TOL),
    "seed": (_seed, DEFAULT_SEED),
    "max_dimension": (_integer, DEFAULT_MAX_DIMENSION),
    "current_step": (_number, 1e-3),
}

OUTPUT_SCHEMA = {
    "dir": (str, "out"),
    "figures": (_boolean, True),
}

# sweep axes each model accepts
SWEEP_AXES = {
    "ring": {"Omega", "U", "N", "t_second", "t_prime"},
    "effective": {"Omega", "M"},
    "wkb": {"delta", "EJ_over_U"},
    "beam": set(),
}
INTEGER_AXES = {"N", "M"}


@dataclass
class ExperimentConfig:
    model: str
    params: dict[str, Any]
    sweep: dict[str, np.ndarray] = field(default_factory=dict)
    solver: dict[str, Any] = field(default_factory=dict)
    output: dict[str, Any] = field(default_factory=dict)
    source: str = "<defaults>"

    def resolved(self) -> dict:
        """Plain-data view of the full configuration, for manifests."""
        return {
            "model": {self.model: self.params},
            "sweep": {k: [v.item() for v in arr] for k, arr in self.sweep.items()},
            "solver": self.solver,
            "output": self.output,
        }

    def axis(self, name: str) -> np.ndarray | None:
        return self.sweep.get(name)


# -- YAML with line numbers -------------------------------------------------

def _to_data(node, lines: dict, path: tuple):
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for key_node, value_node in node.value:
            key = key_node.value
            if key in out:
                raise ConfigError(f"line {key_node.start_mark.line + 1}: duplicate key {'.'.join(path + (key,))}")
            lines[path + (key,)] = key_node.start_mark.line + 1
            out[key] = _to_data(value_node, lines, path + (key,))
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_to_data(v, lines, path + (i,)) for i, v in enumerate(node.value)]
    return yaml.constructor.SafeConstructor().construct_object(node, deep=True)


def _where(lines, path, source):
    line = lines.get(path)
    name = ".".join(str(p) for p in path)
    return f"{source}:{line}: {name}" if line else f"{source}: {name}"


def _section(raw, schema, lines, path, source) -> dict:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{_where(lines, path, source)}: expected a mapping")
    out = {}
    for key in raw:
        if key not in schema:
            raise ConfigError(
                f"{_where(lines, path + (key,), source)}: unknown key "
                f"(allowed: {', '.join(sorted(schema))})"
            )
    for key, (check, default) in schema.items():
        if key not in raw:
            out[key] = default
            continue
        if check == "mapping":
            out[key] = _section(raw[key], ABERRATION_SCHEMA, lines, path + (key,), source)
            continue
        try:
            out[key] = check(raw[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{_where(lines, path + (key,), source)}: {exc}") from None
    if schema is MODEL_SCHEMAS["beam"] and out["aberration"] is None:
        out["aberration"] = {k: d for k, (_, d) in ABERRATION_SCHEMA.items()}
    return out


def _grid(raw, lines, path, source, integer: bool) -> np.ndarray:
    where = _where(lines, path, source)
    if isinstance(raw, list):
        try:
            vals = [_integer(v) if integer else _number(v) for v in raw]
        except TypeError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    elif isinstance(raw, dict):
        allowed = {"start", "stop", "num", "step"}
        extra = set(raw) - allowed
        if extra:
            raise ConfigError(f"{where}: unknown grid keys {sorted(extra)}")
        try:
            start, stop = _number(raw["start"]), _number(raw["stop"])
        except KeyError as exc:
            raise ConfigError(f"{where}: grid needs {exc.args[0]!r}") from None
        except TypeError as exc:
            raise ConfigError(f"{where}: {exc}") from None
        if "num" in raw:
            vals = list(np.linspace(start, stop, _integer(raw["num"])))
        elif "step" in raw:
            step = _number(raw["step"])
            if step <= 0:
                raise ConfigError(f"{where}: step must be positive")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            vals = [start + i * step for i in range(max(count, 0))]
        else:
            raise ConfigError(f"{where}: grid needs 'num' or 'step'")
        if integer:
            vals = [int(round(v)) for v in vals]
    else:
        raise ConfigError(f"{where}: expected a list or a start/stop grid")
    arr = np.array(vals, dtype=np.int64 if integer else float)
    if arr.size == 0:
        raise ConfigError(f"{where}: empty grid")
    if not integer and not np.all(np.isfinite(arr)):
        raise ConfigError(f"{where}: grid values must be finite")
    return arr


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    try:
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    lines: dict = {}
    raw = _to_data(node, lines, ()) if node is not None else {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    top = {"model", "sweep", "solver", "output"}
    for key in raw:
        if key not in top:
            raise ConfigError(f"{_where(lines, (key,), source)}: unknown section "
                              f"(allowed: {', '.join(sorted(top))})")
    models = raw.get("model")
    if not isinstance(models, dict) or len(models) != 1:
        raise ConfigError(f"{source}: 'model' must contain exactly one of "
                          f"{', '.join(MODEL_SCHEMAS)}")
    (model, params), = models.items()
    if model not in MODEL_SCHEMAS:
        raise ConfigError(f"{_where(lines, ('model', model), source)}: unknown model "
                          f"(allowed: {', '.join(MODEL_SCHEMAS)})")
    params = _section(params, MODEL_SCHEMAS[model], lines, ("model", model), source)

    sweep_raw = raw.get("sweep") or {}
    if not isinstance(sweep_raw, dict):
        raise ConfigError(f"{_where(lines, ('sweep',), source)}: expected a mapping")
    sweep = {}
    for axis, spec in sweep_raw.items():
        if axis not in SWEEP_AXES[model]:
            allowed = ", ".join(sorted(SWEEP_AXES[model])) or "none"
            raise ConfigError(f"{_where(lines, ('sweep', axis), source)}: not a sweep axis "
                              f"of the {model} model (allowed: {allowed})")
        sweep[axis] = _grid(spec, lines, ("sweep", axis), source, axis in INTEGER_AXES)

    solver = _section(raw.get("solver"), SOLVER_SCHEMA, lines, ("solver",), source)
    output = _section(raw.get("output"), OUTPUT_SCHEMA, lines, ("output",), source)
    return ExperimentConfig(model=model, params=params, sweep=sweep, solver=solver,
                            output=output, source=source)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), source=str(path))
