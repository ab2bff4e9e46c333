"""JSON scenario files: named collections of domain objects.

File format: one top-level JSON object with optional ``tolerance`` and
``seed`` metadata and an ``objects`` map keyed by name. Every object carries
a ``type`` discriminator. Complex numbers are two-element arrays
``[re, im]`` and matrices are row-major nested arrays, so files are portable
across languages.

Supported types: ``state``, ``effect``, ``observable``, ``operation``,
``channel``, ``instrument``, ``measurement_model``. Measurement models
reference their interaction instrument and probe observable by name; every
reference must resolve inside the same file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .channels import Channel, Operation
from .effects import Effect, Observable, State
from .errors import InvariantViolation, ScenarioError
from .instruments import Instrument
from .linalg import DEFAULT_ATOL
from .measurement import MeasurementModel

__all__ = [
    "Scenario",
    "load_scenario",
    "save_scenario",
    "matrix_to_json",
    "matrix_from_json",
]


def matrix_to_json(m: np.ndarray) -> list:
    """Row-major nested lists with ``[re, im]`` entries."""
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data: Any) -> np.ndarray:
    try:
        rows = [[complex(entry[0], entry[1]) for entry in row] for row in data]
    except (TypeError, IndexError) as exc:
        raise ScenarioError(f"malformed matrix payload: {exc}") from None
    arr = np.array(rows, dtype=complex)
    if arr.ndim != 2:
        raise ScenarioError("matrix payload must be two-dimensional")
    return arr


@dataclass
class Scenario:
    """Validated named collection of domain objects plus metadata."""

    states: dict[str, State] = field(default_factory=dict)
    effects: dict[str, Effect] = field(default_factory=dict)
    observables: dict[str, Observable] = field(default_factory=dict)
    operations: dict[str, Operation] = field(default_factory=dict)
    instruments: dict[str, Instrument] = field(default_factory=dict)
    models: dict[str, MeasurementModel] = field(default_factory=dict)
    atol: float = DEFAULT_ATOL
    seed: int | None = None

    def object_names(self) -> list[str]:
        names: list[str] = []
        for group in (self.states, self.effects, self.observables, self.operations,
                      self.instruments, self.models):
            names.extend(group)
        return names

    def summary(self) -> dict[str, int]:
        return {
            "states": len(self.states),
            "effects": len(self.effects),
            "observables": len(self.observables),
            "operations": len(self.operations),
            "instruments": len(self.instruments),
            "measurement_models": len(self.models),
        }


def _load_observable(payload: dict, atol: float) -> Observable:
    outcomes = payload.get("outcomes")
    effects = payload.get("effects")
    if not isinstance(outcomes, list) or not isinstance(effects, list):
        raise ScenarioError("observable needs 'outcomes' and 'effects' lists")
    return Observable(tuple(outcomes), tuple(matrix_from_json(e) for e in effects), atol)


def _load_kraus(payload: dict) -> tuple[np.ndarray, ...]:
    kraus = payload.get("kraus")
    if not isinstance(kraus, list) or not kraus:
        raise ScenarioError("expected a nonempty 'kraus' list")
    return tuple(matrix_from_json(k) for k in kraus)


def _load_instrument(payload: dict, atol: float) -> Instrument:
    outcomes = payload.get("outcomes")
    operations = payload.get("operations")
    if not isinstance(outcomes, list) or not isinstance(operations, list):
        raise ScenarioError("instrument needs 'outcomes' and 'operations' lists")
    ops = tuple(
        Operation(tuple(matrix_from_json(k) for k in op_kraus), atol) for op_kraus in operations
    )
    return Instrument(tuple(outcomes), ops, atol)


def load_scenario(path: str | Path, atol: float | None = None) -> Scenario:
    """Load and fully validate a scenario file.

    ``atol`` overrides the file's recorded tolerance; failures carry the
    offending object's name and the violated invariant.
    """
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"could not read scenario file {path}: {exc}") from None
    if not isinstance(payload, dict):
        raise ScenarioError("scenario file must hold a JSON object")

    tol = atol if atol is not None else payload.get("tolerance", DEFAULT_ATOL)
    tol = float(tol)
    if tol <= 0:
        raise ScenarioError(f"tolerance must be positive, got {tol}")
    seed = payload.get("seed")
    if seed is not None:
        seed = int(seed)

    objects = payload.get("objects", {})
    if not isinstance(objects, dict):
        raise ScenarioError("'objects' must be a name-keyed map")

    scn = Scenario(atol=tol, seed=seed)
    deferred: list[tuple[str, dict]] = []
    for name, obj in objects.items():
        if not isinstance(obj, dict) or "type" not in obj:
            raise ScenarioError("object payload needs a 'type' discriminator", obj=name)
        kind = obj["type"]
        try:
            if kind == "state":
                scn.states[name] = State(matrix_from_json(obj.get("matrix")), tol)
            elif kind == "effect":
                scn.effects[name] = Effect(matrix_from_json(obj.get("matrix")), tol)
            elif kind == "observable":
                scn.observables[name] = _load_observable(obj, tol)
            elif kind == "operation":
                scn.operations[name] = Operation(_load_kraus(obj), tol)
            elif kind == "channel":
                scn.operations[name] = Channel(_load_kraus(obj), tol)
            elif kind == "instrument":
                scn.instruments[name] = _load_instrument(obj, tol)
            elif kind == "measurement_model":
                deferred.append((name, obj))
            else:
                raise ScenarioError(f"unknown object type {kind!r}", obj=name)
        except (InvariantViolation, ScenarioError, ValueError) as exc:
            if isinstance(exc, ScenarioError) and exc.obj is not None:
                raise
            raise ScenarioError(str(exc), obj=name) from None

    for name, obj in deferred:
        ins_name = obj.get("interaction")
        probe_name = obj.get("probe")
        if ins_name not in scn.instruments:
            raise ScenarioError(f"references unknown instrument {ins_name!r}", obj=name)
        if probe_name not in scn.observables:
            raise ScenarioError(f"references unknown observable {probe_name!r}", obj=name)
        try:
            scn.models[name] = MeasurementModel(
                int(obj.get("dim_base")),
                int(obj.get("dim_probe")),
                scn.instruments[ins_name],
                scn.observables[probe_name],
            )
        except (InvariantViolation, ValueError, TypeError) as exc:
            raise ScenarioError(str(exc), obj=name) from None
    return scn


def save_scenario(scn: Scenario, path: str | Path) -> None:
    """Write a scenario back to JSON; inverse of :func:`load_scenario`.

    Only Kraus-form instruments serialize (tabulated linear maps have no
    file representation).
    """
    objects: dict[str, Any] = {}
    for name, state in scn.states.items():
        objects[name] = {"type": "state", "matrix": matrix_to_json(state.matrix)}
    for name, effect in scn.effects.items():
        objects[name] = {"type": "effect", "matrix": matrix_to_json(effect.matrix)}
    for name, obs in scn.observables.items():
        objects[name] = {
            "type": "observable",
            "outcomes": list(obs.outcomes),
            "effects": [matrix_to_json(e.matrix) for e in obs.effects],
        }
    for name, op in scn.operations.items():
        objects[name] = {
            "type": "channel" if isinstance(op, Channel) else "operation",
            "kraus": [matrix_to_json(k) for k in op.kraus],
        }
    for name, ins in scn.instruments.items():
        if not all(isinstance(op, Operation) for op in ins.ops):
            raise ScenarioError("only Kraus-form instruments can be serialized", obj=name)
        objects[name] = {
            "type": "instrument",
            "outcomes": list(ins.outcomes),
            "operations": [[matrix_to_json(k) for k in op.kraus] for op in ins.ops],  # type: ignore[attr-defined]
        }
    for name, model in scn.models.items():
        ins_name = _name_of(scn.instruments, model.interaction, name, "interaction instrument")
        probe_name = _name_of(scn.observables, model.probe, name, "probe observable")
        objects[name] = {
            "type": "measurement_model",
            "dim_base": model.dim_base,
            "dim_probe": model.dim_probe,
            "interaction": ins_name,
            "probe": probe_name,
        }
    payload: dict[str, Any] = {"tolerance": scn.atol}
    if scn.seed is not None:
        payload["seed"] = scn.seed
    payload["objects"] = objects
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _name_of(group: dict, value: Any, owner: str, role: str) -> str:
    for name, candidate in group.items():
        if candidate is value:
            return name
    raise ScenarioError(f"{role} is not a named object of this scenario", obj=owner)
