"""JSON scenario files: schema, parsing with located diagnostics, round-trip.

A scenario file looks like::

    {
      "name": "paper-fig3",
      "geometry": {"l1": 0.1, "l2": 0.1},
      "gains": {"lambda1": 1, "lambda2": 1, "lambda3": 1, "lambda4": 0.01},
      "initial": [[5, -0.7853981633974483, -0.7853981633974483, 0]],
      "simulation": {"dt": 0.01, "t_max": 100},
      "feedback": {"mode": "GROUND_TRUTH"},
      "output": {"directory": "out", "formats": ["csv", "svg"]}
    }

Initial conditions are ``[e, theta1, theta2, phi]`` quadruples.  Only
``geometry``, ``gains`` and ``initial`` are required; everything else has
defaults.  An optional ``controller`` block tunes the deadlock escape and
saturation.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .controller import ControllerConfig, Gains
from .errors import InvalidInputError
from .model import PolarState, RobotGeometry
from .positioning import BeaconArray
from .sim import BeaconFeedback, GroundTruth, SimulationConfig

__all__ = [
    "BUNDLED_SCENARIOS",
    "OutputSpec",
    "ScenarioError",
    "ScenarioFile",
    "dump_scenario",
    "load_bundled",
    "parse_scenario",
    "parse_scenario_file",
    "scenario_to_dict",
]

BUNDLED_SCENARIOS = ("paper-fig3", "paper-fig4", "paper-fig5", "paper-fig6")

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_POINT = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["geometry", "gains", "initial"],
    "properties": {
        "name": {"type": "string"},
        "geometry": {
            "type": "object",
            "additionalProperties": False,
            "required": ["l1", "l2"],
            "properties": {"l1": _POS, "l2": _POS},
        },
        "gains": {
            "type": "object",
            "additionalProperties": False,
            "required": ["lambda1", "lambda2", "lambda3", "lambda4"],
            "properties": {
                "lambda1": _POS,
                "lambda2": _POS,
                "lambda3": _POS,
                "lambda4": {"type": "number", "minimum": 0},
            },
        },
        "controller": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "deadlock_eps": _POS,
                "kick_omega": _NUM,
                "kick_phi_target": _POS,
                "deadlock_handling": {"type": "boolean"},
                "v_max": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "omega_max": {"type": ["number", "null"], "exclusiveMinimum": 0},
            },
        },
        "initial": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "minItems": 4,
                "maxItems": 4,
                "prefixItems": [{"type": "number", "minimum": 0}, _NUM, _NUM, _NUM],
                "items": _NUM,
            },
        },
        "simulation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dt": _POS,
                "t_max": _POS,
                "e_tol": _POS,
                "angle_tol": _POS,
                "max_substep": _POS,
                "integrator": {"enum": ["RK4", "EULER"]},
                "frame": {"enum": ["CARTESIAN", "POLAR"]},
            },
        },
        "feedback": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mode"],
            "properties": {
                "mode": {"enum": ["GROUND_TRUTH", "BEACON"]},
                "beacons": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["A", "B", "C"],
                    "properties": {
                        "A": _POINT,
                        "B": _POINT,
                        "C": _POINT,
                        "approach_side": {"enum": [1, -1, None]},
                    },
                },
                "sigma": {"type": "number", "minimum": 0},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string"},
                "formats": {
                    "type": "array",
                    "items": {"enum": ["csv", "svg"]},
                    "uniqueItems": True,
                },
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


class ScenarioError(InvalidInputError):
    """A scenario file failed to parse or validate.

    ``source`` and ``line`` locate the problem when they are known.
    """

    def __init__(self, message: str, source: str | None = None, line: int | None = None):
        self.source = source
        self.line = line
        where = source or "<scenario>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    formats: tuple[str, ...] = ("csv", "svg")


@dataclass
class ScenarioFile:
    name: str
    geometry: RobotGeometry
    controller: ControllerConfig
    initial: list[PolarState]
    simulation: SimulationConfig
    output: OutputSpec = field(default_factory=OutputSpec)
    warnings: list[str] = field(default_factory=list)

    @property
    def gains(self) -> Gains:
        return self.controller.gains


def _line_of(text: str, path: list) -> int | None:
    """Best-effort line number of the JSON value at ``path``."""
    pos = 0
    found = None
    for key in path:
        if isinstance(key, int):
            continue
        idx = text.find(json.dumps(key), pos)
        if idx < 0:
            break
        pos = idx + 1
        found = idx
    if found is None:
        return None
    return text.count("\n", 0, found) + 1


def _schema_error(text: str, source: str | None) -> None:
    errors = sorted(_VALIDATOR.iter_errors(json.loads(text)), key=lambda e: list(e.absolute_path))
    if not errors:
        return
    err = errors[0]
    path = list(err.absolute_path)
    message = err.message
    if err.validator == "additionalProperties":
        allowed = set(err.schema.get("properties", {}))
        extra = sorted(set(err.instance) - allowed)
        if extra:
            path = path + [extra[0]]
            message = f"unknown key {extra[0]!r}"
    dotted = ".".join(str(p) for p in path) or "<root>"
    raise ScenarioError(f"{dotted}: {message}", source, _line_of(text, path))


def parse_scenario(text: str, source: str | None = None, default_name: str = "scenario") -> ScenarioFile:
    """Parse and validate scenario JSON text.

    Raises:
        ScenarioError: on a syntax error, schema violation or broken invariant.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg} (column {exc.colno})", source, exc.lineno) from None
    _schema_error(text, source)

    def build(path: list, factory, *args, **kwargs):
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                obj = factory(*args, **kwargs)
        except InvalidInputError as exc:
            dotted = ".".join(str(p) for p in path)
            raise ScenarioError(f"{dotted}: {exc}", source, _line_of(text, path)) from None
        notes.extend(str(w.message) for w in caught)
        return obj

    notes: list[str] = []
    geo = data["geometry"]
    geometry = build(["geometry"], RobotGeometry, geo["l1"], geo["l2"])
    if geometry.l2 < geometry.l1:
        notes.append(
            f"l2={geometry.l2} < l1={geometry.l1}: the folded-body singularity "
            "l2 + l1*cos(phi) = 0 lies inside the body-angle range"
        )
    gains = build(["gains"], Gains, **data["gains"])
    controller = build(["controller"], ControllerConfig, gains=gains, **data.get("controller", {}))
    initial = [
        build(["initial", i], PolarState, *map(float, quad)) for i, quad in enumerate(data["initial"])
    ]

    fb = data.get("feedback", {"mode": "GROUND_TRUTH"})
    if fb["mode"] == "BEACON":
        extra = {k: fb[k] for k in ("sigma", "seed") if k in fb}
        if "beacons" in fb:
            b = fb["beacons"]
            beacons = build(
                ["feedback", "beacons"], BeaconArray, b["A"], b["B"], b["C"], b.get("approach_side")
            )
            extra["beacons"] = beacons
        feedback = build(["feedback"], BeaconFeedback, **extra)
    else:
        for key in ("beacons", "sigma", "seed"):
            if key in fb:
                raise ScenarioError(
                    f"feedback.{key}: only valid with mode BEACON", source, _line_of(text, ["feedback", key])
                )
        feedback = GroundTruth()
    simulation = build(["simulation"], SimulationConfig, feedback=feedback, **data.get("simulation", {}))

    out = data.get("output", {})
    output = OutputSpec(
        directory=out.get("directory", OutputSpec.directory),
        formats=tuple(out.get("formats", OutputSpec.formats)),
    )
    return ScenarioFile(
        name=data.get("name", default_name),
        geometry=geometry,
        controller=controller,
        initial=initial,
        simulation=simulation,
        output=output,
        warnings=notes,
    )


def parse_scenario_file(path: str | Path) -> ScenarioFile:
    """Read and validate a scenario file.

    Warnings (for instance a reachable folding singularity) are collected in
    ``ScenarioFile.warnings`` rather than raised.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read file: {exc.strerror or exc}", str(path)) from None
    return parse_scenario(text, str(path), default_name=path.stem)


def load_bundled(name: str) -> ScenarioFile:
    """One of the bundled scenarios, e.g. ``"paper-fig3"``."""
    stem = name[:-5] if name.endswith(".json") else name
    if stem not in BUNDLED_SCENARIOS:
        raise ScenarioError(f"no bundled scenario named {name!r}")
    text = resources.files(__package__).joinpath("scenarios", f"{stem}.json").read_text("utf-8")
    return parse_scenario(text, f"<bundled>/{stem}.json", default_name=stem)


def scenario_to_dict(sf: ScenarioFile) -> dict[str, Any]:
    """Inverse of :func:`parse_scenario`; every default is written out."""
    ctrl = sf.controller
    sim = sf.simulation
    g = ctrl.gains
    if isinstance(sim.feedback, BeaconFeedback):
        feedback = {
            "mode": "BEACON",
            "beacons": sim.feedback.beacons.to_dict(),
            "sigma": sim.feedback.sigma,
            "seed": sim.feedback.seed,
        }
    else:
        feedback = {"mode": "GROUND_TRUTH"}
    return {
        "name": sf.name,
        "geometry": {"l1": sf.geometry.l1, "l2": sf.geometry.l2},
        "gains": {"lambda1": g.lambda1, "lambda2": g.lambda2, "lambda3": g.lambda3, "lambda4": g.lambda4},
        "controller": {
            "deadlock_eps": ctrl.deadlock_eps,
            "kick_omega": ctrl.kick_omega,
            "kick_phi_target": ctrl.kick_phi_target,
            "deadlock_handling": ctrl.deadlock_handling,
            "v_max": ctrl.v_max,
            "omega_max": ctrl.omega_max,
        },
        "initial": [list(p.as_tuple()) for p in sf.initial],
        "simulation": {
            "dt": sim.dt,
            "t_max": sim.t_max,
            "e_tol": sim.e_tol,
            "angle_tol": sim.angle_tol,
            "max_substep": sim.max_substep,
            "integrator": sim.integrator.value,
            "frame": sim.frame.value,
        },
        "feedback": feedback,
        "output": {"directory": sf.output.directory, "formats": list(sf.output.formats)},
    }


def dump_scenario(sf: ScenarioFile) -> str:
    return json.dumps(scenario_to_dict(sf), indent=2) + "\n"
