"""Scenario files: JSON loading, validation, serialisation and execution.

Files carry angles in degrees, the acceleration limit in multiples of g and
one-based pursuer indices; the in-memory :class:`Scenario` keeps those file
values verbatim (so a load/dump/load cycle is exact) and converts to SI
radians and zero-based indices only when building simulator inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .engagement import AgentState, derive_view
from .errors import ConfigError
from .graph import DirectedTopology, build_topology, mirror_spectrum, validate_gains
from .guidance import CRule, GuidanceAssignment, GuidanceLaw, Switch, evaluate_law, get_plugin, registered_plugins
from .sim import G0, Gains, RunRecord, SimConfig, run

SCHEMA_VERSION = 1


def load_schema() -> dict[str, Any]:
    text = resources.files("salvo_sim").joinpath("scenario.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


_VALIDATOR = jsonschema.Draft202012Validator(load_schema())


@dataclass(frozen=True)
class AgentSpec:
    x: float
    y: float
    speed: float
    gamma_deg: float

    @property
    def gamma(self) -> float:
        return math.radians(self.gamma_deg)

    def state(self) -> AgentState:
        return AgentState(self.x, self.y, self.speed, self.gamma)


@dataclass(frozen=True)
class PursuerSpec(AgentSpec):
    law: str = "DPG"
    lateral_only: bool = False


@dataclass(frozen=True)
class MorphSpec:
    t: float
    pursuer: int  # one-based, as in the file
    law: str


@dataclass(frozen=True)
class SimOverrides:
    dt: float | None = None
    a_max_g: float | None = None
    filter_tau: float | None = None
    intercept_radius: float | None = None
    t_max: float | None = None


@dataclass(frozen=True)
class Scenario:
    target: AgentSpec
    pursuers: tuple[PursuerSpec, ...]
    edges: tuple[tuple[int, int], ...]  # one-based
    gains: Gains
    c_factor: float = 3.0
    c_frozen: bool = False
    sim: SimOverrides = field(default_factory=SimOverrides)
    morphs: tuple[MorphSpec, ...] = ()
    decimate: int = 10
    plots: bool = True
    name: str = ""
    notes: str = ""
    requires_plugins: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.pursuers)

    def topology(self) -> DirectedTopology:
        return build_topology([(a - 1, b - 1) for a, b in self.edges], self.n)

    def assignment(self) -> GuidanceAssignment:
        initial = tuple(GuidanceLaw.parse(p.law) for p in self.pursuers)
        switches = tuple(
            sorted(Switch(m.t, m.pursuer - 1, GuidanceLaw.parse(m.law)) for m in self.morphs)
        )
        return GuidanceAssignment(initial, switches, tuple(p.lateral_only for p in self.pursuers))

    def c_rule(self) -> CRule:
        return CRule(self.c_factor, self.c_frozen)

    def sim_config(self, **overrides: Any) -> SimConfig:
        """SimConfig from the file's overrides, then keyword ``overrides`` (SI units)."""
        values: dict[str, Any] = {"decimate": self.decimate}
        s = self.sim
        if s.dt is not None:
            values["dt"] = s.dt
        if s.a_max_g is not None:
            values["a_max"] = s.a_max_g * G0
        if s.filter_tau is not None:
            values["filter_tau"] = s.filter_tau
        if s.intercept_radius is not None:
            values["intercept_radius"] = s.intercept_radius
        if s.t_max is not None:
            values["t_max"] = s.t_max
        values.update({k: v for k, v in overrides.items() if v is not None})
        return SimConfig(**values)

    def initial_states(self) -> tuple[AgentState, tuple[AgentState, ...]]:
        return self.target.state(), tuple(p.state() for p in self.pursuers)

    def with_morphs(self, morphs: tuple[MorphSpec, ...]) -> "Scenario":
        return replace(self, morphs=morphs)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
        if self.name:
            out["name"] = self.name
        if self.notes:
            out["notes"] = self.notes
        if self.requires_plugins:
            out["requires_plugins"] = list(self.requires_plugins)
        t = self.target
        out["target"] = {"position": [t.x, t.y], "speed": t.speed, "gamma_deg": t.gamma_deg}
        out["pursuers"] = [
            {
                "position": [p.x, p.y],
                "speed": p.speed,
                "gamma_deg": p.gamma_deg,
                "law": p.law,
                "lateral_only": p.lateral_only,
            }
            for p in self.pursuers
        ]
        out["topology"] = {"edges": [list(e) for e in self.edges]}
        out["gains"] = {"alpha": self.gains.alpha, "beta": self.gains.beta, "t_e": self.gains.t_e}
        out["c_rule"] = {"factor": self.c_factor, "frozen": self.c_frozen}
        sim = {k: v for k, v in vars(self.sim).items() if v is not None}
        if sim:
            out["sim"] = sim
        if self.morphs:
            out["morphs"] = [{"t": m.t, "pursuer": m.pursuer, "law": m.law} for m in self.morphs]
        out["output"] = {"decimate": self.decimate, "plots": self.plots}
        return out

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def _schema_message(err: jsonschema.ValidationError) -> str:
    where = "/".join(str(p) for p in err.absolute_path) or "<root>"
    return f"scenario field '{where}': {err.message} (constraint: {err.validator})"


def scenario_from_dict(data: Any) -> Scenario:
    """Validate ``data`` against the schema and the engagement rules, then build a Scenario."""
    errors = sorted(_VALIDATOR.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError(_schema_message(errors[0]))

    for plugin_id in data.get("requires_plugins", []):
        if plugin_id not in registered_plugins():
            raise ConfigError(
                f"scenario requires the guidance plugin {plugin_id!r}, which is not registered; "
                "register it with salvo_sim.register_plugin (CLI: --plugin MODULE)"
            )

    t = data["target"]
    target = AgentSpec(float(t["position"][0]), float(t["position"][1]), float(t["speed"]), float(t["gamma_deg"]))
    pursuers = tuple(
        PursuerSpec(
            float(p["position"][0]),
            float(p["position"][1]),
            float(p["speed"]),
            float(p["gamma_deg"]),
            p["law"],
            bool(p.get("lateral_only", False)),
        )
        for p in data["pursuers"]
    )
    n = len(pursuers)
    edges = tuple((int(a), int(b)) for a, b in data["topology"]["edges"])
    for a, b in edges:
        if a > n or b > n:
            raise ConfigError(f"scenario field 'topology/edges': edge ({a}, {b}) names a pursuer beyond {n}")
    g = data["gains"]
    gains = Gains(float(g["alpha"]), float(g["beta"]), float(g["t_e"]))
    c = data.get("c_rule", {})
    sim = SimOverrides(**{k: float(v) for k, v in data.get("sim", {}).items()})
    morphs = tuple(MorphSpec(float(m["t"]), int(m["pursuer"]), m["law"]) for m in data.get("morphs", []))
    for m in morphs:
        if m.pursuer > n:
            raise ConfigError(f"scenario field 'morphs': pursuer {m.pursuer} does not exist (have {n})")
    out = data.get("output", {})
    scenario = Scenario(
        target=target,
        pursuers=pursuers,
        edges=edges,
        gains=gains,
        c_factor=float(c.get("factor", 3.0)),
        c_frozen=bool(c.get("frozen", False)),
        sim=sim,
        morphs=morphs,
        decimate=int(out.get("decimate", 10)),
        plots=bool(out.get("plots", True)),
        name=data.get("name", ""),
        notes=data.get("notes", ""),
        requires_plugins=tuple(data.get("requires_plugins", [])),
    )

    topology = scenario.topology()
    verdict = validate_gains(gains.alpha, gains.beta, mirror_spectrum(topology))
    if not verdict:
        raise ConfigError(f"inadmissible gains for this topology: {verdict.reason}")
    assignment = scenario.assignment()
    for law in set(assignment.initial) | {s.law for s in assignment.switches}:
        if law.plugin_id is not None:
            get_plugin(law.plugin_id)
    scenario.sim_config()
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return scenario_from_dict(data)


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package, e.g. ``"scenario1"``."""
    stem = name[:-5] if name.endswith(".json") else name
    ref = resources.files("salvo_sim").joinpath("scenarios").joinpath(f"{stem}.json")
    return Path(str(ref))


def resolve_scenario_path(spec: str | Path) -> Path:
    """A filesystem path if it exists, otherwise a bundled scenario of that name."""
    path = Path(spec)
    if path.exists():
        return path
    bundled = bundled_scenario_path(path.name)
    return bundled if bundled.exists() else path


def run_scenario(scenario: Scenario, assignment: GuidanceAssignment | None = None, **overrides: Any) -> RunRecord:
    """Simulate ``scenario``; ``assignment`` replaces its own guidance plan when given."""
    target, pursuers = scenario.initial_states()
    return run(
        target,
        pursuers,
        scenario.topology(),
        assignment if assignment is not None else scenario.assignment(),
        scenario.gains,
        scenario.sim_config(**overrides),
        scenario.c_rule(),
    )


def initial_tgo(scenario: Scenario) -> list[float]:
    """Each pursuer's time-to-go at launch under its initial law."""
    target, pursuers = scenario.initial_states()
    rule = scenario.c_rule()
    out = []
    for p, law in zip(pursuers, scenario.assignment().initial):
        c = rule.value(p.speed, target.speed, p.speed)
        out.append(evaluate_law(law, derive_view(p, target), p.speed, target.speed, c).affine.t_go)
    return out
