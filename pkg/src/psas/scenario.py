"""Scenario files: strict schema, YAML loading with line diagnostics, resolution.

A scenario is one YAML (or JSON) document.  Unknown keys are rejected at every
level.  The emitted ``manifest.json`` wraps the fully resolved scenario and
can itself be loaded as a scenario.
"""

from __future__ import annotations

import copy
import itertools
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .field import FieldConfig, TwoPulseTrain
from .interferometry import SecondPulse, Wavepacket
from .system import SystemConfig, initial_state

RUN_KINDS = ("propagate", "dressed", "adiabaticity", "phase", "berry", "interferogram", "sweep")
MANIFEST_KEYS = {"artifact", "version", "scenario"}


class ScenarioError(Exception):
    """Parse or validation failure, with ``file:line`` diagnostics."""

    def __init__(self, messages: list[str]):
        super().__init__("\n".join(messages))
        self.messages = messages


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Envelope(Strict):
    kind: Literal["constant", "gaussian", "sech", "smooth-ramp"] = "constant"
    peak_rabi: float = 1.0
    center: float = 0.0
    width: float = 1.0


class Phase(Strict):
    kind: Literal["constant", "linear-chirp", "sinusoidal"] = "constant"
    offset: float = 0.0
    chirp: float = 0.0
    depth: float = 0.0
    rate: float = 0.0


class FieldBlock(Strict):
    carrier: float = 0.0
    envelope: Envelope = Envelope()
    phase: Phase = Phase()
    floor: float = 1e-9
    n_max: int = 3

    def build(self) -> FieldConfig:
        return FieldConfig(carrier=self.carrier, envelope_kind=self.envelope.kind,
                           peak_rabi=self.envelope.peak_rabi, center=self.envelope.center,
                           width=self.envelope.width, phase_kind=self.phase.kind,
                           phase_offset=self.phase.offset, chirp=self.phase.chirp,
                           mod_depth=self.phase.depth, mod_rate=self.phase.rate,
                           floor=self.floor, n_max=self.n_max)

    @model_validator(mode="after")
    def _check(self):
        self.build()
        return self


class Superposition(Strict):
    kind: Literal["superposition"]
    g: tuple[float, float]
    e: tuple[float, float]


class SystemBlock(Strict):
    omega_g: float = 0.0
    omega_e: float = 1.0
    gamma_re: float = 0.0
    gamma_im: float = 0.0
    phi_g: float = 0.0
    phi_e: float = 0.0
    initial: Union[Literal["ground", "excited"], Superposition] = "ground"

    def build(self) -> SystemConfig:
        return SystemConfig(omega_g=self.omega_g, omega_e=self.omega_e, gamma_re=self.gamma_re,
                            gamma_im=self.gamma_im, phi_g=self.phi_g, phi_e=self.phi_e)

    def initial_state(self):
        cfg = self.build()
        if isinstance(self.initial, Superposition):
            return initial_state(cfg, "superposition",
                                 (complex(*self.initial.g), complex(*self.initial.e)))
        return initial_state(cfg, self.initial)

    @model_validator(mode="after")
    def _check(self):
        self.initial_state()
        return self


class Grid(Strict):
    """Either explicit ``values`` or ``start``/``stop``/``num`` (inclusive)."""

    values: Optional[list[float]] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    num: Optional[int] = None

    @model_validator(mode="after")
    def _check(self):
        ranged = (self.start, self.stop, self.num)
        if self.values is not None:
            if any(v is not None for v in ranged):
                raise ValueError("give either values or start/stop/num, not both")
            if len(self.values) == 0:
                raise ValueError("empty range")
        else:
            if any(v is None for v in ranged):
                raise ValueError("range needs start, stop and num")
            if self.num < 1:
                raise ValueError("empty range")
        return self

    def array(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        return np.linspace(self.start, self.stop, self.num)


class Window(Strict):
    t_start: float = 0.0
    t_end: float
    points: int = Field(2000, ge=3)

    @model_validator(mode="after")
    def _order(self):
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        return self

    def grid(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.points)


class PropagateBlock(Window):
    tol: float = 1e-10
    method: Literal["first-order", "second-order"] = "first-order"


class DressedBlock(Window):
    ic: Literal["ground", "excited"] = "ground"
    threshold: float = 0.1
    n_max: int = 2
    sgn_zero: Literal[1, -1] = 1


class AdiabaticityBlock(Window):
    threshold: float = 0.1
    n_max: int = 2


class PhaseBlock(Window):
    tol: float = 1e-10


class BerryBlock(Strict):
    points: int = Field(4096, ge=3)
    reverse: bool = False


class PulsesBlock(Strict):
    width: float = 0.05
    area: float = 0.1
    first_center: float = 0.3
    delay: float = 1.0
    phase1: float = 0.0
    phase2: float = 0.0
    carrier: float = 0.0

    def build(self, delay: float | None = None) -> TwoPulseTrain:
        return TwoPulseTrain(carrier=self.carrier, width=self.width, area=self.area,
                             first_center=self.first_center,
                             delay=self.delay if delay is None else delay,
                             phase1=self.phase1, phase2=self.phase2)

    @model_validator(mode="after")
    def _check(self):
        self.build()
        return self


class Level(Strict):
    omega: float
    c: tuple[float, float]


class WavepacketBlock(Strict):
    levels: list[Level]
    created_at: float = 0.0
    initial_phase: float = 0.0

    def build(self) -> Wavepacket:
        return Wavepacket(levels=tuple((lv.omega, complex(*lv.c)) for lv in self.levels),
                          created_at=self.created_at, initial_phase=self.initial_phase)

    @model_validator(mode="after")
    def _check(self):
        self.build()
        return self


class SecondPulseBlock(Strict):
    amplitude: float = 1.0
    policy: Literal["locked", "fixed"] = "locked"
    locked_frequency: float = 0.0
    offset: float = 0.0
    phase: float = 0.0

    def build(self) -> SecondPulse:
        return SecondPulse(**self.model_dump())

    @model_validator(mode="after")
    def _check(self):
        self.build()
        return self


class InterferogramBlock(Strict):
    model: Literal["ramsey", "wavepacket"] = "ramsey"
    scan: Literal["delay", "locked_frequency", "phase_offset"] = "delay"
    values: Optional[Grid] = None
    tau: Optional[float] = None
    tol: float = 1e-10

    @model_validator(mode="after")
    def _check(self):
        if self.model == "ramsey" and self.scan != "delay":
            raise ValueError("ramsey interferograms scan the delay only")
        if self.model == "wavepacket" and self.values is None:
            raise ValueError("wavepacket interferograms need scan values")
        if self.scan != "delay" and self.tau is None:
            raise ValueError(f"scan over {self.scan} needs a fixed tau")
        return self


class Axis(Strict):
    key: str
    values: Optional[list[float]] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    num: Optional[int] = None

    @model_validator(mode="after")
    def _check(self):
        Grid(values=self.values, start=self.start, stop=self.stop, num=self.num)
        return self

    def array(self) -> np.ndarray:
        return Grid(values=self.values, start=self.start, stop=self.stop, num=self.num).array()


class SweepBlock(Strict):
    base: Literal["propagate", "dressed", "adiabaticity", "phase", "berry", "interferogram"]
    axes: list[Axis]

    @field_validator("axes")
    @classmethod
    def _count(cls, v):
        if not 1 <= len(v) <= 2:
            raise ValueError(f"a sweep takes 1 or 2 axes, got {len(v)}")
        return v


class OutputBlock(Strict):
    directory: str = "out"
    formats: list[Literal["csv", "json"]] = ["csv"]

    @field_validator("formats")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise ValueError("at least one output format is required")
        return sorted(set(v), key=["csv", "json"].index)


class Scenario(Strict):
    name: str
    run: Literal["propagate", "dressed", "adiabaticity", "phase", "berry", "interferogram", "sweep"]
    system: SystemBlock = SystemBlock()
    field: Optional[FieldBlock] = None
    pulses: Optional[PulsesBlock] = None
    wavepacket: Optional[WavepacketBlock] = None
    second_pulse: Optional[SecondPulseBlock] = None
    propagate: Optional[PropagateBlock] = None
    dressed: Optional[DressedBlock] = None
    adiabaticity: Optional[AdiabaticityBlock] = None
    phase: Optional[PhaseBlock] = None
    berry: Optional[BerryBlock] = None
    interferogram: Optional[InterferogramBlock] = None
    sweep: Optional[SweepBlock] = None
    output: OutputBlock = OutputBlock()

    @model_validator(mode="after")
    def _referenced(self):
        kind = self.sweep.base if self.run == "sweep" else self.run
        if self.run == "sweep" and self.sweep is None:
            raise ValueError("run 'sweep' needs a sweep block")
        if getattr(self, kind) is None:
            raise ValueError(f"run '{kind}' needs a '{kind}' block")
        if kind == "interferogram":
            if self.interferogram.model == "ramsey" and self.pulses is None:
                raise ValueError("ramsey interferogram needs a 'pulses' block")
            if self.interferogram.model == "wavepacket" and (self.wavepacket is None
                                                               or self.second_pulse is None):
                raise ValueError("wavepacket interferogram needs 'wavepacket' and 'second_pulse'")
        elif self.field is None:
            raise ValueError(f"run '{kind}' needs a 'field' block")
        return self

    @property
    def kind(self) -> str:
        return self.sweep.base if self.run == "sweep" else self.run

    def resolved(self) -> dict:
        return self.model_dump(mode="json", exclude_none=True)


# ---------------------------------------------------------------- loading

def _node_at(node, loc):
    """Follow a pydantic error location through a composed YAML node tree."""
    for part in loc:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == str(part):
                    nxt = k if part == loc[-1] else v
                    break
            if nxt is None:
                return node
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and part < len(node.value):
            node = node.value[part]
        else:
            return node
    return node


def _format_errors(err: ValidationError, source: str, root) -> list[str]:
    out = []
    for e in err.errors():
        loc = tuple(p for p in e["loc"] if not (isinstance(p, str) and (p.startswith("function-")
                                                                         or p in ("Superposition", "literal['ground','excited']"))))
        key = ".".join(str(p) for p in loc) or "<root>"
        line = ""
        if root is not None:
            node = _node_at(root, loc)
            line = f":{node.start_mark.line + 1}"
        msg = e["msg"]
        if e["type"] == "extra_forbidden":
            msg = "unknown key"
        out.append(f"{source}{line}: {key}: {msg}")
    return out


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError([f"{source}: parse error: {exc}"]) from exc
    if isinstance(data, dict) and set(data) >= MANIFEST_KEYS:
        data = data["scenario"]
        root = _node_at(root, ("scenario",)) if root is not None else None
    if not isinstance(data, dict):
        raise ScenarioError([f"{source}: scenario must be a mapping"])
    return validate_scenario(data, source, root)


def validate_scenario(data: dict, source: str = "<dict>", root=None) -> Scenario:
    try:
        return Scenario.model_validate(data)
    except ValidationError as exc:
        raise ScenarioError(_format_errors(exc, source, root)) from exc


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError([f"{path}: cannot read: {exc.strerror}"]) from exc
    return parse_scenario(text, str(path))


# ---------------------------------------------------------------- sweeps

def _get(d: dict, dotted: str):
    cur = d
    for part in dotted.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise KeyError(dotted)
        cur = cur[part]
    return cur


def _set(d: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    cur = d
    for part in parts[:-1]:
        cur = cur[part]
    cur[parts[-1]] = value


def sweep_points(scenario: Scenario) -> tuple[list[str], list[tuple[float, ...]], list[dict]]:
    """Expand a sweep into resolved single-run scenario dicts (cartesian, row-major)."""
    base = scenario.resolved()
    base["run"] = scenario.sweep.base
    del base["sweep"]
    keys = [a.key for a in scenario.sweep.axes]
    for k in keys:
        try:
            leaf = _get(base, k)
        except KeyError:
            raise ScenarioError([f"sweep axis '{k}': no such key in the resolved scenario"]) from None
        if isinstance(leaf, bool) or not isinstance(leaf, (int, float)):
            raise ScenarioError([f"sweep axis '{k}': not a numeric leaf"])
    grids = [a.array() for a in scenario.sweep.axes]
    combos, docs = [], []
    for values in itertools.product(*grids):
        doc = copy.deepcopy(base)
        for k, v in zip(keys, values):
            leaf = _get(base, k)
            _set(doc, k, int(v) if isinstance(leaf, int) and float(v).is_integer() else float(v))
        validate_scenario(doc, f"sweep point {dict(zip(keys, values))}")
        combos.append(tuple(float(v) for v in values))
        docs.append(doc)
    return keys, combos, docs


def apply_overrides(data: dict, *, tol: float | None = None, out: str | None = None,
                    formats: list[str] | None = None) -> dict:
    """Fold command-line overrides into a resolved scenario so manifests reproduce runs."""
    data = copy.deepcopy(data)
    if tol is not None:
        kind = data["sweep"]["base"] if data["run"] == "sweep" else data["run"]
        block = data.get(kind)
        if isinstance(block, dict) and "tol" in block:
            block["tol"] = tol
    if out is not None:
        data.setdefault("output", {})["directory"] = out
    if formats is not None:
        data.setdefault("output", {})["formats"] = formats
    return data
