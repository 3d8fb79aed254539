"""Time-to-go models, their affine rate decomposition, and cooperative commands.

Every law exposes ``t_go`` together with ``F`` and ``B`` such that
``d(t_go)/dt = F + B * a`` along the law's own actuation channel. The
cooperative command then picks ``a`` so that ``d(t_go)/dt + 1`` equals the
consensus term ``gain * s_k``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Protocol, Sequence

import numpy as np

from .engagement import ChannelMode, EngagementView
from .errors import ConfigError, DegenerateGeometryError, GuidanceError
from .graph import DirectedTopology

B_FLOOR = 1e-8
TPN_DEN_FLOOR = 1e-9


class LawKind(str, Enum):
    DPG = "DPG"
    TPNG = "TPNG"
    PLUGIN = "PLUGIN"


@dataclass(frozen=True)
class GuidanceLaw:
    kind: LawKind
    c_gain: float | None = None
    plugin_id: str | None = None

    def __post_init__(self) -> None:
        if self.kind is LawKind.PLUGIN and not self.plugin_id:
            raise ConfigError("plugin guidance law needs a plugin_id")

    @property
    def label(self) -> str:
        return self.plugin_id if self.kind is LawKind.PLUGIN else self.kind.value

    @classmethod
    def parse(cls, text: str) -> "GuidanceLaw":
        key = text.strip()
        if key.upper() in ("DPG", "TPNG"):
            return cls(LawKind(key.upper()))
        if key.upper() == "TPN":
            return cls(LawKind.TPNG)
        if key.lower().startswith("plugin:"):
            return cls(LawKind.PLUGIN, plugin_id=key.split(":", 1)[1])
        raise ConfigError(f"unknown guidance law {text!r}; expected DPG, TPNG or plugin:<id>")


DPG = GuidanceLaw(LawKind.DPG)
TPNG = GuidanceLaw(LawKind.TPNG)


class TgoAffine(NamedTuple):
    t_go: float
    F: float
    B: float


# ---------------------------------------------------------------------------
# deviated pursuit


def _check_dpg(view: EngagementView, v_p: float, v_t: float) -> float:
    den = v_p * v_p - v_t * v_t
    if not den > 0:
        raise GuidanceError(f"deviated pursuit needs a faster pursuer (V_P={v_p}, V_T={v_t})")
    if not abs(view.delta) < 0.5 * math.pi:
        raise DegenerateGeometryError(f"deviation angle {view.delta:.6g} rad is outside (-pi/2, pi/2)")
    return den


def tgo_dpg(view: EngagementView, v_p: float, v_t: float) -> float:
    den = _check_dpg(view, v_p, v_t)
    d = view.delta
    return view.r * (view.v_r + 2.0 * v_p * math.cos(d) - view.v_theta * math.tan(d)) / den


def affine_dpg(view: EngagementView, v_p: float, v_t: float) -> TgoAffine:
    den = _check_dpg(view, v_p, v_t)
    r, v_r, v_theta, d = view.r, view.v_r, view.v_theta, view.delta
    cos_d = math.cos(d)
    sec2 = 1.0 / (cos_d * cos_d)
    return TgoAffine(
        r * (v_r + 2.0 * v_p * cos_d - v_theta * math.sin(d) / cos_d) / den,
        -1.0 + v_theta * v_theta * sec2 / den,
        -r * v_theta * sec2 / (v_p * den),
    )


# ---------------------------------------------------------------------------
# true proportional navigation


def _tpn_den(view: EngagementView, c: float) -> float:
    den = view.v_theta**2 + view.v_r**2 + 2.0 * c * view.v_r
    if abs(den) < TPN_DEN_FLOOR:
        raise GuidanceError(f"TPN time-to-go denominator {den:.3g} is singular")
    return den


def tgo_tpn(view: EngagementView, c: float) -> float:
    return -view.r * (view.v_r + 2.0 * c) / _tpn_den(view, c)


def affine_tpn(view: EngagementView, c: float) -> TgoAffine:
    den = _tpn_den(view, c)
    lead = view.v_r + 2.0 * c
    den2 = den * den
    return TgoAffine(
        t_go=-view.r * lead / den,
        F=-1.0 + 2.0 * c * view.v_theta**2 * lead / den2,
        B=-2.0 * lead * view.v_theta * view.r / den2,
    )


# ---------------------------------------------------------------------------
# plugin laws


class GuidancePlugin(Protocol):
    """What a user-supplied law must provide.

    ``affine`` returns time-to-go and its rate decomposition for the law's
    own channel. ``base_command`` must equal ``(-1 - F) / B``, i.e. the
    command that keeps ``d(t_go)/dt = -1``; it is also what the simulator
    issues when the consensus term is suspended.
    """

    channel: ChannelMode

    def affine(self, view: EngagementView, v_p: float, v_t: float) -> TgoAffine: ...

    def base_command(self, view: EngagementView, v_p: float, v_t: float) -> float: ...


_PLUGINS: dict[str, GuidancePlugin] = {}


def register_plugin(plugin_id: str, plugin: GuidancePlugin) -> None:
    _PLUGINS[plugin_id] = plugin


def unregister_plugin(plugin_id: str) -> None:
    _PLUGINS.pop(plugin_id, None)


def get_plugin(plugin_id: str) -> GuidancePlugin:
    try:
        return _PLUGINS[plugin_id]
    except KeyError:
        raise ConfigError(f"guidance plugin {plugin_id!r} is not registered") from None


def registered_plugins() -> list[str]:
    return sorted(_PLUGINS)


# ---------------------------------------------------------------------------
# law evaluation and commands


class LawEvaluation(NamedTuple):
    affine: TgoAffine
    base_command: float
    channel: ChannelMode


def evaluate_law(law: GuidanceLaw, view: EngagementView, v_p: float, v_t: float, c: float | None = None) -> LawEvaluation:
    """Time-to-go, (F, B), base term and channel for ``law`` at ``view``.

    ``c`` is the TPN navigation parameter; ``law.c_gain`` wins when set.
    """
    if law.kind is LawKind.DPG:
        return LawEvaluation(affine_dpg(view, v_p, v_t), v_p * view.theta_dot, ChannelMode.LATERAL_ONLY)
    if law.kind is LawKind.TPNG:
        c_val = law.c_gain if law.c_gain is not None else c
        if c_val is None:
            raise GuidanceError("TPN law evaluated without a navigation parameter c")
        return LawEvaluation(affine_tpn(view, c_val), c_val * view.theta_dot, ChannelMode.LATERAL_AND_RADIAL)
    plugin = get_plugin(law.plugin_id or "")
    return LawEvaluation(plugin.affine(view, v_p, v_t), plugin.base_command(view, v_p, v_t), plugin.channel)


def cooperative_command(affine: TgoAffine, s_k: float, gain: float) -> float:
    """(-1 - F + gain * s_k) / B."""
    return (-1.0 - affine.F + gain * s_k) / affine.B


class CommandResult(NamedTuple):
    accel: float
    base: float
    cooperative: bool
    b_singular: bool


def command_detail(
    evaluation: LawEvaluation,
    s_k: float,
    gain: float,
    cooperative: bool = True,
    b_floor: float = B_FLOOR,
) -> CommandResult:
    """Cooperative command with the singular-B guard.

    Evaluated as ``base + gain * s_k / B``. That is algebraically the same
    as :func:`cooperative_command` because every law's base term equals
    ``(-1 - F) / B``, but it avoids the cancellation in ``-1 - F`` when the
    pursuer is on a collision course (``V_theta -> 0``). With
    ``cooperative`` false (terminal phase, broken topology) or
    ``|B| < b_floor`` only the base term is issued.
    """
    base = evaluation.base_command
    b = evaluation.affine.B
    if abs(b) < b_floor:
        return CommandResult(base, base, False, True)
    if not cooperative:
        return CommandResult(base, base, False, False)
    return CommandResult(base + gain * s_k / b, base, True, False)


def command(
    law: GuidanceLaw,
    view: EngagementView,
    v_p: float,
    v_t: float,
    s_k: float,
    gain: float,
    c: float | None = None,
) -> float:
    """Lateral acceleration command for one pursuer, m/s^2."""
    return command_detail(evaluate_law(law, view, v_p, v_t, c), s_k, gain).accel


def dpg_closed_form(view: EngagementView, v_p: float, v_t: float, s_k: float, gain: float) -> float:
    """Deviated-pursuit command written as pursuit term plus consensus correction."""
    coeff = v_p * (v_p**2 - v_t**2) * math.cos(view.delta) ** 2 / (view.r * view.v_theta)
    return v_p * view.theta_dot + coeff * (-gain) * s_k


def tpn_closed_form(view: EngagementView, c: float, s_k: float, gain: float) -> float:
    """TPN command written as ``c * theta_dot`` plus consensus correction."""
    den = view.v_theta**2 + view.v_r**2 + 2.0 * c * view.v_r
    coeff = den**2 / (2.0 * (view.v_r + 2.0 * c) * view.v_theta * view.r)
    return c * view.theta_dot + coeff * (-gain) * s_k


# ---------------------------------------------------------------------------
# consensus coupling


def coupling(topology: DirectedTopology, tgo_all: Sequence[float]) -> np.ndarray:
    """s = L @ t_go."""
    tgo = np.asarray(tgo_all, dtype=float)
    if tgo.shape != (topology.n,):
        raise ValueError(f"expected {topology.n} time-to-go values, got shape {tgo.shape}")
    return topology.laplacian @ tgo


def coupling_split(
    topology: DirectedTopology, tgo_all: Sequence[float], classes: Sequence[str]
) -> tuple[np.ndarray, np.ndarray]:
    """Split ``s`` into contributions from same-class and other-class agents.

    The diagonal of L is counted with the agent's own class, so
    ``intra + inter == coupling(...)``.
    """
    tgo = np.asarray(tgo_all, dtype=float)
    labels = np.asarray(classes)
    same = labels[:, None] == labels[None, :]
    lap = topology.laplacian
    intra = (lap * same) @ tgo
    inter = (lap * ~same) @ tgo
    return intra, inter


# ---------------------------------------------------------------------------
# morphing


@dataclass(frozen=True, order=True)
class Switch:
    t_switch: float
    pursuer: int
    law: GuidanceLaw = field(compare=False)


@dataclass(frozen=True)
class GuidanceAssignment:
    initial: tuple[GuidanceLaw, ...]
    switches: tuple[Switch, ...] = ()
    lateral_only: tuple[bool, ...] | None = None

    def __post_init__(self) -> None:
        n = len(self.initial)
        times = [s.t_switch for s in self.switches]
        if any(not t > 0 for t in times):
            raise ConfigError("switch times must be strictly positive")
        if times != sorted(times):
            raise ConfigError("switches must be sorted by time")
        for sw in self.switches:
            if not 0 <= sw.pursuer < n:
                raise ConfigError(f"switch refers to pursuer {sw.pursuer}, but there are {n}")
        if self.lateral_only is not None:
            if len(self.lateral_only) != n:
                raise ConfigError("lateral_only flags must match the pursuer count")
            laws = [(i, law) for i, law in enumerate(self.initial)]
            laws += [(sw.pursuer, sw.law) for sw in self.switches]
            for i, law in laws:
                if self.lateral_only[i] and _needs_radial(law):
                    raise ConfigError(
                        f"pursuer {i} is lateral-only and cannot fly {law.label}, "
                        "which needs a radial acceleration channel"
                    )

    @property
    def switch_times(self) -> list[float]:
        return sorted({s.t_switch for s in self.switches})

    def laws_at(self, t: float) -> tuple[GuidanceLaw, ...]:
        return apply_morph(self, t)


def _needs_radial(law: GuidanceLaw) -> bool:
    if law.kind is LawKind.TPNG:
        return True
    if law.kind is LawKind.PLUGIN and law.plugin_id in _PLUGINS:
        return _PLUGINS[law.plugin_id].channel is ChannelMode.LATERAL_AND_RADIAL
    return False


def apply_morph(assignment: GuidanceAssignment, t: float) -> tuple[GuidanceLaw, ...]:
    """Active law per pursuer at time ``t``; a switch at ``t_s`` is in force for ``t >= t_s``."""
    laws = list(assignment.initial)
    times = [s.t_switch for s in assignment.switches]
    for sw in assignment.switches[: bisect.bisect_right(times, t)]:
        laws[sw.pursuer] = sw.law
    return tuple(laws)


@dataclass(frozen=True)
class CRule:
    """TPN navigation parameter c = factor * (V_P + V_T).

    ``frozen`` evaluates it once with each pursuer's initial speed.
    """

    factor: float = 3.0
    frozen: bool = False

    def value(self, v_p: float, v_t: float, v_p_initial: float) -> float:
        return self.factor * ((v_p_initial if self.frozen else v_p) + v_t)
