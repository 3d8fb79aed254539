"""Fixed-step engagement integration with saturation, command filtering and event logging."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .engagement import (
    SPEED_FLOOR,
    AgentState,
    ChannelMode,
    EngagementView,
    derive_view,
)
from .errors import ConfigError, SalvoError, SingularSpeedError, TopologyError
from .graph import DirectedTopology, mirror_spectrum, validate_gains
from .guidance import (
    B_FLOOR,
    CRule,
    GuidanceAssignment,
    GuidanceLaw,
    LawKind,
    command_detail,
    evaluate_law,
)
from .prescribed_time import GAIN_CLAMP, ScalingFunction, consensus_gain_detail

G0 = 9.81


@dataclass(frozen=True)
class Gains:
    alpha: float
    beta: float
    t_e: float


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    a_max: float = 6 * G0
    filter_tau: float = 0.0
    intercept_radius: float = 1.0
    t_max: float = 120.0
    decimate: int = 10
    coop_cutoff_range: float = 20.0
    consensus_threshold: float = 0.1
    gain_clamp: float = GAIN_CLAMP
    b_floor: float = B_FLOOR
    restart_clock_on_switch: bool = True
    filter_init: str = "command"
    filter_in_loop: bool = True

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if not self.a_max > 0:
            raise ConfigError(f"a_max must be > 0, got {self.a_max}")
        if not self.intercept_radius > 0:
            raise ConfigError(f"intercept_radius must be > 0, got {self.intercept_radius}")
        if not self.filter_tau >= 0:
            raise ConfigError(f"filter_tau must be >= 0, got {self.filter_tau}")
        if not self.t_max > 0:
            raise ConfigError(f"t_max must be > 0, got {self.t_max}")
        if self.filter_init not in ("command", "zero"):
            raise ConfigError(f"filter_init must be 'command' or 'zero', got {self.filter_init!r}")
        if int(self.decimate) < 1:
            raise ConfigError(f"decimate must be >= 1, got {self.decimate}")


@dataclass(frozen=True)
class Snapshot:
    t: float
    pursuers: tuple[AgentState, ...]
    target: AgentState
    filtered: tuple[float, ...]
    active: tuple[bool, ...]


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    payload: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"time": self.time, "kind": self.kind, "payload": self.payload}


@dataclass
class RunSummary:
    status: str
    interception_times: list[float | None]
    miss_distances: list[float | None]
    consensus_time: float | None
    consensus_times: list[float]
    final_spread: float | None
    message: str = ""

    @property
    def intercepted(self) -> bool:
        return self.status == "intercepted"

    @property
    def interception_spread(self) -> float | None:
        times = [t for t in self.interception_times if t is not None]
        if len(times) != len(self.interception_times) or not times:
            return None
        return max(times) - min(times)


@dataclass
class RunRecord:
    """Recorded time series (every ``decimate``-th step) plus events and summary.

    Array shapes use ``m`` recorded rows and ``n`` pursuers; the state arrays
    hold ``(x, y, speed, gamma)``.
    """

    times: np.ndarray
    pursuer_states: np.ndarray
    target_states: np.ndarray
    tgo: np.ndarray
    a_raw: np.ndarray
    a_filt: np.ndarray
    s: np.ndarray
    delta: np.ndarray
    gain: np.ndarray
    laws: list[tuple[str, ...]]
    events: list[Event]
    summary: RunSummary
    dt: float

    @property
    def n_pursuers(self) -> int:
        return self.pursuer_states.shape[1]

    def spread(self) -> np.ndarray:
        """max - min of finite t_go per recorded row (nan when fewer than two)."""
        out = np.full(len(self.times), np.nan)
        for k, row in enumerate(self.tgo):
            vals = row[np.isfinite(row)]
            if vals.size >= 2:
                out[k] = vals.max() - vals.min()
        return out

    def events_of(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]


# ---------------------------------------------------------------------------
# integration


def _rk4_pursuer(p: AgentState, accel: float, mode: ChannelMode, target: AgentState, dt: float) -> AgentState:
    """One RK4 step of a pursuer under a held command; the target moves on a straight line."""
    x, y, v, g = p
    cos, sin = math.cos, math.sin
    if not (v > SPEED_FLOOR):
        raise SingularSpeedError(f"speed {v!r} m/s is below floor {SPEED_FLOOR} m/s")
    h = 0.5 * dt
    if mode is ChannelMode.LATERAL_ONLY:
        # speed is constant; only the heading evolves
        kg = accel / v
        g2 = g + h * kg
        g4 = g + dt * kg
        w = dt / 6.0
        return AgentState(
            x + w * v * (cos(g) + 4.0 * cos(g2) + cos(g4)),
            y + w * v * (sin(g) + 4.0 * sin(g2) + sin(g4)),
            v,
            g4,
        )

    atan2 = math.atan2
    tx0, ty0 = target.x, target.y
    vtx = target.speed * cos(target.gamma)
    vty = target.speed * sin(target.gamma)
    txh, tyh = tx0 + h * vtx, ty0 + h * vty
    tx1, ty1 = tx0 + dt * vtx, ty0 + dt * vty

    ph = g - atan2(ty0 - y, tx0 - x)
    k1x, k1y, k1g, k1v = v * cos(g), v * sin(g), accel * cos(ph) / v, accel * sin(ph)

    x2, y2, v2, g2 = x + h * k1x, y + h * k1y, v + h * k1v, g + h * k1g
    if not (v2 > SPEED_FLOOR):
        raise SingularSpeedError(f"speed {v2!r} m/s is below floor {SPEED_FLOOR} m/s")
    ph = g2 - atan2(tyh - y2, txh - x2)
    k2x, k2y, k2g, k2v = v2 * cos(g2), v2 * sin(g2), accel * cos(ph) / v2, accel * sin(ph)

    x3, y3, v3, g3 = x + h * k2x, y + h * k2y, v + h * k2v, g + h * k2g
    if not (v3 > SPEED_FLOOR):
        raise SingularSpeedError(f"speed {v3!r} m/s is below floor {SPEED_FLOOR} m/s")
    ph = g3 - atan2(tyh - y3, txh - x3)
    k3x, k3y, k3g, k3v = v3 * cos(g3), v3 * sin(g3), accel * cos(ph) / v3, accel * sin(ph)

    x4, y4, v4, g4 = x + dt * k3x, y + dt * k3y, v + dt * k3v, g + dt * k3g
    if not (v4 > SPEED_FLOOR):
        raise SingularSpeedError(f"speed {v4!r} m/s is below floor {SPEED_FLOOR} m/s")
    ph = g4 - atan2(ty1 - y4, tx1 - x4)
    k4x, k4y, k4g, k4v = v4 * cos(g4), v4 * sin(g4), accel * cos(ph) / v4, accel * sin(ph)

    w = dt / 6.0
    return AgentState(
        x + w * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        y + w * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        v + w * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        g + w * (k1g + 2.0 * k2g + 2.0 * k3g + k4g),
    )


def saturate(accel: float, a_max: float) -> float:
    return min(max(accel, -a_max), a_max)


def filter_update(filtered: float, command: float, dt: float, tau: float) -> float:
    """Exact zero-order-hold update of a unity-gain first-order lag."""
    if tau <= 0:
        return command
    return filtered + (1.0 - math.exp(-dt / tau)) * (command - filtered)


def step(
    snapshot: Snapshot,
    commands: Sequence[float],
    cfg: SimConfig,
    channels: Sequence[ChannelMode] | None = None,
) -> tuple[Snapshot, tuple[bool, ...]]:
    """Advance every active agent by ``cfg.dt``.

    Commands are saturated, passed through the actuator lag and then held
    constant over the step. Returns the next snapshot and per-pursuer
    saturation flags. Inactive (intercepted) pursuers are left untouched.
    """
    n = len(snapshot.pursuers)
    if channels is None:
        channels = [ChannelMode.LATERAL_ONLY] * n
    saturated = []
    filtered = []
    pursuers = []
    for i, p in enumerate(snapshot.pursuers):
        if not snapshot.active[i]:
            saturated.append(False)
            filtered.append(snapshot.filtered[i])
            pursuers.append(p)
            continue
        a_sat = saturate(commands[i], cfg.a_max)
        saturated.append(a_sat != commands[i])
        a_f = filter_update(snapshot.filtered[i], a_sat, cfg.dt, cfg.filter_tau)
        filtered.append(a_f)
        applied = a_f if cfg.filter_in_loop else a_sat
        pursuers.append(_rk4_pursuer(p, applied, channels[i], snapshot.target, cfg.dt))
    nxt = Snapshot(
        snapshot.t + cfg.dt,
        tuple(pursuers),
        snapshot.target.advanced(cfg.dt),
        tuple(filtered),
        snapshot.active,
    )
    return nxt, tuple(saturated)


def _finite_state(p: AgentState) -> bool:
    return math.isfinite(p.x + p.y + p.speed + p.gamma)


# ---------------------------------------------------------------------------
# orchestration


class _Recorder:
    def __init__(self, n: int) -> None:
        self.n = n
        self.rows: dict[str, list] = {k: [] for k in (
            "times", "pursuer_states", "target_states", "tgo", "a_raw", "a_filt", "s", "delta", "gain", "laws"
        )}

    def add(self, t, pursuers, target, tgo, a_raw, a_filt, s, delta, gain, laws) -> None:
        r = self.rows
        r["times"].append(t)
        r["pursuer_states"].append([(p.x, p.y, p.speed, p.gamma) for p in pursuers])
        r["target_states"].append((target.x, target.y, target.speed, target.gamma))
        r["tgo"].append(list(tgo))
        r["a_raw"].append(list(a_raw))
        r["a_filt"].append(list(a_filt))
        r["s"].append(list(s))
        r["delta"].append(list(delta))
        r["gain"].append(gain)
        r["laws"].append(laws)

    def arrays(self) -> dict[str, Any]:
        n = self.n
        out: dict[str, Any] = {}
        shapes = {"pursuer_states": (0, n, 4), "target_states": (0, 4)}
        for key, vals in self.rows.items():
            if key == "laws":
                out[key] = vals
            elif vals:
                out[key] = np.asarray(vals, dtype=float)
            else:
                out[key] = np.zeros(shapes.get(key, (0, n) if key not in ("times", "gain") else (0,)))
        return out


def run(
    target: AgentState,
    pursuers: Sequence[AgentState],
    topology: DirectedTopology,
    assignment: GuidanceAssignment,
    gains: Gains,
    cfg: SimConfig = SimConfig(),
    c_rule: CRule = CRule(),
) -> RunRecord:
    """Integrate the engagement until every pursuer intercepts, an abort, or ``t_max``.

    Each step evaluates every active pursuer's law on the same snapshot,
    forms ``s = L t_go`` over the pursuers that have not yet intercepted,
    issues the cooperative command (base law only inside
    ``coop_cutoff_range`` or when the residual digraph is no longer
    strongly connected) and advances the state exactly as :func:`step`
    does. The target position is evaluated in closed form.
    """
    n = len(pursuers)
    if topology.n != n or len(assignment.initial) != n:
        raise ConfigError(
            f"pursuer count {n} does not match topology ({topology.n}) "
            f"or assignment ({len(assignment.initial)})"
        )
    verdict = validate_gains(gains.alpha, gains.beta, mirror_spectrum(topology))
    if not verdict:
        raise ConfigError(f"inadmissible gains: {verdict.reason}")

    dt = cfg.dt
    a_max = cfg.a_max
    radius = cfg.intercept_radius
    cutoff = cfg.coop_cutoff_range
    lag = 1.0 - math.exp(-dt / cfg.filter_tau) if cfg.filter_tau > 0 else 1.0
    in_loop = cfg.filter_in_loop
    scaling = ScalingFunction(gains.t_e)
    alpha, beta = gains.alpha, gains.beta
    v_t = target.speed
    c_factor = c_rule.factor
    c_base = [c_rule.factor * (p.speed + v_t) for p in pursuers]

    states = list(pursuers)
    filtered = [0.0] * n
    active = [True] * n
    tgt = target
    recorder = _Recorder(n)
    events: list[Event] = []
    intercept_t: list[float | None] = [None] * n
    miss: list[float | None] = [None] * n
    consensus_times: list[float] = []
    in_consensus = False
    sat_state = [False] * n
    b_sing_state = [False] * n
    clamp_state = False
    clock_origin = 0.0
    laws = assignment.laws_at(0.0)
    switch_times = assignment.switch_times
    next_switch = 0
    subgraphs: dict[tuple[int, ...], Any] = {}
    n_steps = int(math.ceil(cfg.t_max / dt - 1e-9))
    status, message = "timeout", ""
    last_spread: float | None = None
    active_idx = tuple(range(n))
    k = 0

    def coupling_graph(idx: tuple[int, ...]) -> list[tuple[int, float, list[int]]] | None:
        # per active agent: (index, in-degree, in-neighbours) in the residual digraph
        if idx not in subgraphs:
            try:
                sub = topology.subgraph(idx) if len(idx) >= 2 else None
            except TopologyError:
                sub = None
            subgraphs[idx] = None if sub is None else [
                (i, float(sub.in_degree[j, j]), [idx[m] for m in sub.in_neighbours(j)])
                for j, i in enumerate(idx)
            ]
        return subgraphs[idx]

    def abort(time: float, reason: str) -> None:
        nonlocal status, message
        events.append(Event(time, "abort", {"reason": reason}))
        status, message = "aborted", reason

    graph = coupling_graph(active_idx)
    while True:
        t = k * dt
        if next_switch < len(switch_times) and t >= switch_times[next_switch] - 1e-12:
            new_laws = assignment.laws_at(switch_times[next_switch])
            changed = [i for i in range(n) if new_laws[i] != laws[i]]
            events.append(Event(t, "switch", {
                "pursuers": changed, "laws": [new_laws[i].label for i in changed],
            }))
            laws = new_laws
            next_switch += 1
            if cfg.restart_clock_on_switch:
                clock_origin = t
            in_consensus = False

        views: list[Any] = [None] * n
        evals: list[Any] = [None] * n
        tgo = [math.nan] * n
        try:
            for i in active_idx:
                p = states[i]
                view = derive_view(p, tgt)
                views[i] = view
                c = c_base[i] if c_rule.frozen else c_factor * (p.speed + v_t)
                ev = evaluate_law(laws[i], view, p.speed, v_t, c)
                evals[i] = ev
                tgo[i] = ev.affine.t_go
        except SalvoError as exc:
            abort(t, str(exc))
            break

        s = [0.0] * n
        if graph is not None:
            for i, deg, nbrs in graph:
                s[i] = deg * tgo[i] - sum([tgo[j] for j in nbrs])
        tau = t - clock_origin
        if tau >= gains.t_e:
            gain, clamped = -alpha, False
        else:
            gain, clamped = consensus_gain_detail(scaling, tau, alpha, beta, cfg.gain_clamp)
        if clamped != clamp_state:
            events.append(Event(t, "clamp", {"active": clamped}))
            clamp_state = clamped

        if len(active_idx) >= 2:
            vals = [tgo[i] for i in active_idx]
            spread = max(vals) - min(vals)
            last_spread = spread
            if spread < cfg.consensus_threshold:
                if not in_consensus:
                    consensus_times.append(t)
                    events.append(Event(t, "consensus_reached", {"spread": spread}))
                    in_consensus = True
            else:
                in_consensus = False

        raw = [0.0] * n
        for i in active_idx:
            res = command_detail(evals[i], s[i], gain, graph is not None and views[i].r >= cutoff, cfg.b_floor)
            if res.b_singular is not b_sing_state[i]:
                events.append(Event(t, "b_singular", {"pursuer": i, "active": res.b_singular}))
                b_sing_state[i] = res.b_singular
            raw[i] = res.accel
        if not math.isfinite(sum(raw)):
            abort(t, "non-finite command")
            break

        if k == 0 and cfg.filter_init == "command":
            filtered = [saturate(a, a_max) for a in raw]

        # zero-order hold over [t, t + dt]: saturate, lag, integrate
        new_states = list(states)
        try:
            for i in active_idx:
                a = raw[i]
                a_sat = a_max if a > a_max else (-a_max if a < -a_max else a)
                saturated = a_sat != a
                if saturated is not sat_state[i]:
                    kind = "saturation_on" if saturated else "saturation_off"
                    events.append(Event(t, kind, {"pursuer": i, "command": a}))
                    sat_state[i] = saturated
                filtered[i] += lag * (a_sat - filtered[i])
                applied = filtered[i] if in_loop else a_sat
                new_states[i] = _rk4_pursuer(states[i], applied, evals[i].channel, tgt, dt)
        except SingularSpeedError as exc:
            abort(t, str(exc))
            break

        if k % cfg.decimate == 0:
            recorder.add(
                t, states, tgt, tgo, raw,
                [filtered[i] if active[i] else 0.0 for i in range(n)], s,
                [views[i].delta if views[i] is not None else math.nan for i in range(n)],
                gain, tuple(law.label for law in laws),
            )

        k += 1
        t_next = k * dt
        states = new_states
        tgt = target.advanced(t_next)
        if not math.isfinite(sum([sum(states[i]) for i in active_idx])):
            abort(t_next, "non-finite state")
            break

        hit = False
        for i in active_idx:
            p = states[i]
            r_new = math.hypot(tgt.x - p.x, tgt.y - p.y)
            if r_new <= radius:
                r_old = views[i].r
                frac = (r_old - radius) / (r_old - r_new) if r_old > r_new else 1.0
                t_hit = t + dt * min(max(frac, 0.0), 1.0)
                intercept_t[i] = t_hit
                miss[i] = r_new
                active[i] = False
                filtered[i] = 0.0
                hit = True
                events.append(Event(t_hit, "intercept", {
                    "pursuer": i, "miss_distance": r_new, "step_time": t_next,
                }))
        if hit:
            active_idx = tuple(i for i in range(n) if active[i])
            graph = coupling_graph(active_idx)
            if not active_idx:
                status = "intercepted"
                break
        if k >= n_steps:
            events.append(Event(t_next, "timeout", {"remaining": list(active_idx)}))
            break

    # closing row so the frozen end state is always on record
    t_end = k * dt
    if not recorder.rows["times"] or recorder.rows["times"][-1] < t_end:
        recorder.add(
            t_end, states, tgt, [math.nan] * n, [0.0] * n, [0.0] * n,
            [0.0] * n, [math.nan] * n, math.nan, tuple(law.label for law in laws),
        )

    summary = RunSummary(
        status=status,
        interception_times=intercept_t,
        miss_distances=miss,
        consensus_time=consensus_times[0] if consensus_times else None,
        consensus_times=consensus_times,
        final_spread=last_spread,
        message=message,
    )
    return RunRecord(events=events, summary=summary, dt=dt, **recorder.arrays())
