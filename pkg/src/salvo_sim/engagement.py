"""Planar point-mass kinematics and the pursuer/target relative geometry."""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple

from .errors import DegenerateGeometryError, SingularSpeedError

SPEED_FLOOR = 1e-3


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.remainder(angle, math.tau)
    if wrapped <= -math.pi:
        return wrapped + math.tau
    return wrapped


class ChannelMode(str, Enum):
    LATERAL_ONLY = "lateral_only"
    LATERAL_AND_RADIAL = "lateral_and_radial"


class AgentState(NamedTuple):
    """Position (m), speed (m/s) and unwrapped flight-path angle (rad)."""

    x: float
    y: float
    speed: float
    gamma: float

    def advanced(self, duration: float) -> "AgentState":
        """Straight-line coast at constant speed and heading."""
        return AgentState(
            self.x + self.speed * math.cos(self.gamma) * duration,
            self.y + self.speed * math.sin(self.gamma) * duration,
            self.speed,
            self.gamma,
        )


class EngagementView(NamedTuple):
    r: float
    theta: float
    v_r: float
    v_theta: float
    delta: float

    @property
    def theta_dot(self) -> float:
        return self.v_theta / self.r


def derive_view(pursuer: AgentState, target: AgentState) -> EngagementView:
    """Relative range, LOS angle, and LOS-frame relative velocity of one pursuer."""
    dx = target.x - pursuer.x
    dy = target.y - pursuer.y
    r = math.hypot(dx, dy)
    if not math.isfinite(r):
        raise DegenerateGeometryError("non-finite agent position")
    if r == 0.0:
        raise DegenerateGeometryError("pursuer and target positions coincide")
    theta = math.atan2(dy, dx)
    if theta == -math.pi:
        theta = math.pi
    delta = math.remainder(pursuer.gamma - theta, math.tau)
    if delta <= -math.pi:
        delta += math.tau
    rel_t = target.gamma - theta
    v_p, v_t = pursuer.speed, target.speed
    return EngagementView(
        r,
        theta,
        v_t * math.cos(rel_t) - v_p * math.cos(delta),
        v_t * math.sin(rel_t) - v_p * math.sin(delta),
        delta,
    )


def state_derivatives(
    pursuer: AgentState,
    view: EngagementView,
    lateral_accel: float,
    radial_accel: float = 0.0,
    channel_mode: ChannelMode = ChannelMode.LATERAL_ONLY,
) -> tuple[float, float, float, float]:
    """Return (dx, dy, dgamma, dspeed) for one pursuer.

    In ``LATERAL_ONLY`` mode the command turns the velocity vector. In
    ``LATERAL_AND_RADIAL`` mode the command acts normal to the LOS, so it
    splits into a turn-rate part and a speed-change part. ``radial_accel``
    is an additional along-velocity term kept for plugin laws; the built-in
    laws leave it at zero.
    """
    v = pursuer.speed
    if not v > SPEED_FLOOR:
        raise SingularSpeedError(f"speed {v!r} m/s is below floor {SPEED_FLOOR} m/s")
    dx = v * math.cos(pursuer.gamma)
    dy = v * math.sin(pursuer.gamma)
    if channel_mode is ChannelMode.LATERAL_ONLY:
        return dx, dy, lateral_accel / v, radial_accel
    phase = pursuer.gamma - view.theta
    return (
        dx,
        dy,
        lateral_accel * math.cos(phase) / v,
        lateral_accel * math.sin(phase) + radial_accel,
    )
