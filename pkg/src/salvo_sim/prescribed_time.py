"""Time-varying scaling h(t) and the prescribed-time consensus gain."""

from __future__ import annotations

import math
from dataclasses import dataclass

GAIN_CLAMP = 1e4

# below this phase the sin/cos forms lose precision; switch to series
_SERIES_CUTOFF = 1e-2


def _sin_minus_x(x: float) -> float:
    if x < _SERIES_CUTOFF:
        x2 = x * x
        return -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    return math.sin(x) - x


@dataclass(frozen=True)
class ScalingFunction:
    """h(t) = (t_e/pi) sin(pi t/t_e) + t - t_e on [0, t_e), and 1 afterwards.

    Both h and its derivative are evaluated in terms of the remaining time
    ``u = t_e - t`` so that values close to ``t_e`` keep full relative
    precision.
    """

    t_e: float

    def __post_init__(self) -> None:
        if not self.t_e > 0:
            raise ValueError(f"t_e must be positive, got {self.t_e}")

    def h(self, t: float) -> float:
        if t >= self.t_e:
            return 1.0
        x = math.pi * (self.t_e - t) / self.t_e
        return self.t_e / math.pi * _sin_minus_x(x)

    def h_dot(self, t: float) -> float:
        if t >= self.t_e:
            return 0.0
        half = 0.5 * math.pi * (self.t_e - t) / self.t_e
        return 2.0 * math.sin(half) ** 2

    def ratio(self, t: float) -> float:
        """h_dot/h on [0, t_e); 0 afterwards. Always <= 0."""
        if t >= self.t_e:
            return 0.0
        h = self.h(t)
        if h >= 0.0:
            return -math.inf
        return self.h_dot(t) / h

    def consensus_gain(self, t: float, alpha: float, beta: float, clamp: float = GAIN_CLAMP) -> float:
        return consensus_gain_detail(self, t, alpha, beta, clamp)[0]


def consensus_gain_detail(
    scaling: ScalingFunction, t: float, alpha: float, beta: float, clamp: float = GAIN_CLAMP
) -> tuple[float, bool]:
    """Return ``(-alpha + beta*h_dot/h, clamped)`` with the singular part capped at ``clamp``."""
    if t >= scaling.t_e:
        return -alpha, False
    term = beta * scaling.ratio(t)
    if not term >= -clamp:
        return -alpha - clamp, True
    return -alpha + term, False


def h(t: float, t_e: float) -> float:
    return ScalingFunction(t_e).h(t)


def h_dot(t: float, t_e: float) -> float:
    return ScalingFunction(t_e).h_dot(t)


def consensus_gain(t: float, alpha: float, beta: float, t_e: float, clamp: float = GAIN_CLAMP) -> float:
    return consensus_gain_detail(ScalingFunction(t_e), t, alpha, beta, clamp)[0]
