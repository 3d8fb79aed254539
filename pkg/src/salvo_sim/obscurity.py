"""Adversary-side observations of a run and a total-variation distinguishability estimate.

An observer sees some function of the trajectories (positions, bearings
from the target, or line-of-sight rates) corrupted by Gaussian noise. Two
guidance assignments are hard to tell apart when these observation laws are
close in total variation; ``encryption_report`` estimates that distance per
scalar feature and reports the largest as epsilon-hat, a lower bound on the
joint distance.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Sequence

import numpy as np

from .engagement import AgentState, derive_view
from .errors import ConfigError, ObservationRangeError
from .guidance import GuidanceAssignment
from .sim import RunRecord

THREADS_ENV = "SALVO_SIM_THREADS"
DEFAULT_BINS = 64


class ObservationOperator(str, Enum):
    POSITIONS = "positions"
    BEARINGS = "bearings"
    LOS_RATES = "los_rates"

    @property
    def channels(self) -> tuple[str, ...]:
        return ("x", "y") if self is ObservationOperator.POSITIONS else ("value",)


@dataclass(frozen=True)
class ObservationSpec:
    operator: ObservationOperator
    noise_sigma: float
    sample_times: tuple[float, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "operator", ObservationOperator(self.operator))
        object.__setattr__(self, "sample_times", tuple(float(t) for t in self.sample_times))
        if not self.noise_sigma >= 0:
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not self.sample_times:
            raise ConfigError("at least one sample time is required")


@dataclass(frozen=True)
class ObservationSample:
    """Observed features with shape ``(len(sample_times), n_pursuers, arity)``."""

    values: np.ndarray
    feature_names: tuple[str, ...]

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


def _interp_rows(times: np.ndarray, rows: np.ndarray, t: float) -> np.ndarray:
    k = int(np.searchsorted(times, t, side="right")) - 1
    k = min(max(k, 0), len(times) - 2) if len(times) > 1 else 0
    if len(times) == 1:
        return rows[0]
    w = (t - times[k]) / (times[k + 1] - times[k])
    return rows[k] + w * (rows[k + 1] - rows[k])


def feature_names(spec: ObservationSpec, n_pursuers: int) -> tuple[str, ...]:
    op = spec.operator
    return tuple(
        f"{op.value}/P{i + 1}/{ch}@{t:g}s"
        for t in spec.sample_times
        for i in range(n_pursuers)
        for ch in op.channels
    )


def clean_features(record: RunRecord, spec: ObservationSpec) -> np.ndarray:
    """Noise-free features, shape ``(len(sample_times), n, arity)``, by linear interpolation."""
    times = record.times
    lo, hi = float(times[0]), float(times[-1])
    n = record.n_pursuers
    op = spec.operator
    out = np.empty((len(spec.sample_times), n, len(op.channels)))
    for j, t in enumerate(spec.sample_times):
        if not lo <= t <= hi:
            raise ObservationRangeError(f"sample time {t} s lies outside the record [{lo}, {hi}] s")
        ps = _interp_rows(times, record.pursuer_states, t)
        tg = _interp_rows(times, record.target_states, t)
        for i in range(n):
            if op is ObservationOperator.POSITIONS:
                out[j, i] = ps[i, :2]
            elif op is ObservationOperator.BEARINGS:
                out[j, i, 0] = math.atan2(ps[i, 1] - tg[1], ps[i, 0] - tg[0])
            else:
                view = derive_view(AgentState(*ps[i]), AgentState(*tg))
                out[j, i, 0] = view.theta_dot
    return out


def observe(record: RunRecord, spec: ObservationSpec) -> ObservationSample:
    """One noisy observation of ``record``; reproducible for a given ``spec.seed``."""
    clean = clean_features(record, spec)
    rng = np.random.default_rng(spec.seed)
    noisy = clean + rng.normal(0.0, spec.noise_sigma, clean.shape) if spec.noise_sigma > 0 else clean.copy()
    return ObservationSample(noisy, feature_names(spec, record.n_pursuers))


def observe_many(record: RunRecord, spec: ObservationSpec, n_runs: int) -> np.ndarray:
    """``n_runs`` independent noisy observations stacked as rows, shape ``(n_runs, n_features)``.

    The simulation itself is deterministic, so every Monte-Carlo run shares
    the same clean trajectory and differs only in its noise draw.
    """
    if n_runs < 1:
        raise ConfigError(f"n_runs must be >= 1, got {n_runs}")
    clean = clean_features(record, spec).reshape(-1)
    rng = np.random.default_rng(spec.seed)
    noise = rng.normal(0.0, spec.noise_sigma, (n_runs, clean.size)) if spec.noise_sigma > 0 else 0.0
    return clean[None, :] + noise


def empirical_tv(
    samples_a: Sequence[float] | np.ndarray,
    samples_b: Sequence[float] | np.ndarray,
    bins: int = DEFAULT_BINS,
    value_range: tuple[float, float] | None = None,
) -> float:
    """Half the L1 distance between normalised histograms on a shared binning.

    The bin range defaults to the pooled min/max of both sample sets.
    """
    a = np.asarray(samples_a, dtype=float).reshape(-1)
    b = np.asarray(samples_b, dtype=float).reshape(-1)
    if a.size == 0 or b.size == 0:
        raise ValueError("both sample sets must be nonempty")
    if value_range is None:
        lo = min(a.min(), b.min())
        hi = max(a.max(), b.max())
    else:
        lo, hi = value_range
    if hi <= lo:
        # every sample is the same number
        return 0.0
    edges = np.linspace(lo, hi, bins + 1)
    pa = np.histogram(a, edges)[0] / a.size
    pb = np.histogram(b, edges)[0] / b.size
    return float(min(1.0, 0.5 * np.abs(pa - pb).sum()))


def per_feature_tv(obs_a: np.ndarray, obs_b: np.ndarray, bins: int = DEFAULT_BINS) -> np.ndarray:
    """TV of each column's marginal; inputs are ``(runs, features)``."""
    if obs_a.shape[1] != obs_b.shape[1]:
        raise ValueError("observation sets have different feature counts")
    return np.array([empirical_tv(obs_a[:, j], obs_b[:, j], bins) for j in range(obs_a.shape[1])])


@dataclass(frozen=True)
class FeatureTV:
    feature: str
    tv: float


@dataclass(frozen=True)
class EncryptionReport:
    features: tuple[FeatureTV, ...]
    n_runs: int
    bins: int
    sigma: float

    @property
    def epsilon(self) -> float:
        return max(f.tv for f in self.features)

    @property
    def worst_feature(self) -> str:
        return max(self.features, key=lambda f: f.tv).feature

    def to_json(self) -> list[dict[str, Any]]:
        return [
            {"feature": f.feature, "tv": f.tv, "n_runs": self.n_runs, "bins": self.bins, "sigma": self.sigma}
            for f in self.features
        ]


def worker_count(jobs: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    return max(1, min(jobs, limit))


def _simulate(scenario: Any, assignment: GuidanceAssignment | None) -> RunRecord:
    from .scenario import run_scenario

    return run_scenario(scenario, assignment)


def simulate_pair(scenario_a: Any, assignment_a, scenario_b: Any, assignment_b) -> tuple[RunRecord, RunRecord]:
    """Run both engagements, in parallel when more than one worker is allowed."""
    jobs = [(scenario_a, assignment_a), (scenario_b, assignment_b)]
    workers = worker_count(len(jobs))
    if workers == 1:
        return tuple(_simulate(s, a) for s, a in jobs)  # type: ignore[return-value]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_simulate, s, a) for s, a in jobs]
        return tuple(f.result() for f in futures)  # type: ignore[return-value]


def compare_records(
    record_a: RunRecord, record_b: RunRecord, spec: ObservationSpec, n_runs: int, bins: int = DEFAULT_BINS
) -> EncryptionReport:
    """Per-feature TV between noisy observations of two records.

    The two sides draw from child streams of ``spec.seed`` so they never
    share noise.
    """
    seed_a, seed_b = np.random.SeedSequence(spec.seed).generate_state(2)
    obs_a = observe_many(record_a, _with_seed(spec, int(seed_a)), n_runs)
    obs_b = observe_many(record_b, _with_seed(spec, int(seed_b)), n_runs)
    names = feature_names(spec, record_a.n_pursuers)
    tvs = per_feature_tv(obs_a, obs_b, bins)
    return EncryptionReport(
        tuple(FeatureTV(name, float(tv)) for name, tv in zip(names, tvs)), n_runs, bins, spec.noise_sigma
    )


def _with_seed(spec: ObservationSpec, seed: int) -> ObservationSpec:
    return ObservationSpec(spec.operator, spec.noise_sigma, spec.sample_times, seed)


def encryption_report(
    assignment_a: GuidanceAssignment | None,
    assignment_b: GuidanceAssignment | None,
    scenario: Any,
    spec: ObservationSpec,
    n_runs: int,
    bins: int = DEFAULT_BINS,
    scenario_b: Any = None,
) -> EncryptionReport:
    """Estimate epsilon-hat between two guidance assignments on a scenario.

    ``None`` for an assignment means the scenario's own. ``scenario_b``
    lets the second side use a different scenario file altogether.
    """
    record_a, record_b = simulate_pair(scenario, assignment_a, scenario_b or scenario, assignment_b)
    return compare_records(record_a, record_b, spec, n_runs, bins)
