"""Discrete-event simulation of a multiclass network with preemptive-resume service."""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..network import NetworkPrimitives
from ..ratio import CornerSpec, check_ratio

PRNG_ALGORITHM = "numpy.random.PCG64"


class ConfigError(ValueError):
    pass


class Distribution(str, enum.Enum):
    EXPONENTIAL = "exponential"
    DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class QRPolicy:
    delta: np.ndarray
    tiebreak: str = "lowest"


@dataclass(frozen=True)
class StaticPriority:
    """Per-station service order, highest priority first (0-based classes)."""

    order: tuple[tuple[int, ...], ...]

    @classmethod
    def from_lowest(cls, net: NetworkPrimitives, spec: CornerSpec) -> "StaticPriority":
        out = []
        for j, low in enumerate(spec.lowest):
            cls_j = list(net.constituency(j))
            if low - 1 not in cls_j:
                raise ConfigError(f"class {low} is not served at station {j + 1}")
            out.append(tuple(k for k in cls_j if k != low - 1) + (low - 1,))
        return cls(tuple(out))


@dataclass
class DESConfig:
    seed: int
    horizon: float = np.inf
    max_events: int | None = None
    interarrival: Distribution = Distribution.EXPONENTIAL
    service: Distribution = Distribution.EXPONENTIAL
    policy: QRPolicy | StaticPriority | None = None
    sample_dt: float = 1.0

    def __post_init__(self):
        self.interarrival = Distribution(self.interarrival)
        self.service = Distribution(self.service)
        if self.sample_dt <= 0:
            raise ConfigError("sample_dt must be positive")
        if not np.isfinite(self.horizon) and self.max_events is None:
            raise ConfigError("need a finite horizon or max_events")
        if self.policy is None:
            raise ConfigError("a scheduling policy is required")


@dataclass
class DESTrajectory:
    times: np.ndarray
    Z: np.ndarray
    events: int
    seed: int
    algorithm: str = PRNG_ALGORITHM

    @property
    def total(self) -> np.ndarray:
        return self.Z.sum(axis=1)


def _pick(net: NetworkPrimitives, j: int, Z: np.ndarray, policy) -> int | None:
    cls = net.constituency(j)
    if isinstance(policy, StaticPriority):
        for k in policy.order[j]:
            if Z[k] > 0:
                return k
        return None
    w = float(np.sum(net.mean_service[cls] * Z[cls]))
    excess = [(k, Z[k] - policy.delta[k] * w) for k in cls]
    over = [(k, e) for k, e in excess if e > 0 and Z[k] > 0]
    if over:
        if policy.tiebreak == "lowest":
            return over[0][0]
        return max(over, key=lambda t: (t[1], -t[0]))[0]
    for k in cls:
        if Z[k] > 0:
            return k
    return None


def simulate_des(net: NetworkPrimitives, config: DESConfig) -> DESTrajectory:
    """Run one sample path; identical seeds give identical trajectories."""
    if np.any(net.arrival < 0) or np.any(net.mean_service <= 0):
        raise ConfigError("rates must be positive")
    policy = config.policy
    if isinstance(policy, QRPolicy):
        policy = QRPolicy(check_ratio(net, policy.delta), policy.tiebreak)
    elif not isinstance(policy, StaticPriority) or len(policy.order) != net.stations:
        raise ConfigError("policy must be QRPolicy or StaticPriority with one order per station")

    rng = np.random.Generator(np.random.PCG64(config.seed))
    K, J = net.classes, net.stations
    m, alpha, P = net.mean_service, net.arrival, net.routing
    exit_prob = 1.0 - P.sum(axis=1)

    def service_time(k):
        if config.service is Distribution.EXPONENTIAL:
            return rng.exponential(m[k])
        return m[k]

    def interarrival(k):
        if config.interarrival is Distribution.EXPONENTIAL:
            return rng.exponential(1.0 / alpha[k])
        return 1.0 / alpha[k]

    Z = np.zeros(K, dtype=np.int64)
    head_left = np.full(K, np.nan)  # remaining work of the head-of-line job
    serving: list[int | None] = [None] * J
    started = np.zeros(J)  # time the current service stint began
    version = [0] * J
    heap: list[tuple[float, int, str, int, int]] = []
    seq = 0

    def push(t, kind, who, ver=0):
        nonlocal seq
        heapq.heappush(heap, (t, seq, kind, who, ver))
        seq += 1

    for k in range(K):
        if alpha[k] > 0:
            push(interarrival(k), "arr", k)

    def reschedule(now):
        for j in range(J):
            k_old = serving[j]
            if k_old is not None:
                head_left[k_old] -= now - started[j]
            k_new = _pick(net, j, Z, policy)
            if k_new is not None and np.isnan(head_left[k_new]):
                head_left[k_new] = service_time(k_new)
            serving[j] = k_new
            started[j] = now
            version[j] += 1
            if k_new is not None:
                push(now + max(head_left[k_new], 0.0), "dep", j, version[j])

    times, samples = [], []
    next_sample = 0.0
    now = 0.0
    events = 0
    while heap:
        t, _, kind, who, ver = heapq.heappop(heap)
        if kind == "dep" and ver != version[who]:
            continue
        if t > config.horizon:
            break
        while next_sample <= t:
            times.append(next_sample)
            samples.append(Z.copy())
            next_sample += config.sample_dt
        now = t
        if kind == "arr":
            Z[who] += 1
            push(now + interarrival(who), "arr", who)
        else:
            k = serving[who]
            Z[k] -= 1
            head_left[k] = np.nan
            serving[who] = None
            r = rng.random()
            cum = np.cumsum(P[k])
            if r >= 1.0 - exit_prob[k]:
                pass
            else:
                Z[int(np.searchsorted(cum, r, side="right"))] += 1
        events += 1
        reschedule(now)
        if config.max_events is not None and events >= config.max_events:
            break
    end = now if config.max_events is not None and events >= config.max_events else config.horizon
    if np.isfinite(end):
        while next_sample <= end:
            times.append(next_sample)
            samples.append(Z.copy())
            next_sample += config.sample_dt
    return DESTrajectory(np.array(times), np.array(samples).reshape(-1, K), events, config.seed)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float  # Newey-West (Bartlett kernel) standard error
    lag: int
    n: int

    def upper(self, z: float = 3.0) -> float:
        return self.slope + z * self.stderr

    def lower(self, z: float = 3.0) -> float:
        return self.slope - z * self.stderr


def count_slope(times: Sequence[float], counts: Sequence[float], lag: int | None = None) -> SlopeFit:
    """Least-squares slope of a count series.

    Queue counts are strongly autocorrelated, so the standard error uses a
    Bartlett-weighted sum of residual autocovariances (default lag sqrt(n)).
    """
    t = np.asarray(times, float)
    y = np.asarray(counts, float)
    n = t.size
    if n < 3:
        raise ValueError("need at least three samples")
    lag = int(np.sqrt(n)) if lag is None else int(lag)
    tc = t - t.mean()
    sxx = float(tc @ tc)
    slope = float(tc @ (y - y.mean())) / sxx
    u = tc * (y - y.mean() - slope * tc)
    s = float(u @ u)
    for L in range(1, min(lag, n - 1) + 1):
        s += 2.0 * (1.0 - L / (lag + 1)) * float(u[L:] @ u[:-L])
    return SlopeFit(slope, float(np.sqrt(max(s, 0.0))) / sxx, lag, n)
