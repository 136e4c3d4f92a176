"""Euler integration of the fluid model under a queue-ratio policy."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..network import NetworkPrimitives
from ..ratio import check_ratio


class StepError(ValueError):
    """Time step too coarse for the fastest class."""


class TieBreak(str, enum.Enum):
    LOWEST_INDEX = "lowest"
    MAX_IMBALANCE = "max_imbalance"


@dataclass
class FluidTrajectory:
    times: np.ndarray
    Z: np.ndarray
    W: np.ndarray
    eps: np.ndarray
    allocations: np.ndarray
    band: float

    @property
    def total_workload(self) -> np.ndarray:
        return self.W.sum(axis=1)

    def emptying_time(self, threshold: float = 0.05) -> float | None:
        """First time after which total workload stays below ``threshold``."""
        above = np.nonzero(self.total_workload >= threshold)[0]
        if above.size == 0:
            return float(self.times[0])
        last = above[-1]
        return None if last + 1 >= self.times.size else float(self.times[last + 1])


def chattering_band(net: NetworkPrimitives, dt: float) -> float:
    return 10.0 * dt * float(np.max(net.service_rate))


def _fill(u: np.ndarray, cls: list[int], cap: np.ndarray) -> None:
    """Cap each class at the fluid it holds and hand unused capacity to the others.

    Without this a nearly empty class keeps its share, the clamp at zero
    throws the service away, and the station idles while its workload is
    positive.
    """
    budget = 1.0
    for k in cls:
        u[k] = min(u[k], cap[k])
        budget -= u[k]
    for k in cls:
        if budget <= 0.0:
            break
        extra = min(cap[k] - u[k], budget)
        if extra > 0.0:
            u[k] += extra
            budget -= extra


def _allocate(stations, delta_m, mu, Z, W, eps, band, dt, tiebreak) -> np.ndarray:
    u = np.zeros(Z.size)
    cap = Z / (mu * dt)  # largest allocation the fluid present can absorb in one step
    for j, cls in enumerate(stations):
        over = [k for k in cls if eps[k] > band]
        if over:
            if tiebreak is TieBreak.LOWEST_INDEX:
                win = over[0]
            else:
                win = max(over, key=lambda k: (eps[k], -k))
            u[win] = 1.0
        elif W[j] > band:
            u[cls] = delta_m[cls]
            _fill(u, cls, cap)
        else:
            # inside the band: drain what is there instead of idling
            _fill(u, cls, cap)
    return u


def fluid_step(net: NetworkPrimitives, Z: np.ndarray, u: np.ndarray, dt: float) -> np.ndarray:
    """Unclamped Euler increment ``dt (alpha - (I - P') M^-1 u)``."""
    rate = net.service_rate * u
    return dt * (net.arrival + net.routing.T @ rate - rate)


def simulate_fluid(net: NetworkPrimitives, delta, Z0, dt: float, T: float,
                   tiebreak: TieBreak | str = TieBreak.LOWEST_INDEX,
                   stop_below: float | None = None) -> FluidTrajectory:
    """Integrate the queue-ratio fluid model from ``Z0`` up to time ``T``.

    With ``stop_below`` the run ends early once total workload drops under
    that level.
    """
    tiebreak = TieBreak(tiebreak)
    delta = check_ratio(net, delta)
    Z = np.asarray(Z0, dtype=float).copy()
    if dt <= 0 or T <= 0:
        raise ValueError("dt and T must be positive")
    if Z.shape != (net.classes,) or np.any(Z < 0):
        raise ValueError("Z0 must be a nonnegative K-vector")
    if dt > np.min(net.mean_service) / 4:
        raise StepError(f"dt = {dt} exceeds min mean service / 4 = {np.min(net.mean_service) / 4}")

    band = chattering_band(net, dt)
    CM = net.C * net.mean_service
    stations = [net.constituency(j) for j in range(net.stations)]
    delta_m = delta * net.mean_service
    mu = net.service_rate
    Ct, PT, alpha = net.C.T, net.routing.T, net.arrival
    steps = int(round(T / dt))
    times, Zs, Ws, Es, Us = [], [], [], [], []
    for n in range(steps + 1):
        W = CM @ Z
        eps = Z - delta * (Ct @ W)
        u = _allocate(stations, delta_m, mu, Z, W, eps, band, dt, tiebreak) if n < steps else np.zeros(net.classes)
        times.append(n * dt)
        Zs.append(Z.copy())
        Ws.append(W)
        Es.append(eps)
        Us.append(u)
        if n == steps or (stop_below is not None and W.sum() < stop_below):
            break
        rate = mu * u
        Z = np.maximum(Z + dt * (alpha + PT @ rate - rate), 0.0)
    return FluidTrajectory(np.array(times), np.array(Zs), np.array(Ws), np.array(Es), np.array(Us), band)
