"""Multiclass queueing network primitives and the three benchmark families.

Classes and stations are numbered from 1 in everything a user sees
(``station_of``, JSON files, report labels).  Arrays are 0-based
internally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import numerics

OPEN_TOL = 1e-10


class OpenNetworkError(ValueError):
    """``I - P'`` is singular, i.e. the routing is not that of an open network."""


class NetworkFormatError(ValueError):
    """A network JSON document does not follow the schema."""


@dataclass(frozen=True, eq=False)
class NetworkPrimitives:
    """The primitives ``(C, M, P, alpha)`` of a multiclass queueing network.

    ``station_of[k]`` is the 1-based station serving class ``k + 1``.
    """

    stations: int
    station_of: tuple[int, ...]
    mean_service: np.ndarray
    routing: np.ndarray
    arrival: np.ndarray
    name: str = field(default="", compare=False)

    def __post_init__(self):
        k = len(self.station_of)
        object.__setattr__(self, "station_of", tuple(int(s) for s in self.station_of))
        m = np.asarray(self.mean_service, dtype=float).ravel()
        a = np.asarray(self.arrival, dtype=float).ravel()
        p = np.asarray(self.routing, dtype=float)
        if k == 0:
            raise ValueError("network needs at least one class")
        if m.size != k or a.size != k or p.shape != (k, k):
            raise ValueError(
                f"inconsistent sizes: K={k}, |m|={m.size}, |alpha|={a.size}, P {p.shape}"
            )
        for arr in (m, a, p):
            if not np.all(np.isfinite(arr)):
                raise ValueError("network data must be finite")
            arr.setflags(write=False)
        object.__setattr__(self, "mean_service", m)
        object.__setattr__(self, "arrival", a)
        object.__setattr__(self, "routing", p)

    @property
    def classes(self) -> int:
        return len(self.station_of)

    @property
    def J(self) -> int:
        return self.stations

    @property
    def K(self) -> int:
        return self.classes

    @property
    def service_rate(self) -> np.ndarray:
        return 1.0 / self.mean_service

    def constituency(self, j: int) -> list[int]:
        """0-based classes served at 0-based station ``j``."""
        return [k for k, s in enumerate(self.station_of) if s - 1 == j]

    @cached_property
    def C(self) -> np.ndarray:
        c = np.zeros((self.stations, self.classes))
        for k, s in enumerate(self.station_of):
            c[s - 1, k] = 1.0
        return c

    @property
    def M(self) -> np.ndarray:
        return np.diag(self.mean_service)

    @cached_property
    def Q(self) -> np.ndarray:
        return derive(self).Q

    @property
    def lam(self) -> np.ndarray:
        return derive(self).lam

    @property
    def rho(self) -> np.ndarray:
        return derive(self).rho

    def to_dict(self) -> dict:
        return {
            "stations": self.stations,
            "classes": self.classes,
            "station_of": list(self.station_of),
            "mean_service": self.mean_service.tolist(),
            "routing": self.routing.tolist(),
            "arrival_rates": self.arrival.tolist(),
        }


@dataclass(frozen=True)
class DerivedQuantities:
    Q: np.ndarray
    lam: np.ndarray
    rho: np.ndarray


def derive(net: NetworkPrimitives) -> DerivedQuantities:
    """Visit matrix ``Q = (I - P')^-1``, effective rates ``Q alpha`` and loads ``CM lambda``."""
    cached = net.__dict__.get("_derived")
    if cached is not None:
        return cached
    k = net.classes
    a = np.eye(k) - net.routing.T
    f = numerics.lu_factor(a, tol=OPEN_TOL)
    if f.singular:
        raise OpenNetworkError("I - P' is singular: the network is not open")
    q = numerics.lu_solve(f, np.eye(k))
    lam = q @ net.arrival
    rho = net.C @ (net.mean_service * lam)
    out = DerivedQuantities(q, lam, rho)
    object.__setattr__(net, "_derived", out)
    return out


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(net: NetworkPrimitives) -> ValidationReport:
    rep = ValidationReport()
    j = net.stations
    if j < 1:
        rep.violations.append("stations must be >= 1")
    bad = [i + 1 for i, s in enumerate(net.station_of) if not 1 <= s <= j]
    if bad:
        rep.violations.append(f"station_of out of range 1..{j} for classes {bad}")
    empty = [s for s in range(1, j + 1) if s not in net.station_of]
    if empty:
        rep.violations.append(f"stations {empty} serve no class")
    if np.any(net.mean_service <= 0):
        idx = [i + 1 for i in np.nonzero(net.mean_service <= 0)[0]]
        rep.violations.append(f"mean_service must be positive (classes {idx})")
    if np.any(net.arrival < 0):
        rep.violations.append("arrival_rates must be nonnegative")
    p = net.routing
    if np.any(p < 0) or np.any(p > 1):
        rep.violations.append("routing entries must lie in [0, 1]")
    sums = p.sum(axis=1)
    if np.any(sums > 1 + 1e-12):
        rows = [i + 1 for i in np.nonzero(sums > 1 + 1e-12)[0]]
        rep.violations.append(f"routing rows {rows} sum to more than 1")
    if rep.violations:
        return rep
    try:
        d = derive(net)
    except OpenNetworkError:
        rep.violations.append("openness: I - P' is singular (closed network)")
        return rep
    if np.any(d.Q < -1e-12):
        rep.violations.append("openness: Q = (I - P')^-1 has negative entries")
    for s, r in enumerate(d.rho, start=1):
        if r >= 1.0:
            rep.warnings.append(f"nominal load: rho_{s} = {r:.12g} >= 1")
    return rep


def is_balanced(net: NetworkPrimitives, tol: float = 1e-9) -> bool:
    rho = derive(net).rho
    return bool(rho.max() - rho.min() <= tol)


def chain_network(
    station_of: Sequence[int], m: Sequence[float], alpha1: float, name: str = ""
) -> NetworkPrimitives:
    """Deterministic route through classes 1 -> 2 -> ... -> K -> exit."""
    k = len(station_of)
    m = np.asarray(m, dtype=float)
    if m.size != k:
        raise ValueError(f"expected {k} mean service times, got {m.size}")
    p = np.zeros((k, k))
    for i in range(k - 1):
        p[i, i + 1] = 1.0
    a = np.zeros(k)
    a[0] = alpha1
    return NetworkPrimitives(max(station_of), tuple(station_of), m, p, a, name=name)


DHV_STATIONS = (1, 2, 3, 1, 2, 3)
PSLK_STATIONS = (1, 2, 1, 1, 2)
LK_STATIONS = (1, 2, 2, 1)


def build_dhv(m: Sequence[float], alpha1: float) -> NetworkPrimitives:
    """Three-station, six-class re-entrant line visiting stations 1,2,3,1,2,3."""
    return chain_network(DHV_STATIONS, m, alpha1, name="dhv")


def build_push_started_lu_kumar(m: Sequence[float], alpha1: float) -> NetworkPrimitives:
    return chain_network(PSLK_STATIONS, m, alpha1, name="pslk")


def build_lu_kumar(m: Sequence[float], alpha1: float) -> NetworkPrimitives:
    return chain_network(LK_STATIONS, m, alpha1, name="lk")


BUILDERS = {
    "dhv": build_dhv,
    "pslk": build_push_started_lu_kumar,
    "lk": build_lu_kumar,
}


# ---------------------------------------------------------------------------
# JSON

_NET_KEYS = ("stations", "classes", "station_of", "mean_service", "routing", "arrival_rates")


def network_from_dict(doc: dict, source: str = "<network>") -> NetworkPrimitives:
    if not isinstance(doc, dict):
        raise NetworkFormatError(f"{source}: top level must be an object")
    unknown = sorted(set(doc) - set(_NET_KEYS))
    if unknown:
        raise NetworkFormatError(f"{source}: unknown keys {unknown}")
    missing = [key for key in _NET_KEYS if key not in doc]
    if missing:
        raise NetworkFormatError(f"{source}: missing keys {missing}")
    try:
        k = int(doc["classes"])
        j = int(doc["stations"])
        station_of = [int(s) for s in doc["station_of"]]
        m = [float(x) for x in doc["mean_service"]]
        p = [[float(x) for x in row] for row in doc["routing"]]
        a = [float(x) for x in doc["arrival_rates"]]
    except (TypeError, ValueError) as exc:
        raise NetworkFormatError(f"{source}: non-numeric entry ({exc})") from None
    for key, n in (("station_of", len(station_of)), ("mean_service", len(m)),
                   ("arrival_rates", len(a)), ("routing", len(p))):
        if n != k:
            raise NetworkFormatError(f"{source}: key '{key}' has length {n}, expected classes = {k}")
    for i, row in enumerate(p):
        if len(row) != k:
            raise NetworkFormatError(f"{source}: key 'routing[{i}]' has length {len(row)}, expected {k}")
    return NetworkPrimitives(j, tuple(station_of), np.array(m), np.array(p), np.array(a))


def load_network(path: str | Path) -> NetworkPrimitives:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"{path}: invalid JSON ({exc})") from None
    return network_from_dict(doc, str(path))


def dump_network(net: NetworkPrimitives, path: str | Path) -> None:
    Path(path).write_text(json.dumps(net.to_dict(), indent=2) + "\n", encoding="utf-8")
