"""Queue-ratio weights, static-priority corners and polytope coordinates.

A ratio matrix is stored as its weight vector ``delta`` (length K): the
matrix entry for class ``k`` and its station is ``delta[k]``, all other
entries are zero.  Admissibility means ``delta >= 0`` and, per station,
``sum_k m_k delta_k = 1``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .network import NetworkPrimitives

STATION_SUM_TOL = 1e-10
NEIGHBOR_TOL = 1e-12
POLYTOPE_TOL = 1e-12


class SpecError(ValueError):
    """A corner specification names a class that its station does not serve."""


class RatioError(ValueError):
    """A weight vector is not an admissible ratio matrix for the network."""


class OutOfPolytopeError(RatioError):
    """Free coordinates put a pinned weight below zero."""


@dataclass(frozen=True)
class CornerSpec:
    """Lowest-priority class (1-based) for each station, in station order."""

    lowest: tuple[int, ...]

    def label(self) -> str:
        return ",".join(str(k) for k in self.lowest)

    def high_classes(self, net: NetworkPrimitives) -> tuple[int, ...] | None:
        """Complementary high-priority class per station when every station has two classes."""
        out = []
        for j, low in enumerate(self.lowest):
            cls = [k + 1 for k in net.constituency(j)]
            if len(cls) != 2:
                return None
            out.append(cls[0] if cls[1] == low else cls[1])
        return tuple(out)

    def high_label(self, net: NetworkPrimitives) -> str | None:
        hi = self.high_classes(net)
        return None if hi is None else ",".join(str(k) for k in hi)

    @classmethod
    def parse(cls, text: str) -> "CornerSpec":
        return cls(tuple(int(t) for t in text.replace(" ", "").split(",") if t))

    @classmethod
    def from_high(cls, net: NetworkPrimitives, high: Sequence[int]) -> "CornerSpec":
        """Corner whose per-station high-priority classes are ``high`` (two-class stations only)."""
        lowest = []
        for j, h in enumerate(high):
            cls_j = [k + 1 for k in net.constituency(j)]
            if len(cls_j) != 2 or h not in cls_j:
                raise SpecError(f"class {h} is not one of the two classes at station {j + 1}")
            lowest.append(cls_j[0] if cls_j[1] == h else cls_j[1])
        return cls(tuple(lowest))


def station_sums(net: NetworkPrimitives, delta) -> np.ndarray:
    return net.C @ (net.mean_service * np.asarray(delta, float))


def check_ratio(net: NetworkPrimitives, delta, tol: float = STATION_SUM_TOL) -> np.ndarray:
    d = np.asarray(delta, dtype=float).ravel()
    if d.size != net.classes:
        raise RatioError(f"delta has {d.size} entries, network has {net.classes} classes")
    if not np.all(np.isfinite(d)):
        raise RatioError("delta entries must be finite")
    if np.any(d < -POLYTOPE_TOL):
        raise RatioError("delta entries must be nonnegative")
    sums = station_sums(net, d)
    bad = np.nonzero(np.abs(sums - 1.0) > tol)[0]
    if bad.size:
        raise RatioError(
            "station sums sum_k m_k delta_k must equal 1; got "
            + ", ".join(f"station {j + 1}: {sums[j]:.12g}" for j in bad)
        )
    return d


def ratio_matrix(net: NetworkPrimitives, delta) -> np.ndarray:
    """The K x J matrix with ``delta[k]`` in column ``station_of[k]``."""
    return net.C.T * np.asarray(delta, float)[:, None]


def static_priority(net: NetworkPrimitives, spec: CornerSpec) -> np.ndarray:
    if len(spec.lowest) != net.stations:
        raise SpecError(f"need one lowest class per station ({net.stations}), got {len(spec.lowest)}")
    d = np.zeros(net.classes)
    for j, low in enumerate(spec.lowest):
        if not 1 <= low <= net.classes or net.station_of[low - 1] != j + 1:
            raise SpecError(f"class {low} is not served at station {j + 1}")
        d[low - 1] = 1.0 / net.mean_service[low - 1]
    return d


def corners(net: NetworkPrimitives) -> list[tuple[CornerSpec, np.ndarray]]:
    """All static-priority corners, lexicographic in the per-station lowest class."""
    choices = [[k + 1 for k in net.constituency(j)] for j in range(net.stations)]
    out = []
    for combo in itertools.product(*choices):
        spec = CornerSpec(tuple(combo))
        out.append((spec, static_priority(net, spec)))
    return out


def convex_combine(delta1, delta2, lam: float) -> np.ndarray:
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    return lam * np.asarray(delta1, float) + (1.0 - lam) * np.asarray(delta2, float)


def differing_stations(net: NetworkPrimitives, delta1, delta2, tol: float = NEIGHBOR_TOL) -> list[int]:
    diff = np.abs(np.asarray(delta1, float) - np.asarray(delta2, float)) > tol
    return sorted({net.station_of[k] - 1 for k in np.nonzero(diff)[0]})


def are_neighbors(net: NetworkPrimitives, delta1, delta2) -> bool:
    """True when the two ratio matrices differ in at most one station column."""
    return len(differing_stations(net, delta1, delta2)) <= 1


def max_weight(net: NetworkPrimitives, c: Sequence[float]) -> np.ndarray:
    """Weights reproducing max-weight scheduling with quadratic exponents and costs ``c``."""
    c = np.asarray(c, dtype=float)
    if c.size != net.classes or np.any(c <= 0):
        raise ValueError("max-weight costs must be K positive numbers")
    m = net.mean_service
    d = np.empty(net.classes)
    for j in range(net.stations):
        cls = net.constituency(j)
        denom = np.sum(m[cls] ** 2 / c[cls])
        d[cls] = (m[cls] / c[cls]) / denom
    return d


# ---------------------------------------------------------------------------
# free coordinates: per station the lowest-indexed class is pinned


def pinned_classes(net: NetworkPrimitives) -> list[int]:
    return [net.constituency(j)[0] for j in range(net.stations)]


def free_classes(net: NetworkPrimitives) -> list[int]:
    """0-based classes that act as polytope coordinates, station by station."""
    out = []
    for j in range(net.stations):
        out.extend(net.constituency(j)[1:])
    return out


def free_coord_names(net: NetworkPrimitives) -> list[str]:
    return [f"delta_{k + 1}" for k in free_classes(net)]


def to_free_coords(net: NetworkPrimitives, delta) -> np.ndarray:
    return np.asarray(delta, float)[free_classes(net)]


def pinned_values(net: NetworkPrimitives, coords) -> np.ndarray:
    """Pinned weight per station implied by the free coordinates (may be negative)."""
    coords = np.asarray(coords, float)
    free = free_classes(net)
    if coords.size != len(free):
        raise ValueError(f"expected {len(free)} free coordinates, got {coords.size}")
    d = np.zeros(net.classes)
    d[free] = coords
    m = net.mean_service
    out = np.empty(net.stations)
    for j, p in enumerate(pinned_classes(net)):
        rest = [k for k in net.constituency(j) if k != p]
        out[j] = (1.0 - np.sum(m[rest] * d[rest])) / m[p]
    return out


def from_free_coords(net: NetworkPrimitives, coords) -> np.ndarray:
    coords = np.asarray(coords, float)
    if np.any(coords < -POLYTOPE_TOL):
        raise OutOfPolytopeError("free coordinates must be nonnegative")
    piv = pinned_values(net, coords)
    if np.any(piv < -POLYTOPE_TOL):
        j = int(np.argmin(piv))
        raise OutOfPolytopeError(
            f"pinned weight of class {pinned_classes(net)[j] + 1} would be {piv[j]:.6g} < 0"
        )
    d = np.zeros(net.classes)
    d[free_classes(net)] = coords
    d[pinned_classes(net)] = np.maximum(piv, 0.0)
    return d


# ---------------------------------------------------------------------------
# JSON


def ratio_from_dict(doc: dict, source: str = "<delta>") -> np.ndarray:
    if not isinstance(doc, dict) or set(doc) != {"delta"}:
        raise RatioError(f"{source}: expected an object with the single key 'delta'")
    try:
        return np.array([float(x) for x in doc["delta"]])
    except (TypeError, ValueError) as exc:
        raise RatioError(f"{source}: key 'delta' must be a list of numbers ({exc})") from None


def load_ratio(path: str | Path) -> np.ndarray:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RatioError(f"{path}: invalid JSON ({exc})") from None
    return ratio_from_dict(doc, str(path))


def dump_ratio(delta, path: str | Path) -> None:
    Path(path).write_text(json.dumps({"delta": [float(x) for x in delta]}) + "\n", encoding="utf-8")
