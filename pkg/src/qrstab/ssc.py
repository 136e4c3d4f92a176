"""Linear-attraction feasibility for state-space collapse.

For each benchmark family the requirement that one positive test vector
``h`` gives strictly negative drift of the weighted high-priority fluid
under every static-priority policy reduces to a finite list of strict
homogeneous inequalities ``c' h < 0``.  The generators below emit those
lists; :func:`feasible` decides them with the bounded LP

    max p  s.t.  h_k >= p,  c' h <= -p,  p <= 1,

whose optimum is 0 or 1 by homogeneity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .network import DHV_STATIONS, LK_STATIONS, PSLK_STATIONS, NetworkPrimitives
from .numerics import LinearProgram, Relation, lp_solve

P_TOL = 1e-7


@dataclass(frozen=True)
class Inequality:
    coeffs: np.ndarray
    label: str

    def value(self, h) -> float:
        return float(self.coeffs @ np.asarray(h, float))


@dataclass(frozen=True)
class ParameterCondition:
    name: str
    holds: bool
    description: str
    binding: bool = True


@dataclass
class InequalitySystem:
    family: str
    class_count: int
    inequalities: list[Inequality]
    parameter_conditions: list[ParameterCondition] = field(default_factory=list)
    alpha_threshold: float = 0.0
    alpha1: float = 0.0

    def scaled(self, c: float) -> "InequalitySystem":
        return InequalitySystem(self.family, self.class_count,
                                [Inequality(c * q.coeffs, q.label) for q in self.inequalities],
                                list(self.parameter_conditions), self.alpha_threshold, self.alpha1)


def _vec(k: int, terms: dict[int, float]) -> np.ndarray:
    v = np.zeros(k)
    for cls, coef in terms.items():
        v[cls - 1] += coef
    return v


def _check_m(m: Sequence[float], k: int) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.size != k or np.any(m <= 0):
        raise ValueError(f"expected {k} positive mean service times")
    return m


def dhv_system(m: Sequence[float], alpha1: float) -> InequalitySystem:
    m = _check_m(m, 6)
    u1, u2, u3, u4, u5, u6 = 1.0 / m
    a = alpha1
    rows = {
        2: {2: u1 - u2, 6: -u6},
        3: {4: u3 - u4, 2: -u2},
        4: {6: u5 - u6, 4: -u4},
        5: {1: a - u1, 2: u1 - u2, 3: u2 - u3},
        6: {1: a - u1, 2: u1 - u2},
        7: {1: a - u1, 3: u1 - u3},
        8: {2: a - u2, 3: u2 - u3},
        9: {3: u2 - u3, 4: u3 - u4, 2: -u2},
        10: {2: u1 * (1 - u3 / u4) - u2, 3: u2 - u3},
        11: {4: u2 - u4, 2: -u2},
        12: {4: u3 - u4, 3: -u3},
        13: {4: u3 - u4, 5: u4 - u5, 3: -u3},
        14: {3: u2 * (1 - u4 / u5) - u3, 4: u3 - u4},
        15: {5: u3 - u5, 3: -u3},
        16: {5: u4 - u5, 4: -u4},
        17: {5: u4 - u5, 6: u5 - u6, 4: -u4},
        18: {4: u3 * (1 - u5 / u6) - u4, 5: u4 - u5},
        19: {6: u4 - u6, 4: -u4},
        20: {6: u5 - u6, 5: -u5},
        21: {1: a - u1, 6: u5 - u6, 5: -u5},
        22: {5: u4 * (1 - a / u1) - u5, 6: u5 - u6},
        23: {1: a - u1, 2: u1 - u2, 6: -u6},
        24: {1: a - u1, 2: u1 - u2},
        25: {1: a - u1, 3: u2 - u3},
    }
    ineqs = [Inequality(_vec(6, t), f"dhv.{i}") for i, t in rows.items()]
    m1, m2, m3, m4, m5, m6 = m
    thr = max((m6 - m5) / (m2 * m6), (m5 - m4) / (m1 * m5), (m6 - m4) / (m1 * m6), 0.0)
    s = m2 + m4 + m6
    conds = [ParameterCondition("m2+m4+m6<2", bool(s < 2), f"m2+m4+m6 = {s:.12g}", binding=False)]
    return InequalitySystem("dhv", 6, ineqs, conds, thr, alpha1)


def pslk_system(m: Sequence[float], alpha1: float) -> InequalitySystem:
    """Push-started Lu-Kumar system.

    The inequalities assume the within-station tie-break order 1 > 3 > 4
    at station 1 for queue-ratio policies.
    """
    m = _check_m(m, 5)
    u1, u2, u3, u4, u5 = 1.0 / m
    a = alpha1
    rows = {
        27: {4: -u4, 5: u4 - u5},
        28: {3: u2 - u3, 4: u3},
        29: {2: -u2, 3: u2 - u3, 4: u3},
        30: {3: -u3, 4: u3},
        31: {1: a - u1, 2: u1 - u2},
        32: {1: a - u1, 3: u2},
        34: {1: a - u1, 2: u1 - u2, 3: u2},
    }
    if u1 <= u2:
        rows[35] = {1: a - u1, 3: u1}
    ineqs = [Inequality(_vec(5, t), f"pslk.{i}") for i, t in rows.items()]
    m1, m2, m3, m4, m5 = m
    thr = max((m1 - m2) / (m1 * m5), (m5 - m4) / (m1 * m5), 0.0)
    conds = [ParameterCondition("m2m4>m3m5", bool(m2 * m4 > m3 * m5),
                                f"m2*m4 = {m2 * m4:.12g}, m3*m5 = {m3 * m5:.12g}")]
    return InequalitySystem("pslk", 5, ineqs, conds, thr, alpha1)


def lk_system(m: Sequence[float], alpha1: float) -> InequalitySystem:
    m = _check_m(m, 4)
    u1, u2, u3, u4 = 1.0 / m
    rows = {
        1: {1: alpha1 - u1, 2: u1 - u2},
        2: {2: u1 - u2},
        3: {4: u3 - u4},
        4: {3: -u3, 4: u3 - u4},
    }
    ineqs = [Inequality(_vec(4, t), f"lk.{i}") for i, t in rows.items()]
    s = m[1] + m[3]
    conds = [ParameterCondition("m2+m4<1", bool(s < 1), f"m2+m4 = {s:.12g}", binding=False)]
    return InequalitySystem("lk", 4, ineqs, conds, 0.0, alpha1)


GENERATORS = {"dhv": dhv_system, "pslk": pslk_system, "lk": lk_system}
_STATIONS = {"dhv": DHV_STATIONS, "pslk": PSLK_STATIONS, "lk": LK_STATIONS}


def system_for_network(family: str, net: NetworkPrimitives) -> InequalitySystem:
    """Build the family's system from a network, checking that the topology matches."""
    if family not in GENERATORS:
        raise ValueError(f"unknown SSC family '{family}' (choose from {sorted(GENERATORS)})")
    k = len(_STATIONS[family])
    chain = np.zeros((k, k))
    for i in range(k - 1):
        chain[i, i + 1] = 1.0
    if (net.station_of != _STATIONS[family] or not np.array_equal(net.routing, chain)
            or np.any(net.arrival[1:] != 0)):
        raise ValueError(f"network does not have the '{family}' topology")
    return GENERATORS[family](net.mean_service, float(net.arrival[0]))


@dataclass
class SSCReport:
    feasible: bool
    p_star: float
    h_witness: np.ndarray | None
    alpha_threshold: float
    alpha_ok: bool
    conditions: list[ParameterCondition]
    violated_conditions: list[str]

    @property
    def certified(self) -> bool:
        binding = [c for c in self.conditions if c.binding and not c.holds]
        return self.feasible and self.alpha_ok and not binding

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "p_star": self.p_star,
            "h": None if self.h_witness is None else self.h_witness.tolist(),
            "alpha_threshold": self.alpha_threshold,
            "alpha_ok": self.alpha_ok,
            "conditions": [
                {"name": c.name, "holds": c.holds, "binding": c.binding, "description": c.description}
                for c in self.conditions
            ],
            "violated_conditions": list(self.violated_conditions),
            "certified": self.certified,
        }


def feasible(system: InequalitySystem) -> SSCReport:
    k = system.class_count
    rows, rels = [], []
    for i in range(k):
        r = np.zeros(k + 1)
        r[i], r[k] = 1.0, -1.0
        rows.append(r)
        rels.append(Relation.GE)
    for q in system.inequalities:
        rows.append(np.r_[q.coeffs, 1.0])
        rels.append(Relation.LE)
    lp = LinearProgram(
        c=np.r_[np.zeros(k), 1.0],
        A=np.array(rows),
        b=np.zeros(len(rows)),
        relations=rels,
        lower=np.zeros(k + 1),  # h = 0, p = 0 is feasible, so p >= 0 loses nothing
        upper=np.r_[np.full(k, np.inf), 1.0],
    )
    out = lp_solve(lp)
    p_star = out.value if out.optimal else 0.0
    ok = p_star >= 1.0 - P_TOL
    h = None
    if ok:
        h = out.x[:k] / np.min(out.x[:k])
    violated = [c.name for c in system.parameter_conditions if not c.holds]
    return SSCReport(ok, p_star, h, system.alpha_threshold,
                     bool(system.alpha1 > system.alpha_threshold),
                     list(system.parameter_conditions), violated)
