"""Robust certificates over the whole ratio-matrix polytope.

Stability for every queue-ratio policy is reduced to the finitely many
static-priority corners: every corner must have an invertible reflection
matrix, pass the Chen-S test, and all corner determinants must share one
sign.  The full certificate adds the linear-attraction (SSC) LP for the
benchmark families.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ssc as ssc_mod
from .matrix_classes import ChenReport, is_chen_s, is_completely_s
from .network import NetworkPrimitives, derive, validate
from .ratio import CornerSpec, OutOfPolytopeError, corners, free_classes, free_coord_names, from_free_coords
from .reflection import reflection

NOMINAL_TOL = 1e-12


class Verdict(str, enum.Enum):
    CERTIFIED = "Certified"
    NOT_CERTIFIED = "NotCertified"
    UNKNOWN = "Unknown"


@dataclass
class CornerReport:
    spec: CornerSpec
    high_label: str | None
    det_Rinv: float
    det_sign: int
    invertible: bool
    completely_s: bool
    chen_s: ChenReport | None

    @property
    def det_R(self) -> float | None:
        return 1.0 / self.det_Rinv if self.invertible else None

    @property
    def passes(self) -> bool:
        return self.invertible and self.chen_s is not None and self.chen_s.holds

    def failure(self) -> str | None:
        if not self.invertible:
            return "CMQ Delta is singular (zero determinant)"
        if not self.completely_s:
            return self.chen_s.reason if self.chen_s is not None else "not completely-S"
        if self.chen_s is not None and not self.chen_s.holds:
            return self.chen_s.reason
        return None

    def to_dict(self) -> dict:
        return {
            "lowest": list(self.spec.lowest),
            "label": self.spec.label(),
            "high": self.high_label,
            "det_R": self.det_R,
            "det_Rinv": self.det_Rinv,
            "det_sign": self.det_sign,
            "invertible": self.invertible,
            "completely_s": self.completely_s,
            "chen_s": None if self.chen_s is None else self.chen_s.holds,
            "chen": None if self.chen_s is None else self.chen_s.to_dict(),
        }


def evaluate_corner(net: NetworkPrimitives, spec: CornerSpec, delta) -> CornerReport:
    refl = reflection(net, delta)
    chen = None
    cs = False
    if refl.invertible:
        chen = is_chen_s(refl.R, refl.theta)
        cs = chen.completely_s is not None and chen.completely_s.holds
    return CornerReport(spec, spec.high_label(net), refl.det_Rinv, refl.det_sign,
                        refl.invertible, cs, chen)


@dataclass
class RobustSPCertificate:
    corner_reports: list[CornerReport]
    all_invertible: bool
    all_chen_s: bool
    same_sign: bool
    nominal_load_ok: bool
    culprit: CornerSpec | None = None
    reasons: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> Verdict:
        ok = self.nominal_load_ok and self.all_invertible and self.all_chen_s and self.same_sign
        return Verdict.CERTIFIED if ok else Verdict.NOT_CERTIFIED

    @property
    def culprit_report(self) -> CornerReport | None:
        for r in self.corner_reports:
            if self.culprit is not None and r.spec == self.culprit:
                return r
        return None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "nominal_load_ok": self.nominal_load_ok,
            "all_invertible": self.all_invertible,
            "all_chen_s": self.all_chen_s,
            "same_sign": self.same_sign,
            "culprit": None if self.culprit is None else {"lowest": list(self.culprit.lowest)},
            "reasons": list(self.reasons),
            "corners": [r.to_dict() for r in self.corner_reports],
        }


def certify_sp(net: NetworkPrimitives, fast: bool = False) -> RobustSPCertificate:
    """Check every static-priority corner; ``fast`` stops at the first failing corner."""
    rep = validate(net)
    if not rep.ok:
        raise ValueError("invalid network: " + "; ".join(rep.violations))
    rho = derive(net).rho
    reasons = []
    nominal_ok = bool(np.all(rho < 1.0 - NOMINAL_TOL))
    if not nominal_ok:
        reasons.append("nominal load violated: max rho = %.12g" % float(rho.max()))

    reports: list[CornerReport] = []
    culprit = None
    for spec, delta in corners(net):
        r = evaluate_corner(net, spec, delta)
        reports.append(r)
        if culprit is None and not r.passes:
            culprit = spec
            reasons.append(f"corner lowest {{{spec.label()}}}: {r.failure()}")
            if fast:
                break
    signs = {r.det_sign for r in reports}
    same_sign = len(signs) == 1 and 0 not in signs
    if culprit is None and not same_sign:
        ref = reports[0].det_sign
        odd = next(r for r in reports if r.det_sign != ref or r.det_sign == 0)
        culprit = odd.spec
        reasons.append(f"corner lowest {{{odd.spec.label()}}}: determinant sign differs from corner "
                       f"lowest {{{reports[0].spec.label()}}}")
    return RobustSPCertificate(
        corner_reports=reports,
        all_invertible=all(r.invertible for r in reports),
        all_chen_s=all(r.passes for r in reports),
        same_sign=same_sign,
        nominal_load_ok=nominal_ok,
        culprit=culprit,
        reasons=reasons,
    )


@dataclass
class RobustQRCertificate:
    sp: RobustSPCertificate
    ssc: ssc_mod.SSCReport | None
    family: str | None

    @property
    def verdict(self) -> Verdict:
        if self.ssc is None:
            return Verdict.UNKNOWN
        if self.sp.verdict is Verdict.CERTIFIED and self.ssc.certified:
            return Verdict.CERTIFIED
        return Verdict.NOT_CERTIFIED

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "family": self.family,
            "sp": self.sp.to_dict(),
            "ssc": None if self.ssc is None else self.ssc.to_dict(),
        }


def certify_full(net: NetworkPrimitives, family: str | None) -> RobustQRCertificate:
    sp = certify_sp(net)
    if family is None:
        return RobustQRCertificate(sp, None, None)
    system = ssc_mod.system_for_network(family, net)
    return RobustQRCertificate(sp, ssc_mod.feasible(system), family)


# ---------------------------------------------------------------------------
# region scans


class ScanMode(str, enum.Enum):
    CHEN = "chen"
    COMPLETELY = "completely"
    BOTH = "both"


@dataclass(frozen=True)
class ScanRecord:
    index: tuple[int, ...]
    coords: tuple[float, ...]
    in_polytope: bool
    invertible: bool | None = None
    det_sign: int | None = None
    completely_s: bool | None = None
    chen_s: bool | None = None


def scan_axes(net: NetworkPrimitives, n: int) -> list[np.ndarray]:
    if n < 2:
        raise ValueError("scan resolution must be >= 2")
    m = net.mean_service
    return [np.linspace(0.0, 1.0 / m[k], n) for k in free_classes(net)]


def _scan_point(net: NetworkPrimitives, index, coords, mode: ScanMode) -> ScanRecord:
    try:
        delta = from_free_coords(net, coords)
    except OutOfPolytopeError:
        return ScanRecord(tuple(index), tuple(coords), False)
    refl = reflection(net, delta)
    if not refl.invertible:
        return ScanRecord(tuple(index), tuple(coords), True, False, 0,
                          False if mode is not ScanMode.CHEN else None,
                          False if mode is not ScanMode.COMPLETELY else None)
    cs = chen = None
    if mode is ScanMode.COMPLETELY:
        cs = is_completely_s(refl.R).holds
    else:
        rep = is_chen_s(refl.R, refl.theta)
        chen = rep.holds
        if mode is ScanMode.BOTH:
            cs = rep.completely_s is not None and rep.completely_s.holds
    return ScanRecord(tuple(index), tuple(coords), True, True, refl.det_sign, cs, chen)


def scan_region(net: NetworkPrimitives, n: int, mode: ScanMode | str = ScanMode.CHEN,
                workers: int = 1) -> list[ScanRecord]:
    """Evaluate an ``n``-point-per-axis grid over the free coordinates.

    Results are sorted by grid index regardless of ``workers``.
    """
    mode = ScanMode(mode)
    axes = scan_axes(net, n)
    grid = [(idx, tuple(float(axes[d][i]) for d, i in enumerate(idx)))
            for idx in itertools.product(range(n), repeat=len(axes))]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            recs = list(pool.map(lambda p: _scan_point(net, p[0], p[1], mode), grid))
    else:
        recs = [_scan_point(net, idx, c, mode) for idx, c in grid]
    recs.sort(key=lambda r: r.index)
    return recs


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def scan_csv(net: NetworkPrimitives, records: list[ScanRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(free_coord_names(net) + ["in_polytope", "invertible", "det_sign", "completely_s", "chen_s"])
    for r in records:
        w.writerow([_fmt(c) for c in r.coords]
                   + [_fmt(r.in_polytope), _fmt(r.invertible), _fmt(r.det_sign),
                      _fmt(r.completely_s), _fmt(r.chen_s)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# certificate JSON


class _Encoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.bool_):
            return bool(o)
        return super().default(o)


def _round12(obj):
    if isinstance(obj, float):
        return float(format(obj, ".12g"))
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round12(v) for v in obj]
    return obj


EXACT_KEYS = ("network", "delta")


def dumps(doc: dict) -> str:
    """JSON with derived numbers at 12 significant digits.

    Input data under ``EXACT_KEYS`` keeps full precision so that files can be
    read back without loss.
    """
    plain = json.loads(json.dumps(doc, cls=_Encoder))
    out = {k: (v if k in EXACT_KEYS else _round12(v)) for k, v in plain.items()}
    return json.dumps(out, indent=2) + "\n"


def certificate_json(cert, network: NetworkPrimitives | None = None) -> str:
    doc = cert.to_dict()
    if network is not None:
        doc["network"] = network.to_dict()
    return dumps(doc)


def write_certificate(cert, path: str | Path, network: NetworkPrimitives | None = None) -> None:
    Path(path).write_text(certificate_json(cert, network), encoding="utf-8")
