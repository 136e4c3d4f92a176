"""Command-line interface.

Exit codes: 0 success or Certified, 2 valid input with a negative verdict,
1 input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import certifier, ssc
from .matrix_classes import is_chen_s, is_completely_s
from .network import BUILDERS, NetworkFormatError, NetworkPrimitives, derive, network_from_dict, validate
from .ratio import CornerSpec, RatioError, SpecError, check_ratio, ratio_from_dict, static_priority
from .reflection import reflection
from .sim import (ConfigError, DESConfig, NoReflectionError, QRPolicy, SkorohodProblem, StaticPriority,
                  StepError, TieBreak, des_csv, fluid_csv, simulate_des, simulate_fluid,
                  simulate_skorohod, skorohod_csv)

EXIT_OK, EXIT_INPUT, EXIT_NEGATIVE = 0, 1, 2

NETWORK_SCHEMA = """network JSON schema:
  {"stations": J, "classes": K, "station_of": [K ints, 1-based],
   "mean_service": [K > 0], "routing": [[K x K, substochastic]],
   "arrival_rates": [K >= 0]}
ratio JSON schema: {"delta": [K reals]}"""


class InputError(Exception):
    pass


def fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, (bool, np.bool_)):
        return "yes" if x else "no"
    return format(float(x), ".12g")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got '{text}'") from None


def _read_json(path: str) -> dict:
    p = Path(path)
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def load_net(args) -> NetworkPrimitives:
    """Network from a file, or from ``--example`` with ``--m`` and ``--alpha``.

    Files written by ``certify`` and ``check`` embed the network under the
    key ``network`` and are accepted here as well.
    """
    if getattr(args, "example", None):
        if args.m is None or args.alpha is None:
            raise InputError("--example needs --m and --alpha")
        try:
            return BUILDERS[args.example](_floats(args.m), args.alpha)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    if not args.network:
        raise InputError("give a network JSON file or --example")
    doc = _read_json(args.network)
    source = args.network
    if isinstance(doc, dict) and "network" in doc:
        doc, source = doc["network"], f"{args.network}: network"
    try:
        return network_from_dict(doc, source)
    except NetworkFormatError as exc:
        raise InputError(f"{exc}\n{NETWORK_SCHEMA}") from None
    except ValueError as exc:
        raise InputError(f"{args.network}: {exc}") from None


def load_delta(path: str, net: NetworkPrimitives) -> np.ndarray:
    doc = _read_json(path)
    if isinstance(doc, dict) and "delta" in doc and "network" in doc:
        doc = {"delta": doc["delta"]}
    try:
        return check_ratio(net, ratio_from_dict(doc, path))
    except RatioError as exc:
        raise InputError(str(exc)) from None


def _valid_net(args) -> NetworkPrimitives:
    net = load_net(args)
    rep = validate(net)
    if not rep.ok:
        raise InputError("invalid network: " + "; ".join(rep.violations))
    return net


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="")


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    net = load_net(args)
    rep = validate(net)
    for v in rep.violations:
        print(f"violation: {v}")
    for w in rep.warnings:
        print(f"warning: {w}")
    if not rep.ok:
        return EXIT_INPUT
    d = derive(net)
    print(f"ok: J = {net.stations}, K = {net.classes}")
    print("lambda = " + ", ".join(fmt(x) for x in d.lam))
    print("rho = " + ", ".join(fmt(x) for x in d.rho))
    return EXIT_OK


def corner_rows(cert: certifier.RobustSPCertificate) -> list[list[str]]:
    rows = [["lowest", "high", "det_R", "completely_s", "chen_s"]]
    for r in cert.corner_reports:
        rows.append([r.spec.label(), r.high_label or "-", fmt(r.det_R), fmt(r.completely_s),
                     fmt(r.chen_s.holds if r.chen_s is not None else None)])
    return rows


def _print_table(rows: list[list[str]]) -> None:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())


def cmd_corners(args) -> int:
    net = _valid_net(args)
    cert = certifier.certify_sp(net)
    _print_table(corner_rows(cert))
    return EXIT_OK


def cmd_certify(args) -> int:
    net = _valid_net(args)
    try:
        cert = certifier.certify_full(net, args.ssc)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _print_table(corner_rows(cert.sp))
    print(f"sp verdict: {cert.sp.verdict.value}")
    for r in cert.sp.reasons:
        print(f"  reason: {r}")
    if cert.ssc is not None:
        s = cert.ssc
        print(f"ssc ({args.ssc}): feasible = {fmt(s.feasible)}, p* = {fmt(s.p_star)}, "
              f"alpha threshold = {fmt(s.alpha_threshold)}, alpha ok = {fmt(s.alpha_ok)}")
        for c in s.conditions:
            print(f"  condition {c.name}: {fmt(c.holds)} ({'binding' if c.binding else 'informational'})")
    print(f"verdict: {cert.verdict.value}")
    if args.out:
        certifier.write_certificate(cert, args.out, network=net)
    negative = cert.sp.verdict is certifier.Verdict.NOT_CERTIFIED or cert.verdict is certifier.Verdict.NOT_CERTIFIED
    return EXIT_NEGATIVE if negative else EXIT_OK


def cmd_check(args) -> int:
    net = _valid_net(args)
    if (args.delta is None) == (args.lowest is None):
        raise InputError("give exactly one of --delta or --lowest")
    if args.delta:
        delta = load_delta(args.delta, net)
    else:
        try:
            delta = static_priority(net, CornerSpec.parse(args.lowest))
        except (SpecError, ValueError) as exc:
            raise InputError(str(exc)) from None
    refl = reflection(net, delta)
    doc = {"network": net.to_dict(), "delta": delta.tolist(), "det_Rinv": refl.det_Rinv,
           "invertible": refl.invertible}
    print("delta = " + ", ".join(fmt(x) for x in delta))
    print(f"det(CMQ Delta) = {fmt(refl.det_Rinv)}")
    if not refl.invertible:
        print("CMQ Delta is singular: no reflection matrix")
        ok = False
    else:
        chen = is_chen_s(refl.R, refl.theta)
        cs = chen.completely_s if chen.completely_s is not None else is_completely_s(refl.R)
        print(f"det(R) = {fmt(refl.det_R)}")
        print("theta = " + ", ".join(fmt(x) for x in refl.theta))
        print(f"completely-S: {fmt(cs.holds)}")
        print(f"Chen-S: {fmt(chen.holds)} ({chen.method.value}, eps* = {fmt(chen.epsilon_star)})")
        if not chen.holds:
            print(f"  reason: {chen.reason}")
        doc.update({"R": refl.R.tolist(), "theta": refl.theta.tolist(), "completely_s": cs.holds,
                    "chen": chen.to_dict()})
        ok = chen.holds
    if args.out:
        _write(args.out, certifier.dumps(doc))
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_scan(args) -> int:
    net = _valid_net(args)
    if args.resolution < 2:
        raise InputError("--resolution must be >= 2")
    recs = certifier.scan_region(net, args.resolution, args.mode, workers=args.workers)
    _write(args.out, certifier.scan_csv(net, recs))
    inside = [r for r in recs if r.in_polytope]
    key = "completely_s" if args.mode == "completely" else "chen_s"
    good = sum(1 for r in inside if getattr(r, key))
    print(f"{len(inside)} of {len(recs)} grid points in the polytope; {good} pass {key}", file=sys.stderr)
    return EXIT_OK


def cmd_ssc(args) -> int:
    net = _valid_net(args)
    try:
        system = ssc.system_for_network(args.family, net)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.alpha is not None and not args.example:
        # with a network file, --alpha overrides its class-1 arrival rate
        system = ssc.GENERATORS[args.family](net.mean_service, args.alpha)
    rep = ssc.feasible(system)
    print(f"inequalities: {len(system.inequalities)}")
    print(f"feasible: {fmt(rep.feasible)} (p* = {fmt(rep.p_star)})")
    if rep.h_witness is not None:
        print("h = " + ", ".join(fmt(x) for x in rep.h_witness))
    print(f"alpha_1 = {fmt(system.alpha1)}, threshold = {fmt(rep.alpha_threshold)}, ok = {fmt(rep.alpha_ok)}")
    for c in rep.conditions:
        print(f"condition {c.name}: {fmt(c.holds)} ({'binding' if c.binding else 'informational'}; {c.description})")
    print(f"certified: {fmt(rep.certified)}")
    if args.out:
        _write(args.out, certifier.dumps({"family": args.family, "network": net.to_dict(), **rep.to_dict()}))
    return EXIT_OK if rep.certified else EXIT_NEGATIVE


def cmd_simulate(args) -> int:
    net = _valid_net(args)
    modes = [args.fluid, args.skorohod, args.des]
    if sum(modes) != 1:
        raise InputError("choose exactly one of --fluid, --skorohod, --des")
    try:
        if args.fluid or args.skorohod:
            if args.delta:
                delta = load_delta(args.delta, net)
            elif args.lowest:
                delta = static_priority(net, CornerSpec.parse(args.lowest))
            else:
                raise InputError("--fluid and --skorohod need --delta or --lowest")
        if args.fluid:
            z0 = np.full(net.classes, 10.0) if args.z0 is None else np.array(_floats(args.z0))
            traj = simulate_fluid(net, delta, z0, args.dt, args.t, TieBreak(args.tiebreak))
            text = fluid_csv(traj)
        elif args.skorohod:
            refl = reflection(net, delta)
            if not refl.invertible:
                raise InputError("CMQ Delta is singular: no reflection matrix")
            w0 = np.ones(net.stations) if args.w0 is None else np.array(_floats(args.w0))
            traj = simulate_skorohod(SkorohodProblem(refl.R, refl.theta, w0), args.dt, args.t)
            text = skorohod_csv(traj)
        else:
            if args.policy == "priority":
                if not args.lowest:
                    raise InputError("--policy priority needs --lowest")
                policy = StaticPriority.from_lowest(net, CornerSpec.parse(args.lowest))
            else:
                if not args.delta:
                    raise InputError("--policy qr needs --delta")
                policy = QRPolicy(load_delta(args.delta, net), args.tiebreak)
            cfg = DESConfig(seed=args.seed, horizon=args.t, max_events=args.max_events,
                            policy=policy, sample_dt=args.dt)
            text = des_csv(simulate_des(net, cfg))
    except (StepError, ConfigError, SpecError, ValueError) as exc:
        raise InputError(str(exc)) from None
    except NoReflectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    _write(args.out, text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_network(p: argparse.ArgumentParser) -> None:
    p.add_argument("network", nargs="?", help="network JSON file")
    p.add_argument("--example", choices=sorted(BUILDERS), help="use a built-in benchmark network")
    p.add_argument("--m", help="mean service times for --example, comma-separated")
    p.add_argument("--alpha", type=float, help="external arrival rate of class 1 for --example")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrstab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter,
                                     epilog=NETWORK_SCHEMA)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check network primitives and print derived loads")
    _add_network(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("corners", help="static-priority corner table")
    _add_network(p)
    p.set_defaults(func=cmd_corners)

    p = sub.add_parser("certify", help="robust certificate over all ratio matrices")
    _add_network(p)
    p.add_argument("--ssc", choices=sorted(ssc.GENERATORS), help="benchmark family for the SSC check")
    p.add_argument("--out", help="write certificate JSON here")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("check", help="report for a single ratio matrix")
    _add_network(p)
    p.add_argument("--delta", help="ratio JSON file")
    p.add_argument("--lowest", help="static-priority corner, lowest class per station (e.g. 1,5,3)")
    p.add_argument("--out", help="write report JSON here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("scan", help="grid scan of the ratio-matrix polytope")
    _add_network(p)
    p.add_argument("--resolution", type=int, default=11)
    p.add_argument("--mode", choices=[m.value for m in certifier.ScanMode], default="chen")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV output (default stdout)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("ssc", help="linear-attraction feasibility for a benchmark family")
    _add_network(p)
    p.add_argument("--family", choices=sorted(ssc.GENERATORS), required=True)
    p.add_argument("--out", help="write report JSON here")
    p.set_defaults(func=cmd_ssc)

    p = sub.add_parser("simulate", help="fluid, Skorohod or discrete-event trajectory")
    _add_network(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--fluid", action="store_true")
    g.add_argument("--skorohod", action="store_true")
    g.add_argument("--des", action="store_true")
    p.add_argument("--delta", help="ratio JSON file")
    p.add_argument("--policy", choices=["qr", "priority"], default="qr")
    p.add_argument("--lowest", help="lowest class per station: the static-priority corner")
    p.add_argument("--tiebreak", choices=[t.value for t in TieBreak], default="lowest")
    p.add_argument("--t", type=float, required=True, help="time horizon")
    p.add_argument("--dt", type=float, required=True, help="step (fluid, Skorohod) or sampling interval (DES)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-events", type=int)
    p.add_argument("--z0", help="initial fluid levels (default 10 per class)")
    p.add_argument("--w0", help="initial workload (default 1 per station)")
    p.add_argument("--out", help="CSV output (default stdout)")
    p.set_defaults(func=cmd_simulate)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
