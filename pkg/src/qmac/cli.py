"""Command-line front end.

    qmac entropy --state FILE --subsystem A
    qmac example-qubit-flip --p 0.1 --what qq-corners
    qmac example-erasure-mac --p-grid 0:0.5:0.05
    qmac region --builtin qubit-flip --p 0.1 --characterization pent
    qmac additivity --p-grid 0.05:0.45:0.05
    qmac validate-channel --channel FILE

Results go to stdout as JSON (default) or CSV; diagnostics go to stderr.
Exit status: 0 success, 1 computation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

import numpy as np

from . import channel as chn
from .entropic import binary_entropy, entropy
from .errors import QmacError
from .optimize import OptimizerConfig, additivity_experiment, sweep_frontier
from .region import RegionCloud, cq_pentagon, cq_rectangle, pent_corners, qq_pentagon, region_to_dict
from .state import Ensemble, PureState, basis_state, load_state, maximally_entangled

log = logging.getLogger("qmac")


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` inclusive of ``stop`` (within 1e-12), or a comma list."""
    if ":" not in text:
        return [float(v) for v in text.split(",") if v.strip()]
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid {text!r} is not start:stop:step")
    start, stop, step = (float(v) for v in parts)
    if step <= 0:
        raise ValueError("grid step must be positive")
    n = int(math.floor((stop - start) / step + 1e-12)) + 1
    out = [round(start + i * step, 12) for i in range(max(n, 0))]
    if out and abs(out[-1] - stop) <= 1e-12:
        out[-1] = stop
    return out


def _round(obj):
    if isinstance(obj, (float, np.floating)):
        v = float(f"{float(obj):.12g}")
        return 0.0 if v == 0 else v
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    return obj


def dumps(obj) -> str:
    return json.dumps(_round(obj), indent=1) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.12g}" if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def emit_region(cloud: RegionCloud, fmt: str = "json") -> bytes:
    """Serialize a region: stable field order, 12 significant digits."""
    if fmt == "json":
        return dumps(region_to_dict(cloud)).encode()
    rows = [("point",) + tuple(p) for p in cloud.points]
    if len(cloud.axes) == 2:
        rows += [("hull",) + tuple(p) for p in cloud.hull2d]
    return _csv(("set",) + tuple(cloud.axes), rows).encode()


# --------------------------------------------------------------------------- commands


def _bell():
    return maximally_entangled(2, ("R", "in"))


def _qubit_ensembles():
    plus = PureState([("in", 2)], np.array([1, 1]) / math.sqrt(2))
    minus = PureState([("in", 2)], np.array([1, -1]) / math.sqrt(2))
    zero, one = basis_state([("in", 2)], 0), basis_state([("in", 2)], 1)
    return Ensemble([0.5, 0.5], [plus, minus]), Ensemble([0.5, 0.5], [zero, one])


def cmd_entropy(args):
    s = load_state(args.state)
    labels = [v for v in args.subsystem.split(",") if v] if args.subsystem else list(s.labels)
    h = entropy(s, labels)
    if args.format == "csv":
        return _csv(("subsystem", "entropy"), [(",".join(labels), h)])
    return dumps({"subsystem": labels, "entropy": h})


def cmd_qubit_flip(args):
    ch = chn.collective_qubit_flip(args.p)
    out = {"channel": ch.name, "p": args.p, "two_minus_h": 2 - binary_entropy(args.p)}
    rows = []
    if args.what in ("qq-corners", "all"):
        b = qq_pentagon(ch, 1, _bell(), _bell())
        out["qq"] = {"a_max": b.a_max, "b_max": b.b_max, "sum_max": b.sum_max,
                     "corners": pent_corners(b.a_max, b.b_max, b.sum_max)}
        rows.append(("qq_pentagon", b.a_max, b.b_max, b.sum_max))
    if args.what in ("cq-corners", "all"):
        w1, w2 = _qubit_ensembles()
        cq = {}
        for name, ens in (("omega1", w1), ("omega2", w2)):
            r = cq_rectangle(ch, 1, ens, _bell())
            pent = cq_pentagon(ch, 1, ens, _bell())
            cq[name] = {"rectangle": [r.r_max, r.q_max],
                        "pentagon": [pent.a_max, pent.b_max, pent.sum_max],
                        "pentagon_corner": pent.provenance["corner"]}
            rows.append((f"{name}_rectangle", r.r_max, r.q_max, ""))
            rows.append((f"{name}_pentagon", pent.a_max, pent.b_max, pent.sum_max))
        out["cq"] = cq
    if args.format == "csv":
        return _csv(("bound", "x_max", "y_max", "sum_max"), rows)
    return dumps(out)


def cmd_erasure(args):
    ch = chn.erasure_mac()
    zero, one = basis_state([("in", 2)], 0), basis_state([("in", 2)], 1)
    rows = []
    for p in args.p_grid:
        b = cq_rectangle(ch, 1, Ensemble([1 - p, p], [zero, one]), _bell())
        rows.append((p, b.r_max, b.q_max))
    if args.format == "csv":
        return _csv(("p", "R", "Q"), rows)
    return dumps({"channel": ch.name, "rows": [{"p": p, "R": r, "Q": q} for p, r, q in rows]})


def _config(args) -> OptimizerConfig:
    return OptimizerConfig(restarts=args.restarts, seed=args.seed)


def _load_mac(args):
    if args.channel:
        return chn.load_channel(args.channel)
    if args.builtin == "erasure-mac":
        return chn.erasure_mac()
    return chn.collective_qubit_flip(args.p)


def cmd_region(args):
    ch = _load_mac(args)
    cloud = sweep_frontier(ch, args.k, args.characterization, args.directions, _config(args),
                           family=args.family)
    if args.channel:
        cloud = RegionCloud(k=cloud.k, axes=cloud.axes, points=cloud.points,
                            generators=cloud.generators, channel=args.channel)
    return emit_region(cloud, args.format).decode()


def cmd_additivity(args):
    entries = additivity_experiment(args.p_grid, _config(args), direction_count=args.directions)
    if args.format == "csv":
        return _csv(("p", "rect_gap", "pent_gap"), [(e.p, e.rect_gap, e.pent_gap) for e in entries])
    return dumps([e.to_dict() for e in entries])


def cmd_validate(args):
    ch = chn.load_channel(args.channel)
    out = {"valid": True, "in_factors": [list(f) for f in ch.in_layout.factors],
           "out_factors": [list(f) for f in ch.out_layout.factors],
           "kraus_count": len(ch.kraus), "completeness_residual": ch.completeness_residual()}
    if args.format == "csv":
        return _csv(("valid", "kraus_count", "completeness_residual"),
                    [("true", len(ch.kraus), out["completeness_residual"])])
    return dumps(out)


# --------------------------------------------------------------------------- parser


def _probability(text):
    p = float(text)
    if not 0 <= p <= 1:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return p


def _grid(text):
    try:
        values = parse_grid(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not values or any(not 0 <= v <= 1 for v in values):
        raise argparse.ArgumentTypeError(f"grid {text!r} must hold probabilities")
    return values


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--seed", type=int, default=0)
    search.add_argument("--restarts", type=_positive, default=20)
    search.add_argument("--directions", type=_positive, default=33)

    parser = argparse.ArgumentParser(prog="qmac", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", parents=[common], help="von Neumann entropy of a state file")
    p.add_argument("--state", required=True)
    p.add_argument("--subsystem", default="", help="comma-separated labels (default: all)")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("example-qubit-flip", parents=[common],
                       help="corner points of the collective qubit-flip channel")
    p.add_argument("--p", type=_probability, required=True)
    p.add_argument("--what", choices=("qq-corners", "cq-corners", "all"), default="all")
    p.set_defaults(func=cmd_qubit_flip)

    p = sub.add_parser("example-erasure-mac", parents=[common],
                       help="(R, Q) rectangle corners of the erasure MAC")
    p.add_argument("--p-grid", type=_grid, default=_grid("0:0.5:0.05"))
    p.set_defaults(func=cmd_erasure)

    p = sub.add_parser("region", parents=[common, search], help="sweep a region frontier")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--channel", help="channel JSON file (two input factors: Alice, Bob)")
    src.add_argument("--builtin", choices=("qubit-flip", "erasure-mac"))
    p.add_argument("--p", type=_probability, default=None)
    p.add_argument("--k", type=int, choices=(1, 2), default=1)
    p.add_argument("--family", choices=("qq", "cq"), default="qq")
    p.add_argument("--characterization", choices=("rect", "pent"), default="pent")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("additivity", parents=[common, search],
                       help="k=1 vs k=2 gaps of the rectangle and pentagon regions")
    p.add_argument("--p-grid", type=_grid, default=_grid("0.05:0.45:0.05"))
    p.set_defaults(func=cmd_additivity, directions=9)

    p = sub.add_parser("validate-channel", parents=[common], help="load and check a channel file")
    p.add_argument("--channel", required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def _validate(parser, args):
    if args.command == "region":
        if not args.channel and not args.builtin:
            parser.error("region needs --channel FILE or --builtin NAME")
        if args.builtin == "qubit-flip" and args.p is None:
            parser.error("--builtin qubit-flip needs --p")
        if args.p is not None and args.builtin != "qubit-flip":
            parser.error("--p only applies to --builtin qubit-flip")


def run(argv=None, stdout=None) -> int:
    """Execute one command; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(parser, args)
    except SystemExit as exc:   # argparse reports usage errors (and --help) this way
        return exc.code if isinstance(exc.code, int) else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    stdout = stdout or sys.stdout
    try:
        text = args.func(args)
    except (QmacError, OSError) as exc:
        print(f"qmac {args.command}: {exc}", file=sys.stderr)
        return 1
    stdout.write(text)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
