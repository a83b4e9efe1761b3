"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 an internal cross-check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import cells, mesh, morse, verify
from .kinematics import canonical_configuration
from .model import ConsistencyError, SpiderError, SpiderParams, critical_radius

EXIT_OK, EXIT_INVALID, EXIT_CROSSCHECK = 0, 2, 3

MORSE_COLUMNS = ("kind", "index", "body_x", "body_y", "psi", "det_hessian", "signs")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _radius_text(text: str) -> str:
    if text.strip().lower() == "rn":
        return "Rn"
    try:
        float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'Rn', got {text!r}") from None
    return text


def resolve_radius(text: str, n: int) -> float:
    """``Rn`` means the critical radius of ``n`` exactly; anything else is a float."""
    return critical_radius(n) if text == "Rn" else float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spiderspace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text, **extra):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--n", type=int, required=True, help="number of arms (>= 2)")
        p.add_argument("--r", type=_radius_text, required=True,
                       help="anchor radius, or 'Rn' for the critical radius")
        p.add_argument("--out", type=Path, help="write the output here instead of stdout")
        for flag, kwargs in extra.items():
            p.add_argument(f"--{flag.replace('_', '-')}", **kwargs)
        return p

    add("classify", "topological type and its cross-checks (JSON)")
    add("cells", "cell counts, Euler characteristic and genus",
        format=dict(choices=("json", "csv"), default="json"))
    add("morse", "critical points of the body height",
        format=dict(choices=("csv", "json"), default="csv"))
    add("rank", "Jacobian rank scan at random configurations (JSON)",
        samples=dict(type=int, default=1000), seed=dict(type=int, default=0),
        threads=dict(type=int, default=1))
    add("path", "constructive path to the canonical configuration (JSON)",
        start_seed=dict(type=int, default=None, help="random start; default is the canonical one"))
    add("mesh", "closed triangulated surface (OBJ/OFF) and its Euler characteristic",
        resolution=dict(type=int, default=8), format=dict(choices=("obj", "off"), default="obj"))
    return parser


def _json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _classify(params, args) -> str:
    report = verify.classify_topology(params).to_dict()
    return _json({k: v for k, v in report.items() if v is not None})


def _cells(params, args) -> str:
    cx = cells.build_complex(params)
    row = dict(regime=params.regime.tag.value, n=params.n, R=params.R, **cx.counts(),
               chi=cells.euler_characteristic(cx), genus=cells.genus_formula(params))
    if args.format == "json":
        return _json(row)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
    w.writeheader()
    w.writerow(row)
    return buf.getvalue()


def morse_rows(params: SpiderParams) -> list[dict]:
    rows = []
    for cp in morse.enumerate_critical_points(params):
        rows.append({
            "kind": cp.kind.value,
            "index": cp.morse_index,
            "body_x": cp.body[0],
            "body_y": cp.body[1],
            "psi": cp.psi,
            "det_hessian": float(np.linalg.det(cp.hessian_closed)),
            "signs": str(cp.signs),
        })
    return rows


def _morse(params, args) -> str:
    rows = morse_rows(params)
    if args.format == "json":
        c = morse.morse_counts(params)
        return _json({"n": params.n, "R": params.R, "counts": {"index0": c[0], "index1": c[1], "index2": c[2]},
                      "chi": c[0] - c[1] + c[2], "critical_points": rows})
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=MORSE_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _rank(params, args) -> str:
    report = verify.rank_scan(params, args.samples, args.seed, threads=args.threads)
    return _json(dict(n=params.n, R=params.R, seed=args.seed, **report.to_dict()))


def _path(params, args) -> str:
    if args.start_seed is None:
        start = canonical_configuration(params)
    else:
        start = verify.random_configuration(params, np.random.default_rng((args.start_seed,)))
    plan = verify.connect_path(params, start)
    check = verify.check_plan(plan)
    if not check:
        raise ConsistencyError(f"path plan failed its checks: {check}")
    out = plan.to_dict()
    out["start_seed"] = args.start_seed
    out["start_body"] = [float(v) for v in start.body]
    return _json(out)


def _mesh(params, args) -> str:
    m = mesh.build_mesh(params, args.resolution)
    chi = mesh.euler_characteristic(m)
    report = mesh.check_orientation(m)
    chi_cells = cells.euler_characteristic(cells.build_complex(params))
    if chi != chi_cells or not report or not report.matches_rule:
        raise ConsistencyError(f"mesh chi {chi} vs cells {chi_cells}, orientation {bool(report)}")
    summary = {"n": params.n, "R": params.R, "resolution": args.resolution,
               "vertices": m.n_verts, "edges": int(len(m.edges())), "triangles": m.n_tris,
               "chi": chi, "chi_cells": chi_cells, "orientable": report.orientable,
               "orientation_matches_rule": report.matches_rule}
    if args.out is not None:
        writer = mesh.export_off if args.format == "off" else mesh.export_obj
        writer(m, args.out)
        summary["file"] = str(args.out)
    return _json(summary)


COMMANDS = {"classify": _classify, "cells": _cells, "morse": _morse,
            "rank": _rank, "path": _path, "mesh": _mesh}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    try:
        params = SpiderParams(args.n, resolve_radius(args.r, args.n))
        text = COMMANDS[args.command](params, args)
    except ConsistencyError as exc:
        print(f"cross-check failed: {exc}", file=stderr)
        return EXIT_CROSSCHECK
    except SpiderError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INVALID
    if args.out is not None and args.command != "mesh":
        args.out.write_text(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
