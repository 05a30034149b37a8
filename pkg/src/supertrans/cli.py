"""Command-line front end: ``supertrans <command> --scene FILE [options]``.

Every run prints one JSON report on stdout.  Exit codes: 0 success or true
verdict, 1 false verdict, 2 invalid input, 3 oracle disagreement.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__, grassmann, symcore
from .calculus import classify, jacobian, rank_pair, tangent_matrix
from .errors import (
    InputError,
    NonTransversalError,
    OracleDisagreementError,
    SceneError,
    SuperTransError,
)
from .geometry import SuperDomain, SuperMorphism
from .preimage import PreimageResult, codim_check, construct_preimage_affine
from .scene import Scene, parse_point, parse_scene
from .transversality import TransversalityReport, check_transversal

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_ORACLE = 0, 1, 2, 3
COMMANDS = ("check-morphism", "jacobian", "classify", "transversal", "preimage")


def _num(x):
    return symcore.format_number(x)


def _point(p) -> dict:
    return {k: _num(v) for k, v in (p.items() if isinstance(p, dict) else p)}


def _matrix(m) -> list:
    return [[_num(x) for x in row] for row in m]


def _morphism(m: SuperMorphism) -> dict:
    return m.describe()


def _domain(d: SuperDomain) -> dict:
    out = {"name": d.name, "dim": str(d.dim), "even": list(d.even), "odd": list(d.odd)}
    if d.box is not None:
        out["box"] = [[_num(lo), _num(hi)] for lo, hi in d.box]
    return out


# point sources -------------------------------------------------------------


def _points_for(scene: Scene, args, X: SuperDomain, required: bool = True) -> list[dict] | None:
    given = [a for a in ("at", "points", "grid") if getattr(args, a, None)]
    if len(given) > 1:
        raise InputError(f"give only one of --at, --points, --grid (got {', '.join(given)})")
    if not given:
        if required:
            raise InputError("this command needs --at, --points or --grid")
        return None
    if args.at:
        coords = [parse_point(args.at)]
    elif args.points:
        coords = list(scene.lookup("points", args.points))
    else:
        dom, grid = scene.lookup("grid", args.grid)
        if dom != X.name:
            raise SceneError(f"grid {args.grid} lives on {dom}, the morphism starts at {X.name}")
        return [p for p in grid.points(X.even) if X.contains(p)]
    for c in coords:
        if len(c) != len(X.even):
            raise InputError(f"point ({', '.join(map(str, c))}) has {len(c)} coordinates, {X.name} has {len(X.even)} even ones")
    return [X.point(c) for c in coords]


def _grid_or_points(scene: Scene, args, X: SuperDomain) -> dict:
    if args.at:
        raise InputError("use --points or --grid for fiber checks")
    if args.grid:
        dom, grid = scene.lookup("grid", args.grid)
        if dom != X.name:
            raise SceneError(f"grid {args.grid} lives on {dom}, the morphism starts at {X.name}")
        return {"grid": grid}
    if args.points:
        return {"points": _points_for(scene, args, X)}
    return {}


# commands ----------------------------------------------------------------


def _cmd_check_morphism(scene: Scene, args):
    names = [args.morphism] if args.morphism else list(scene.morphisms)
    morphisms = []
    for name in names:
        m = scene.lookup("morphism", name)
        coords = m.target.even + m.target.odd
        morphisms.append(
            {
                "name": name,
                "source": m.source.name,
                "target": m.target.name,
                "dims": f"{m.source.dim} -> {m.target.dim}",
                "images": _morphism(m),
                "parities": {c: grassmann.parity(f).value for c, f in zip(coords, m.images)},
            }
        )
    subs = [
        {
            "name": name,
            "ambient": W.ambient.name,
            "dim": "{}|{}".format(*W.dim),
            "codim": "{}|{}".format(*W.codim),
            "charts": len(W.charts),
            "inverses_verified": sum(c.inverse is not None for c in W.charts),
        }
        for name, W in scene.submanifolds.items()
    ]
    return {"valid": True, "morphisms": morphisms, "submanifolds": subs}, EXIT_OK


def _cmd_jacobian(scene: Scene, args):
    m = scene.lookup("morphism", args.morphism)
    jac = jacobian(m)
    result = {
        "morphism": args.morphism,
        "blocks": {k: [[str(e) for e in row] for row in block] for k, block in jac.blocks().items()},
    }
    pts = _points_for(scene, args, m.source, required=False)
    if pts is not None:
        rows = []
        for p in pts:
            tm = tangent_matrix(m, p, jac)
            re_, ro = rank_pair(tm)
            rows.append(
                {
                    "point": _point(tm.basepoint),
                    "even_block": _matrix(tm.even_block),
                    "odd_block": _matrix(tm.odd_block),
                    "ranks": {"even": re_, "odd": ro},
                }
            )
        result["tangent"] = rows
    return result, EXIT_OK


def _cmd_classify(scene: Scene, args):
    m = scene.lookup("morphism", args.morphism)
    jac = jacobian(m)
    rows = []
    ok = True
    for p in _points_for(scene, args, m.source):
        tm = tangent_matrix(m, p, jac)
        re_, ro = rank_pair(tm)
        verdict = classify(m, p, jac)
        if args.expect and verdict.value != args.expect:
            ok = False
        rows.append({"point": _point(tm.basepoint), "ranks": {"even": re_, "odd": ro}, "classification": verdict.value})
    result = {"morphism": args.morphism, "points": rows}
    if args.expect:
        result["expect"] = args.expect
        result["matches_expectation"] = ok
    return result, EXIT_OK if ok else EXIT_FALSE


def _transversality(report: TransversalityReport) -> dict:
    return {
        "mode": report.mode,
        "overall": report.transversal,
        "agreement": report.agreement,
        "fiber_size": report.fiber_size,
        "points": [
            {
                "coords": _point(r.point),
                "chart": r.chart,
                "ranks_even": r.ranks_even,
                "ranks_odd": r.ranks_odd,
                "verdict": r.verdict,
                "criterion_agreement": r.verdict == r.projection_verdict,
                "projection_ranks": {"even": r.projection_ranks[0], "odd": r.projection_ranks[1]},
            }
            for r in report.records
        ],
    }


def _cmd_transversal(scene: Scene, args):
    m = scene.lookup("morphism", args.morphism)
    W = scene.lookup("submanifold", args.submanifold)
    source = _grid_or_points(scene, args, m.source)
    if not source:
        raise InputError("transversal needs --grid or --points")
    report = check_transversal(m, W, tol=args.tolerance, **source)
    result = {"morphism": args.morphism, "submanifold": args.submanifold, **_transversality(report)}
    if not report.agreement:
        return result, EXIT_ORACLE
    return result, EXIT_OK if report.transversal else EXIT_FALSE


def _preimage(result: PreimageResult) -> dict:
    out = {
        "affine": result.affine,
        "codim": "{}|{}".format(*result.codim),
        "fallback_reason": result.fallback_reason,
        "submersions": [
            {
                "chart": ds.chart_index,
                "Psi": _morphism(ds.Psi),
                "v_box": None if ds.v_box is None else [[_num(lo), _num(hi)] for lo, hi in ds.v_box],
                "v_empty": ds.v_empty,
                "fiber_points": [_point(p) for p in ds.fiber_points],
            }
            for ds in result.submersions
        ],
        "submersion_evidence": [
            {
                "chart": ev.chart_index,
                "passed": ev.passed,
                "witness": None if ev.witness is None else _point(ev.witness),
                "records": [
                    {"point": _point(p), "ranks": {"even": r[0], "odd": r[1]}, "classification": c.value}
                    for p, r, c in ev.records
                ],
            }
            for ev in result.submersion_evidence
        ],
        "transversality": None if result.transversality is None else _transversality(result.transversality),
    }
    if result.charts is not None:
        out["codim_check"] = codim_check(result, result.W)
        out["charts"] = [
            {
                "chart": pc.chart_index,
                "domain": _domain(pc.domain),
                "solved_even": list(pc.solved_even),
                "solved_odd": list(pc.solved_odd),
                "equations": pc.equations(),
                "j": _morphism(pc.j),
                "psi_hat": _morphism(pc.psi_hat),
                "level_set_exact": pc.level_set_exact,
                "diagram_commutes": pc.diagram_commutes,
            }
            for pc in result.charts
        ]
    return out


def _cmd_preimage(scene: Scene, args):
    m = scene.lookup("morphism", args.morphism)
    W = scene.lookup("submanifold", args.submanifold)
    source = _grid_or_points(scene, args, m.source)
    result = construct_preimage_affine(m, W, tol=args.tolerance, **source)
    out = {"morphism": args.morphism, "submanifold": args.submanifold, **_preimage(result)}
    if result.charts is not None:
        checks = [pc.level_set_exact and pc.diagram_commutes for pc in result.charts] + [out["codim_check"]]
        if not all(checks):
            return out, EXIT_ORACLE
    return out, EXIT_OK


_HANDLERS = {
    "check-morphism": _cmd_check_morphism,
    "jacobian": _cmd_jacobian,
    "classify": _cmd_classify,
    "transversal": _cmd_transversal,
    "preimage": _cmd_preimage,
}

_REQUIRED = {
    "jacobian": ("morphism",),
    "classify": ("morphism",),
    "transversal": ("morphism", "submanifold"),
    "preimage": ("morphism", "submanifold"),
}


# driver ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scene", required=True, metavar="FILE", help="scene file")
    common.add_argument("--morphism", metavar="NAME")
    common.add_argument("--submanifold", metavar="NAME")
    common.add_argument("--grid", metavar="NAME", help="grid declared in the scene")
    common.add_argument("--points", metavar="NAME", help="point list declared in the scene")
    common.add_argument("--at", metavar="POINT", help='a single point, e.g. "(1, -1/2)"')
    common.add_argument("--expect", choices=["Immersion", "Submersion", "Both", "Neither"])
    common.add_argument("--json", metavar="PATH", help="also write the report to PATH")
    common.add_argument("--tolerance", type=float, default=symcore.NUMERIC_TOL)

    parser = argparse.ArgumentParser(prog="supertrans", description="Super transversality toolkit.")
    parser.add_argument("--version", action="version", version=f"supertrans {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _echo(args) -> dict:
    keys = ("scene", "morphism", "submanifold", "grid", "points", "at", "expect", "tolerance")
    return {k: getattr(args, k) for k in keys if getattr(args, k) is not None}


def run_command(scene_text: str, args) -> tuple[dict, int]:
    """Parse ``scene_text`` and dispatch ``args.command``; returns (report, exit code)."""
    report = {
        "tool": "supertrans",
        "version": __version__,
        "command": args.command,
        "args": _echo(args),
        "input_digest": "sha256:" + hashlib.sha256(scene_text.encode()).hexdigest(),
        "result": None,
        "diagnostics": [],
    }
    try:
        for key in _REQUIRED.get(args.command, ()):
            if not getattr(args, key):
                raise InputError(f"{args.command} needs --{key}")
        scene = parse_scene(scene_text)
        result, code = _HANDLERS[args.command](scene, args)
        report["result"] = result
        if code == EXIT_ORACLE:
            report["diagnostics"].append({"kind": "oracle-disagreement", "message": "independent checks disagree"})
    except NonTransversalError as exc:
        report["diagnostics"].append({"kind": "not-transversal", "message": str(exc)})
        code = EXIT_FALSE
    except OracleDisagreementError as exc:
        report["diagnostics"].append({"kind": "oracle-disagreement", "message": str(exc)})
        code = EXIT_ORACLE
    except (InputError, SuperTransError) as exc:
        report["diagnostics"].append({"kind": "input-error", "error": type(exc).__name__, "message": str(exc)})
        code = EXIT_INPUT
    report["exit_code"] = code
    return report, code


def render(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, Fraction):
        return str(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.scene).read_text()
    except OSError as exc:
        print(f"supertrans: cannot read scene: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT
    report, code = run_command(text, args)
    out = render(report)
    sys.stdout.write(out)
    if args.json:
        Path(args.json).write_text(out)
    for d in report["diagnostics"]:
        print(f"supertrans: {d['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
