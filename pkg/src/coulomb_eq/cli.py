"""Command-line front end.

Subcommands: ``solve`` (critical-point census as JSON), ``bifurcate``
(branch diagram and boundary curves as CSV), ``inverse`` (stabilizing
charges as JSON) and ``verify`` (built-in verification suites).

Artifacts are byte-deterministic for identical flags: fixed sort
orders, shortest round-trip float formatting, no timestamps.  Every
file written to disk gets a ``<name>.manifest.json`` sibling recording
the command, settings, input hash, tool version and wall time (the
manifest is the only place timing lives, so artifacts stay
reproducible).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__, bifurcation, inverse as inverse_mod, verify as verify_mod
from .morse import euler_count_check
from .potentials import PotentialSpec
from .solver import (
    CriticalPoint,
    PolygonSpace,
    SolveSettings,
    Space,
    TorusSpace,
    find_critical_points,
)
from .spaces import ChargeVector, deserialize_config, serialize_config


class CliError(Exception):
    """Invalid command-line input (exit code 2)."""


def parse_space(text: str) -> Space:
    kind, _, rest = text.partition(":")
    if kind == "polygon":
        try:
            return PolygonSpace(int(rest))
        except ValueError as exc:
            raise CliError(f"bad polygon space {text!r}: {exc}") from exc
    if kind == "torus":
        parts = rest.split(",")
        if len(parts) != 3:
            raise CliError("torus space needs three radii, e.g. torus:1,2,3")
        try:
            return TorusSpace(tuple(float(p) for p in parts))
        except ValueError as exc:
            raise CliError(f"bad torus space {text!r}: {exc}") from exc
    raise CliError(f"unknown space {text!r}; use polygon:N or torus:r1,r2,r3")


def parse_charges(text: str, expected: int) -> ChargeVector:
    try:
        vals = [float(p) for p in text.split(",")]
        charges = ChargeVector.of(vals)
    except ValueError as exc:
        raise CliError(f"bad charges {text!r}: {exc}") from exc
    if len(charges) != expected:
        raise CliError(f"expected {expected} charges, got {len(charges)}")
    return charges


def parse_potential(text: str) -> PotentialSpec:
    try:
        return PotentialSpec.parse(text)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def parse_range(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise CliError(f"bad range {text!r}; use LO:HI")
    lo, hi = (float(p) for p in parts)
    if not lo < hi:
        raise CliError("range must satisfy LO < HI")
    return lo, hi


def default_threads() -> int:
    env = os.environ.get("COULOMB_EQ_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def json_text(payload) -> str:
    return json.dumps(payload, indent=2, allow_nan=False, sort_keys=False) + "\n"


def write_artifact(path: Path, text: str, manifest: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    manifest_path = path.with_name(path.name + ".manifest.json")
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def build_manifest(command: str, params: dict, started: float) -> dict:
    canonical = json.dumps(params, sort_keys=True)
    return {
        "command": command,
        "parameters": params,
        "input_hash": hashlib.sha256(canonical.encode()).hexdigest(),
        "tool_version": __version__,
        "wall_time_s": round(time.monotonic() - started, 3),
    }


def settings_from_args(args: argparse.Namespace) -> SolveSettings:
    try:
        return SolveSettings(
            grid_density=args.grid_density,
            newton_tol=args.newton_tol,
            max_iters=args.max_iters,
            dedup_tol=args.dedup_tol,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _add_solve_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--grid-density", type=int, default=24,
                     help="multistart seeds per chart dimension (default 24)")
    sub.add_argument("--newton-tol", type=float, default=1e-11,
                     help="gradient norm accepted as stationary")
    sub.add_argument("--max-iters", type=int, default=100)
    sub.add_argument("--dedup-tol", type=float, default=1e-7)
    sub.add_argument("--threads", type=int, default=None,
                     help="seed-polish parallelism; never affects output bytes "
                          "(default: COULOMB_EQ_THREADS or logical cores)")


def point_record(cp: CriticalPoint, index_of: dict[int, int | None]) -> dict:
    return {
        "coords": serialize_config(cp.config),
        "energy": cp.energy,
        "grad_norm": cp.grad_norm,
        "eigenvalues": list(cp.hessian_eigenvalues),
        "index": cp.morse_index,
        "aligned": cp.aligned,
        "degenerate": cp.degenerate,
        "partner": index_of[id(cp)],
    }


def solve_payload(space: Space, charges: ChargeVector, spec: PotentialSpec,
                  points: list[CriticalPoint]) -> dict:
    from .solver import configs_match
    from .spaces import apply_involution

    index_of: dict[int, int | None] = {}
    for i, cp in enumerate(points):
        partner = None
        if cp.symmetry_partner is not None:
            mirror = apply_involution(cp.config)
            for j, other in enumerate(points):
                if j != i and configs_match(mirror, other.config):
                    partner = j
                    break
        index_of[id(cp)] = partner
    summary = euler_count_check(points, space)
    payload = {
        "space": space.name,
        "charges": [float(v) for v in charges.q],
        "potential": spec.label,
        "points": [point_record(cp, index_of) for cp in points],
        "summary": {
            "counts": {str(k): v for k, v in sorted(summary.counts.items())},
            "poles_count": summary.poles_count,
            "euler_check": summary.euler_check,
            "exactness": summary.exactness,
            "reason": summary.reason,
        },
    }
    if isinstance(space, PolygonSpace) and space.n >= 4:
        payload["coverage_note"] = (
            "multistart coverage is heuristic for polygons beyond three "
            "vertices; raise --grid-density to push the search harder")
    return payload


def cmd_solve(args: argparse.Namespace) -> int:
    started = time.monotonic()
    space = parse_space(args.space)
    expected = space.n if isinstance(space, PolygonSpace) else 3
    charges = parse_charges(args.charges, expected)
    spec = parse_potential(args.potential)
    settings = settings_from_args(args)
    threads = args.threads or default_threads()
    points = find_critical_points(space, charges, spec, settings, threads=threads)
    payload = solve_payload(space, charges, spec, points)
    text = json_text(payload)
    if args.out:
        manifest = build_manifest("solve", {
            "space": args.space, "charges": args.charges,
            "potential": args.potential,
            "settings": asdict(settings),
        }, started)
        write_artifact(Path(args.out), text, manifest)
    else:
        sys.stdout.write(text)
    if payload["summary"]["euler_check"] == "failed":
        return 3
    return 0


def branch_csv(diagram: bifurcation.BranchDiagram) -> str:
    lines = ["lambda,q1,q2,q3,branch,amplitude,stability,energy"]
    for p in diagram.points:
        q1, q2, q3 = p.control
        lines.append(f"{p.lam!r},{q1!r},{q2!r},{q3!r},{p.branch},"
                     f"{p.amplitude!r},{p.stability},{p.energy!r}")
    return "\n".join(lines) + "\n"


def curves_csv(curves: list[bifurcation.BifurcationCurve]) -> str:
    lines = ["label,q1,q2,q3"]
    for curve in curves:
        for s in curve.samples:
            q1, q2, q3 = s.charges
            lines.append(f"{curve.label},{q1!r},{q2!r},{q3!r}")
    return "\n".join(lines) + "\n"


def cmd_bifurcate(args: argparse.Namespace) -> int:
    started = time.monotonic()
    space = parse_space(args.space)
    expected = space.n if isinstance(space, PolygonSpace) else 3
    charges = parse_charges(args.charges, expected)
    spec = parse_potential(args.potential)
    if not 1 <= args.sweep <= expected:
        raise CliError(f"--sweep must pick one of the {expected} charges (1-based)")
    lam_range = parse_range(args.range)
    path = bifurcation.charge_sweep_path(list(charges.q), args.sweep - 1)
    try:
        diagram = bifurcation.trace_pitchfork(space, path, lam_range,
                                              steps=args.steps, spec=spec)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if isinstance(space, PolygonSpace):
        curves = bifurcation.polygon_bifurcation_set(args.resolution)
    else:
        curves = bifurcation.torus_bifurcation_set(space.radii, args.resolution)
    outdir = Path(args.outdir)
    params = {
        "space": args.space, "charges": args.charges, "potential": args.potential,
        "sweep": args.sweep, "range": args.range, "steps": args.steps,
        "resolution": args.resolution,
    }
    write_artifact(outdir / "branches.csv", branch_csv(diagram),
                   build_manifest("bifurcate", params, started))
    write_artifact(outdir / "curves.csv", curves_csv(curves),
                   build_manifest("bifurcate", params, started))
    branches_json = {
        "space": diagram.space,
        "threshold": diagram.threshold,
        "branch_side": diagram.branch_side,
        "points": [{
            "lambda": p.lam, "control": list(p.control), "branch": p.branch,
            "amplitude": p.amplitude, "stability": p.stability,
            "energy": p.energy,
        } for p in diagram.points],
    }
    curves_json = {
        "curves": [{"label": c.label,
                    "samples": [list(s.charges) for s in c.samples]}
                   for c in curves],
    }
    write_artifact(outdir / "branches.json", json_text(branches_json),
                   build_manifest("bifurcate", params, started))
    write_artifact(outdir / "curves.json", json_text(curves_json),
                   build_manifest("bifurcate", params, started))
    print(f"threshold: {diagram.threshold!r}")
    try:
        exponent = bifurcation.fit_branch_exponent(diagram)
        print(f"amplitude exponent fit: {exponent!r}")
    except ValueError as exc:
        print(f"amplitude exponent fit: unavailable ({exc})")
    print(f"wrote branches.csv/json and curves.csv/json under {outdir}")
    return 0


def cmd_inverse(args: argparse.Namespace) -> int:
    started = time.monotonic()
    if bool(args.sides) == bool(args.points):
        raise CliError("provide exactly one of --sides or --points")
    if args.sides:
        try:
            sides = [float(p) for p in args.sides.split(",")]
        except ValueError as exc:
            raise CliError(f"bad sides {args.sides!r}") from exc
        if len(sides) != 3:
            raise CliError("--sides needs three lengths l1,l2,l3")
        try:
            result = inverse_mod.stabilizing_charges_triangle(*sides)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
        params = {"sides": args.sides}
    else:
        try:
            data = json.loads(Path(args.points).read_text(encoding="utf-8"))
            config, _ = deserialize_config(data)
        except (OSError, ValueError, KeyError) as exc:
            raise CliError(f"cannot read configuration file: {exc}") from exc
        from .spaces import TorusConfig
        if isinstance(config, TorusConfig):
            result = inverse_mod.stabilizing_charges_torus(config)
        else:
            if config.n != 3:
                raise CliError("inverse problem is solved for three charges only")
            from .spaces import pairwise_distances
            d = pairwise_distances(config)
            result = inverse_mod.stabilizing_charges_triangle(
                d[1, 2], d[0, 2], d[0, 1])
        params = {"points": str(args.points)}
    payload = {
        "kind": result.kind,
        "charges": list(result.charges.q) if result.charges else None,
        "family": None if result.family is None else {
            "outer": list(result.family.outer),
            "intermediate_limit": result.family.intermediate_limit,
        },
        "residual": result.residual,
        "notes": result.notes,
    }
    text = json_text(payload)
    if args.out:
        write_artifact(Path(args.out), text, build_manifest("inverse", params, started))
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    started = time.monotonic()
    report = verify_mod.run_suite(args.suite)
    text = json_text(report)
    if args.out:
        write_artifact(Path(args.out), text,
                       build_manifest("verify", {"suite": args.suite}, started))
    else:
        sys.stdout.write(text)
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coulomb-eq",
        description="Equilibria of point charges on fixed-perimeter polygons "
                    "and concentric-circle triples.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    solve = subs.add_parser("solve", help="find and classify all equilibria")
    solve.add_argument("--space", required=True,
                       help="polygon:N or torus:r1,r2,r3")
    solve.add_argument("--charges", required=True, help="comma-separated charges")
    solve.add_argument("--potential", default="coulomb",
                       help="coulomb | power:K | log")
    _add_solve_flags(solve)
    solve.add_argument("--out", default=None, help="write JSON here instead of stdout")
    solve.set_defaults(func=cmd_solve)

    bif = subs.add_parser("bifurcate",
                          help="trace a pitchfork along a one-charge sweep")
    bif.add_argument("--space", required=True)
    bif.add_argument("--charges", required=True,
                     help="base charges; the swept one is replaced by the parameter")
    bif.add_argument("--potential", default="coulomb")
    bif.add_argument("--sweep", type=int, required=True,
                     help="1-based index of the swept charge")
    bif.add_argument("--range", required=True, help="parameter range LO:HI")
    bif.add_argument("--steps", type=int, default=40)
    bif.add_argument("--resolution", type=int, default=200,
                     help="samples per boundary curve")
    bif.add_argument("--outdir", default="out", help="directory for CSV artifacts")
    bif.set_defaults(func=cmd_bifurcate)

    inv = subs.add_parser("inverse", help="charges stabilizing a configuration")
    inv.add_argument("--sides", default=None,
                     help="triangle side lengths l1,l2,l3 (each opposite its vertex)")
    inv.add_argument("--points", default=None,
                     help="JSON file with a serialized configuration")
    inv.add_argument("--out", default=None)
    inv.set_defaults(func=cmd_inverse)

    ver = subs.add_parser("verify", help="run the built-in verification suite")
    ver.add_argument("--suite", choices=("quick", "full"), default="quick")
    ver.add_argument("--out", default=None)
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
