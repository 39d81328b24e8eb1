"""
Command-line front end.

Usage::

    quasilattice build --preset pentagonal-basic --rho 30 --out pentagonal
    quasilattice analyze --preset pentagonal-basic
    quasilattice render --preset hmv-decagonal --rho 12 --out hmv
    quasilattice presets --emit coherent-decagonal
    quasilattice verify --preset pentagonal-basic --radius 6

Every subcommand prints one JSON document on stdout (``presets --emit``
prints configuration text). Errors are reported on stderr as
``{"error": ..., "exit_code": ..., "message": ...}`` and the process exits
with the error's code.
"""

import argparse
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from . import __version__
from .analysis import (
    check_neighbor_law,
    core_accounting,
    covering_radius,
    cyclic_components,
    decoration_stats,
    interior_radius,
    ring_census,
)
from .config import COMPACT, SEEDS, JobConfig, emit_config, parse_config, parse_set_expression
from .errors import IoError, ParseError, QuasilatticeError
from .ifs import conjugate_ifs
from .pipeline import CoreResult, PatternSet, build_model_set, compute_core, verify_oracle
from .presets import load_preset, preset_names
from .render import FORMATS, RenderSpec, Viewport, attractor_approx, render_svg, write_points, write_svg

logger = logging.getLogger(__name__)


def _job_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--preset", dest="preset", help="Built-in job name (see the presets subcommand)")
    source.add_argument("--config", dest="config", type=Path, help="Job file (key=value or YAML)")
    parser.add_argument("--rho", dest="rho", type=float, help="Cutoff radius of the pattern")
    parser.add_argument("--N", dest="N", type=int, help="Override the lattice coordinate range")
    parser.add_argument("--window", dest="window", choices=(COMPACT, SEEDS), help="Window variant")
    parser.add_argument("--seeds", dest="seeds", help="Seed list, e.g. '0, z^1+z^4' or '{0}+roots_of_unity(5)'")
    parser.add_argument("--out", dest="out", help="Output file stem")
    parser.add_argument("--format", dest="format", choices=FORMATS, help="Points file format")
    parser.add_argument("--budget", dest="budget", type=int, help="Maximum candidate lattice size")
    parser.add_argument("--max-points", dest="max_points", type=int, help="Maximum pattern size")
    parser.add_argument("--strict", dest="strict", action="store_true", help="Check seeds with the membership oracle")
    return parser


def _logging_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("-v", "--verbose", dest="verbose", action="count", default=0,
                        help="-v for progress, -vv for debug output")
    parser.add_argument("--log-file", dest="log_file", help="Write log records to this file")
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasilattice",
        description="Self-similar cut-and-project model sets from Pisot-unit iterated function systems.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)
    job, log = _job_options(), _logging_options()

    commands.add_parser("build", parents=[job, log], help="Build a pattern and write its points file")

    analyze = commands.add_parser("analyze", parents=[job, log], help="Cycle, decoration and neighbour-law report")
    analyze.add_argument("--covering", dest="covering", action="store_true",
                         help="Also sample the covering radius")

    render = commands.add_parser("render", parents=[job, log], help="Draw the pattern and its windows as SVG")
    render.add_argument("--view", dest="view", help="Physical viewport xmin,xmax,ymin,ymax")
    render.add_argument("--depth", dest="depth", type=int, help="Attractor iteration depth")
    render.add_argument("--scale", dest="scale", type=float, default=40.0, help="Pixels per unit length")

    presets = commands.add_parser("presets", parents=[log], help="List built-in jobs or print one")
    presets.add_argument("--emit", dest="emit", metavar="NAME", help="Print the canonical configuration of NAME")

    verify = commands.add_parser("verify", parents=[job, log], help="Cross-check the membership oracle")
    verify.add_argument("--radius", dest="radius", type=float, default=8.0,
                        help="Physical radius of the checked lattice points")
    verify.add_argument("--stride", dest="stride", type=int, default=1, help="Check every STRIDE-th point")
    return parser


def configure_logging(verbose: int = 0, log_file: Optional[str] = None) -> None:
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(
        filename=log_file,
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _parse_view(text: str) -> tuple:
    parts = text.split(",")
    try:
        values = tuple(float(part) for part in parts)
    except ValueError:
        raise ParseError(f"view must be four numbers xmin,xmax,ymin,ymax, got {text!r}") from None
    if len(values) != 4:
        raise ParseError(f"view must be four numbers xmin,xmax,ymin,ymax, got {text!r}")
    return values


def load_job(args: argparse.Namespace) -> JobConfig:
    """JobConfig from --preset or --config, with the remaining flags applied on top."""
    if args.preset:
        job = load_preset(args.preset)
    elif args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise IoError(f"Cannot read {args.config}: {exc}") from exc
        job = parse_config(text)
    else:
        raise ParseError("A job needs --preset NAME or --config PATH")

    overrides: Dict[str, Any] = {}
    for name in ("rho", "N", "window", "out", "format", "budget", "max_points"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "seeds", None):
        text = args.seeds
        if "{" not in text and "roots_of_unity" not in text:
            text = "{" + text + "}"
        overrides["seeds"] = tuple(parse_set_expression(text, job.field))
    if getattr(args, "view", None):
        overrides["view"] = _parse_view(args.view)
    if getattr(args, "depth", None) is not None:
        overrides["depth"] = args.depth
    if overrides:
        logger.debug("Overriding %s", ", ".join(sorted(overrides)))
        job = dataclasses.replace(job, **overrides)
    return job


def _finite(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def _core_summary(core: CoreResult) -> Dict[str, Any]:
    return {
        "N": core.N,
        "lattice_size": core.lattice_size,
        "F0": len(core.F0),
        "F1": len(core.F1),
        "c": core.bounds.c,
        "c_planes": list(core.bounds.c_planes),
    }


def _build(job: JobConfig, strict: bool = False) -> PatternSet:
    return build_model_set(
        job.ifs,
        job.rho,
        job.window,
        job.seeds,
        N=job.N,
        strict=strict,
        radius_factor=job.core_radius_factor,
        budget=job.budget,
        max_points=job.max_points,
    )


def cmd_build(args: argparse.Namespace) -> Dict[str, Any]:
    job = load_job(args)
    pattern = _build(job, args.strict)
    summary = {
        "name": job.name,
        "field": str(job.field),
        "m": job.ifs.m,
        "window": job.window,
        "rho": job.rho,
        "size": len(pattern),
        "out": None,
    }
    summary.update(_core_summary(pattern.core))
    if job.out:
        path = write_points(pattern, f"{job.out}.{job.format}", job.format)
        summary["out"] = str(path)
    return summary


def cmd_analyze(args: argparse.Namespace) -> Dict[str, Any]:
    job = load_job(args)
    pattern = _build(job, args.strict)
    core = pattern.core
    report = cyclic_components(core.F1, job.ifs)
    accounting = core_accounting(core.F1, job.ifs, report)
    stats = decoration_stats(pattern)
    violations = check_neighbor_law(pattern, stats)

    result = {
        "name": job.name,
        "size": len(pattern),
        "cyclic_components": report.component_sizes,
        "fixed_points": [{"map": k, "point": str(x)} for k, x in report.fixed_points],
        "core_accounting": dataclasses.asdict(accounting),
        "histogram": {str(k): v for k, v in sorted(stats.histogram.items())},
        "min_distance": _finite(stats.min_distance),
        "class_min_distances": {str(k): _finite(v) for k, v in sorted(stats.class_min_distances.items())},
        "interior_radius": interior_radius(pattern),
        "neighbor_law": {
            "holds": not violations,
            "violations": len(violations),
            "examples": [
                {
                    "point": str(v.elem),
                    "pred_count": v.pred_count,
                    "neighbors": v.neighbor_count,
                    "neighbor_maps": v.neighbor_maps,
                    "allowed": v.allowed,
                }
                for v in violations[:5]
            ],
        },
    }
    result.update(_core_summary(core))
    if math.isfinite(stats.min_distance):
        ring = stats.min_distance * job.ifs.expansion
        result["ring_census"] = {
            "radius": ring,
            "counts": {str(k): v for k, v in ring_census(pattern, ring).items()},
        }
    if args.covering:
        result["covering_radius"] = _finite(covering_radius(pattern))
    return result


def cmd_render(args: argparse.Namespace) -> Dict[str, Any]:
    job = load_job(args)
    pattern = _build(job, args.strict)
    viewport = Viewport(*job.view) if job.view else Viewport.from_radius(job.rho)
    spec = RenderSpec(
        viewport=viewport,
        layers=frozenset({"points", "cyclic_highlight", "window_points", "attractor"}),
        scale=args.scale,
    )
    stem = job.out or job.name
    written = [str(write_svg(render_svg(pattern, spec), f"{stem}.svg"))]

    planes = job.field.embeddings.plane_count
    for plane in range(planes):
        cloud = attractor_approx(conjugate_ifs(job.ifs, plane), job.depth)
        suffix = "-window" if planes == 1 else f"-window{plane}"
        text = render_svg(pattern, spec, plane=plane, cloud=cloud)
        written.append(str(write_svg(text, f"{stem}{suffix}.svg")))
    return {"name": job.name, "size": len(pattern), "files": written}


def cmd_presets(args: argparse.Namespace) -> Optional[Dict[str, Any]]:
    if args.emit:
        sys.stdout.write(emit_config(load_preset(args.emit)))
        return None
    return {"presets": preset_names()}


def cmd_verify(args: argparse.Namespace) -> Dict[str, Any]:
    job = load_job(args)
    core = compute_core(job.ifs, N=job.N, radius_factor=job.core_radius_factor, budget=job.budget)
    check = verify_oracle(job.ifs, args.radius, core=core, stride=args.stride, max_points=job.max_points)
    return {
        "name": job.name,
        "radius": check.radius,
        "checked": check.checked,
        "members": check.members,
        "mismatches": [str(x) for x in check.mismatches],
        "ok": check.ok,
    }


COMMANDS = {
    "build": cmd_build,
    "analyze": cmd_analyze,
    "render": cmd_render,
    "presets": cmd_presets,
    "verify": cmd_verify,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.log_file)
    try:
        result = COMMANDS[args.command](args)
    except QuasilatticeError as exc:
        logger.debug("%s failed", args.command, exc_info=True)
        error = {"error": type(exc).__name__, "exit_code": exc.exit_code, "message": str(exc)}
        print(json.dumps(error), file=sys.stderr)
        return exc.exit_code
    if result is not None:
        print(json.dumps(result, indent=2))
    if args.command == "verify" and not result["ok"]:
        return 1
    return 0


__all__ = ["build_parser", "configure_logging", "load_job", "main", "COMMANDS"]


if __name__ == "__main__":
    raise SystemExit(main())
