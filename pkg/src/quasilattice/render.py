"""
Export and drawing of point patterns.

This module provides tools for:
- Forward-iterated approximations of the attractor in an internal plane
- CSV and JSON export of patterns, and loading them back
- SVG documents of physical space and of the window (internal) space
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import settings
from .errors import BudgetExceeded, IoError, ParseError, ValidationError
from .ifs import ConjugateIfs, IfsSpec, compute_bounds, conjugate_ifs
from .pipeline import PatternSet, PointRecord
from .ring import embed_many

logger = logging.getLogger(__name__)

CSV = "csv"
JSON = "json"
FORMATS = (CSV, JSON)

LAYERS = frozenset({"points", "core_highlight", "cyclic_highlight", "window_points", "attractor"})

# radius in physical units, fill colour
PALETTE = (
    (0.05, "#9e9e9e"),
    (0.07, "#1f77b4"),
    (0.09, "#2ca02c"),
    (0.12, "#d62728"),
)


@dataclass(frozen=True)
class Viewport:
    """Axis-aligned box xmin < x1 < xmax, ymin < x2 < ymax."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValidationError(f"Viewport {self.as_tuple()} is empty")

    @classmethod
    def from_radius(cls, radius: float) -> "Viewport":
        return cls(-radius, radius, -radius, radius)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.xmin, self.xmax, self.ymin, self.ymax)

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        return (
            (points[:, 0] > self.xmin)
            & (points[:, 0] < self.xmax)
            & (points[:, 1] > self.ymin)
            & (points[:, 1] < self.ymax)
        )


def default_decoration(m: int) -> Dict[int, Tuple[float, str]]:
    """
    Four classes of predecessor counts: {1, 2}, {3}, {4, ..., m-1} and {m}.

    A count of 0 (seeds that are never reached again) shares the first class.
    """
    decoration = {}
    for value in range(0, m + 1):
        if value == m:
            decoration[value] = PALETTE[3]
        elif value <= 2:
            decoration[value] = PALETTE[0]
        elif value == 3:
            decoration[value] = PALETTE[1]
        else:
            decoration[value] = PALETTE[2]
    return decoration


@dataclass(frozen=True)
class RenderSpec:
    """
    What to draw and how.

    Attributes:
        viewport: Physical-space box
        decoration: Predecessor count -> (radius, colour); default per :func:`default_decoration`
        layers: Subset of ``LAYERS``
        scale: Pixels per unit length
        max_cloud_points: Attractor points drawn at most (evenly subsampled)
    """

    viewport: Viewport
    decoration: Optional[Dict[int, Tuple[float, str]]] = None
    layers: FrozenSet[str] = frozenset({"points", "cyclic_highlight"})
    scale: float = 40.0
    max_cloud_points: int = 20000

    def __post_init__(self):
        unknown = set(self.layers) - LAYERS
        if unknown:
            raise ValidationError(f"Unknown layers {sorted(unknown)}; choose from {sorted(LAYERS)}")
        if self.scale <= 0:
            raise ValidationError(f"scale must be positive, got {self.scale}")

    def decoration_for(self, m: int) -> Dict[int, Tuple[float, str]]:
        decoration = self.decoration or default_decoration(m)
        missing = [value for value in range(1, m + 1) if value not in decoration]
        if missing:
            raise ValidationError(f"Decoration has no entry for predecessor counts {missing}")
        return decoration


@dataclass(frozen=True)
class AttractorCloud:
    """Points of depth-fold compositions of the contracting maps applied to the seeds."""

    plane: Optional[int]
    depth: int
    points: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.points)

    def as_xy(self) -> np.ndarray:
        return np.column_stack([self.points.real, self.points.imag])


def attractor_approx(
    conj: ConjugateIfs,
    depth: Optional[int] = None,
    seeds: Optional[Sequence[complex]] = None,
    *,
    budget: int = settings.ATTRACTOR_BUDGET,
) -> AttractorCloud:
    """
    Approximate the attractor A = ∪ g'_k(A) by forward iteration.

    Level l+1 is the union of g'_k applied to level l, so every level is an
    exact image of the previous one.

    Args:
        conj: Contracting system of one internal plane
        depth: Number of iterations; defaults to the largest value up to
            ``DEFAULT_DEPTH`` that fits in the budget
        seeds: Start points, defaulting to the fixed points of the g'_k
        budget: Maximum number of cloud points

    Raises:
        ValidationError: If depth is negative
        BudgetExceeded: If len(seeds) * m^depth exceeds ``budget``

    Example:
        >>> cloud = attractor_approx(conjugate_ifs(pentagonal_ifs), depth=4)  # doctest: +SKIP
        >>> len(cloud)                                                        # doctest: +SKIP
        3125
    """
    start = np.array(conj.fixed_point_values() if seeds is None else list(seeds), dtype=complex)
    m = conj.m
    if depth is None:
        depth = settings.DEFAULT_DEPTH
        while depth > 0 and len(start) * m**depth > budget:
            depth -= 1
    if depth < 0:
        raise ValidationError(f"depth must be non-negative, got {depth}")
    total = len(start) * m**depth
    if total > budget:
        raise BudgetExceeded(f"Attractor cloud needs {total} points at depth {depth}; budget is {budget}")

    translations = np.array(conj.translation_values, dtype=complex)
    cloud = start
    for _ in range(depth):
        cloud = (conj.beta_value * cloud[np.newaxis, :] + translations[:, np.newaxis]).ravel()
    logger.debug("Attractor cloud of %d points at depth %d", len(cloud), depth)
    return AttractorCloud(plane=conj.plane, depth=depth, points=cloud)


def _columns(d: int, planes: int) -> List[str]:
    header = [f"c{i}" for i in range(d)] + ["x1", "x2"]
    for j in range(planes):
        header += [f"u{j}_1", f"u{j}_2"]
    return header + ["pred_count", "is_cyclic", "is_core"]


def _metadata(pattern: PatternSet) -> Dict[str, object]:
    return {
        "field": str(pattern.ifs.field),
        "beta": str(pattern.ifs.beta),
        "translations": [str(z) for z in pattern.ifs.translations],
        "rho": pattern.rho,
        "seed_mode": pattern.seed_mode,
        "seeds": [str(s) for s in pattern.seeds],
    }


def _read_metadata(lines: Sequence[str]) -> Tuple[Dict[str, object], int]:
    meta = {}
    count = 0
    for count, line in enumerate(lines):
        if not line.startswith("#"):
            break
        key, sep, value = line[1:].partition("=")
        if not sep:
            raise ParseError("Expected '# key=value' metadata", count + 1)
        try:
            meta[key.strip()] = json.loads(value)
        except json.JSONDecodeError as exc:
            raise ParseError(f"Metadata {key.strip()!r}: {exc.msg}", count + 1) from exc
    else:
        count = len(lines)
    return meta, count


def _internal_positions(pattern: PatternSet) -> np.ndarray:
    field_spec = pattern.ifs.field
    coords = pattern.coordinate_array()
    planes = [embed_many(coords, field_spec, j) for j in range(field_spec.embeddings.plane_count)]
    if not planes:
        return np.zeros((len(coords), 0), dtype=complex)
    return np.column_stack(planes)


def export_points(pattern: PatternSet, fmt: str = CSV) -> bytes:
    """
    Serialise a pattern, one record per point in lexicographic coordinate order.

    Each record has the d integer coordinates, the physical position, the
    position in every internal plane, the predecessor count and both flags.
    CSV output starts with one ``# key=<json>`` line per metadata entry
    (field, beta, translations, rho, seed_mode, seeds) before the header row.

    Args:
        pattern: A built pattern
        fmt: ``"csv"`` or ``"json"``

    Returns:
        UTF-8 encoded document

    Raises:
        ValidationError: For an unknown format
    """
    if fmt not in FORMATS:
        raise ValidationError(f"Unknown format {fmt!r}; use one of {FORMATS}")
    records = pattern.records()
    internal = _internal_positions(pattern)
    d = pattern.ifs.field.degree
    planes = pattern.ifs.field.embeddings.plane_count

    if fmt == CSV:
        buffer = io.StringIO()
        for key, value in _metadata(pattern).items():
            buffer.write(f"# {key}={json.dumps(value)}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(_columns(d, planes))
        for record, row in zip(records, internal):
            values = [str(c) for c in record.key] + [repr(record.phys[0]), repr(record.phys[1])]
            for u in row:
                values += [repr(float(u.real)), repr(float(u.imag))]
            values += [str(record.pred_count), str(record.is_cyclic).lower(), str(record.is_core).lower()]
            writer.writerow(values)
        return buffer.getvalue().encode("utf-8")

    document = {
        "meta": {**_metadata(pattern), "count": len(records)},
        "points": [
            {
                "coords": list(record.key),
                "phys": list(record.phys),
                "internal": [[float(u.real), float(u.imag)] for u in row],
                "pred_count": record.pred_count,
                "is_cyclic": record.is_cyclic,
                "is_core": record.is_core,
            }
            for record, row in zip(records, internal)
        ],
    }
    return (json.dumps(document, indent=1) + "\n").encode("utf-8")


def _parse_flag(text: str, line: int) -> bool:
    if text not in ("true", "false"):
        raise ParseError(f"Expected true or false, got {text!r}", line)
    return text == "true"


def _restore(
    meta: Dict[str, object], ifs: Optional[IfsSpec], rho: Optional[float]
) -> Tuple[IfsSpec, Optional[float], str, Tuple]:
    from .config import ifs_from_texts, parse_ring_expression

    if ifs is None:
        if "field" not in meta:
            raise ValidationError("Loading points without metadata needs the IFS")
        ifs = ifs_from_texts(meta["field"], meta["beta"], meta["translations"])
    if rho is None:
        rho = meta.get("rho")
    seed_mode = meta.get("seed_mode", "all_cycles")
    seeds = tuple(parse_ring_expression(s, ifs.field) for s in meta.get("seeds") or ())
    return ifs, rho, seed_mode, seeds


def load_points(
    data: Union[bytes, str],
    fmt: str = CSV,
    ifs: Optional[IfsSpec] = None,
    rho: Optional[float] = None,
) -> PatternSet:
    """
    Rebuild a pattern from :func:`export_points` output.

    Args:
        data: Exported document
        fmt: ``"csv"`` or ``"json"``
        ifs: The IFS of the pattern; rebuilt from the document metadata when
            omitted
        rho: Cutoff radius; taken from the metadata, else the largest modulus

    Raises:
        ParseError: If the document is malformed
        ValidationError: If ``ifs`` is omitted and the document has no metadata
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    if fmt == CSV:
        lines = text.splitlines()
        meta, skipped = _read_metadata(lines)
        ifs, rho, seed_mode, seeds = _restore(meta, ifs, rho)
        rows = list(csv.reader(lines[skipped:]))
        if not rows:
            raise ParseError("Empty document", skipped + 1)
        d = ifs.field.degree
        expected = _columns(d, ifs.field.embeddings.plane_count)
        if rows[0] != expected:
            raise ParseError(f"Unexpected header {rows[0]}", skipped + 1)
        points = {}
        for line, row in enumerate(rows[1:], start=skipped + 2):
            if len(row) != len(expected):
                raise ParseError(f"Expected {len(expected)} fields, got {len(row)}", line)
            try:
                key = tuple(int(v) for v in row[:d])
                phys = (float(row[d]), float(row[d + 1]))
                pred = int(row[-3])
            except ValueError as exc:
                raise ParseError(str(exc), line) from exc
            points[key] = PointRecord(
                ifs.field.element(key), phys, pred, _parse_flag(row[-1], line), _parse_flag(row[-2], line)
            )
    elif fmt == JSON:
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
        ifs, rho, seed_mode, seeds = _restore(document.get("meta", {}), ifs, rho)
        points = {}
        for entry in document.get("points", []):
            key = tuple(int(v) for v in entry["coords"])
            points[key] = PointRecord(
                ifs.field.element(key),
                (float(entry["phys"][0]), float(entry["phys"][1])),
                int(entry["pred_count"]),
                bool(entry["is_core"]),
                bool(entry["is_cyclic"]),
            )
    else:
        raise ValidationError(f"Unknown format {fmt!r}; use one of {FORMATS}")

    if rho is None:
        rho = max((math.hypot(*record.phys) for record in points.values()), default=0.0)
    return PatternSet(ifs=ifs, rho=rho, seed_mode=seed_mode, seeds=seeds, points=points)


def write_points(pattern: PatternSet, path: Union[str, Path], fmt: Optional[str] = None) -> Path:
    """
    Write :func:`export_points` output to ``path``; the format defaults to the suffix.

    Raises:
        IoError: If the file cannot be written
    """
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower() or CSV
    payload = export_points(pattern, fmt)
    try:
        path.write_bytes(payload)
    except OSError as exc:
        raise IoError(f"Cannot write {path}: {exc}") from exc
    logger.info("Wrote %d points to %s", len(pattern), path)
    return path


class SvgDocument:
    """
    Minimal SVG 1.1 builder with a fixed user-space box and a flipped y axis.

    Coordinates are written with three decimals.
    """

    def __init__(self, viewport: Viewport, scale: float):
        self.viewport = viewport
        self.scale = scale
        self.commands: List[str] = []

    @property
    def width(self) -> float:
        return (self.viewport.xmax - self.viewport.xmin) * self.scale

    @property
    def height(self) -> float:
        return (self.viewport.ymax - self.viewport.ymin) * self.scale

    def _xy(self, x: float, y: float) -> Tuple[float, float]:
        return (x - self.viewport.xmin) * self.scale, (self.viewport.ymax - y) * self.scale

    def circle(self, x: float, y: float, radius: float, fill: str = "#000000",
               stroke: Optional[str] = None, stroke_width: float = 1.0) -> None:
        cx, cy = self._xy(x, y)
        style = f'fill="{fill}"'
        if stroke:
            style += f' stroke="{stroke}" stroke-width="{stroke_width:.3f}"'
        self.commands.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="{radius * self.scale:.3f}" {style}/>')

    def comment(self, text: str) -> None:
        self.commands.append(f"<!-- {text.replace('--', '- -')} -->")

    def group(self, name: str) -> None:
        self.commands.append(f'<g id="{name}">')

    def end_group(self) -> None:
        self.commands.append("</g>")

    def render(self) -> str:
        head = (
            '<?xml version="1.0" standalone="no"?>\n'
            '<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" '
            '"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">\n'
            f'<svg width="{self.width:.3f}" height="{self.height:.3f}" '
            f'viewBox="0 0 {self.width:.3f} {self.height:.3f}" version="1.1" '
            'xmlns="http://www.w3.org/2000/svg">\n'
            f'<rect x="0" y="0" width="{self.width:.3f}" height="{self.height:.3f}" fill="#ffffff"/>\n'
        )
        return head + "".join(command + "\n" for command in self.commands) + "</svg>\n"


def render_svg(
    pattern: PatternSet,
    spec: RenderSpec,
    plane: Optional[int] = None,
    cloud: Optional[AttractorCloud] = None,
) -> str:
    """
    Draw a pattern as an SVG document.

    With ``plane=None`` the points are drawn in physical space inside the
    viewport, sized and coloured by predecessor count. With an internal plane
    index the window view is drawn instead: the attractor cloud (layer
    ``attractor``) under the internal-plane images of all points (layer
    ``window_points``), framed by the ball of radius c_j.

    Returns:
        SVG 1.1 text
    """
    m = pattern.ifs.m
    decoration = spec.decoration_for(m)
    records = pattern.records()
    caption = f"{pattern.ifs.field} beta={pattern.ifs.beta} m={m} rho={pattern.rho:g} points={len(records)}"

    if plane is None:
        document = SvgDocument(spec.viewport, spec.scale)
        document.comment(caption)
        positions = pattern.physical_array()
    else:
        limit = compute_bounds(pattern.ifs).c_planes[plane] * 1.05
        document = SvgDocument(Viewport.from_radius(limit), spec.scale)
        document.comment(f"internal plane {plane}: {caption}")
        values = embed_many(pattern.coordinate_array(), pattern.ifs.field, plane)
        positions = np.column_stack([values.real, values.imag]).reshape(-1, 2)
        if "attractor" in spec.layers:
            cloud = cloud or attractor_approx(conjugate_ifs(pattern.ifs, plane))
            xy = cloud.as_xy()
            stride = max(1, math.ceil(len(xy) / spec.max_cloud_points))
            document.group("attractor")
            for x, y in xy[::stride]:
                document.circle(x, y, 0.01, fill="#d0d0d0")
            document.end_group()

    inside = document.viewport.contains(positions)
    draw_points = "points" in spec.layers if plane is None else "window_points" in spec.layers
    if draw_points:
        document.group("points")
        for record, (x, y), shown in zip(records, positions, inside):
            if not shown:
                continue
            radius, colour = decoration.get(record.pred_count, decoration[1])
            document.circle(x, y, radius, fill=colour)
        document.end_group()

    if plane is None:
        for layer, flag, colour in (
            ("core_highlight", "is_core", "#ff9800"),
            ("cyclic_highlight", "is_cyclic", "#000000"),
        ):
            if layer not in spec.layers:
                continue
            document.group(layer)
            for record, (x, y), shown in zip(records, positions, inside):
                if shown and getattr(record, flag):
                    radius = decoration.get(record.pred_count, decoration[1])[0] * 1.6
                    document.circle(x, y, radius, fill="none", stroke=colour, stroke_width=1.0)
            document.end_group()

    logger.info("Rendered %d of %d points", int(np.count_nonzero(inside)), len(records))
    return document.render()


def write_svg(text: str, path: Union[str, Path]) -> Path:
    """Write an SVG document; raises IoError on failure."""
    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"Cannot write {path}: {exc}") from exc
    return path


__all__ = [
    "CSV",
    "JSON",
    "FORMATS",
    "LAYERS",
    "Viewport",
    "RenderSpec",
    "AttractorCloud",
    "default_decoration",
    "attractor_approx",
    "export_points",
    "load_points",
    "write_points",
    "SvgDocument",
    "render_svg",
    "write_svg",
]
