"""
Structural diagnostics of cores and patterns.

This module provides tools for:
- Cyclic components of the successor graph and the fixed points of the maps
- Decoration statistics: predecessor histogram and minimal distances
- The neighbour-distance law for points with many predecessors
- Empirical covering radius and neighbour-ring census
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .ifs import IfsSpec, apply_map, compute_bounds, fixed_point, preimages, successor_graph
from .ring import RingElement, embed
from .settings import RADIUS_TOLERANCE
from .utils import SpatialGrid, reachable, strongly_connected_components

if TYPE_CHECKING:
    from .pipeline import PatternSet

logger = logging.getLogger(__name__)

Key = Tuple[int, ...]


@dataclass(frozen=True)
class CycleReport:
    """
    Cyclic part of a pruned core.

    Attributes:
        components: Strongly connected components containing a cycle, each
            sorted by coordinates, ordered by their smallest key
        fixed_points: Pairs (k, x) with g_k(x) = x
    """

    components: Tuple[Tuple[RingElement, ...], ...]
    fixed_points: Tuple[Tuple[int, RingElement], ...] = ()

    @property
    def component_sizes(self) -> List[int]:
        return [len(component) for component in self.components]

    @property
    def members(self) -> FrozenSet[Key]:
        return frozenset(x.coords for component in self.components for x in component)

    def __contains__(self, x: RingElement) -> bool:
        return x.coords in self.members


@dataclass(frozen=True)
class CoreAccounting:
    """Split of F1 into cyclic points, their forward images and the rest."""

    cyclic: int
    images: int
    unreachable: int


@dataclass(frozen=True)
class DecorationStats:
    """
    Decoration summary of a pattern.

    Attributes:
        histogram: Number of points per predecessor count
        min_distance: Minimal pairwise distance delta (inf below two points)
        class_min_distances: Per predecessor count, the smallest
            nearest-neighbour distance among points of that class
    """

    histogram: Dict[int, int]
    min_distance: float
    class_min_distances: Dict[int, float] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return sum(self.histogram.values())


@dataclass(frozen=True)
class NeighborLawViolation:
    """
    An interior point breaking the neighbour-distance law.

    Attributes:
        elem: The point y
        pred_count: Recorded predecessor count of y
        neighbor_count: Points strictly closer than delta*|beta| to y
        neighbor_maps: Distinct maps k with g_k^-1(x) in the pattern over those neighbours x
        allowed: m - pred_count
        nearest_distance: Distance to the closest neighbour
    """

    elem: RingElement
    pred_count: int
    neighbor_count: int
    neighbor_maps: int
    allowed: int
    nearest_distance: float


def cyclic_components(F1: Sequence[RingElement], ifs: IfsSpec) -> CycleReport:
    """
    Strongly connected components of x -> g_k(x) on F1 that contain a cycle.

    Components of size one count only when they carry a self-loop, that is,
    a fixed point.

    Example:
        >>> report = cyclic_components(core.F1, pentagonal_ifs)  # doctest: +SKIP
        >>> sorted(report.component_sizes)                       # doctest: +SKIP
        [10, 26]
    """
    graph = successor_graph(F1, ifs)
    elements = {x.coords: x for x in F1}
    components = []
    for component in strongly_connected_components(graph):
        if len(component) > 1 or component[0] in graph[component[0]]:
            components.append(tuple(elements[key] for key in sorted(component)))
    components.sort(key=lambda members: members[0].coords)

    fixed = []
    for k in range(ifs.m):
        point = fixed_point(ifs, k)
        if point is not None and apply_map(ifs, k, point) == point:
            fixed.append((k, point))

    report = CycleReport(components=tuple(components), fixed_points=tuple(fixed))
    logger.info("Cyclic components: %s", report.component_sizes)
    return report


def core_accounting(
    F1: Sequence[RingElement], ifs: IfsSpec, report: Optional[CycleReport] = None
) -> CoreAccounting:
    """
    Count F1 points on cycles, points reached from them by forward maps, and the rest.

    In a correctly pruned core ``unreachable`` is zero.
    """
    report = report or cyclic_components(F1, ifs)
    graph = successor_graph(F1, ifs)
    cyclic = report.members
    reached = reachable(graph, cyclic)
    return CoreAccounting(
        cyclic=len(cyclic),
        images=len(reached - cyclic),
        unreachable=len(F1) - len(reached),
    )


def min_distance(pattern: PatternSet) -> float:
    """Minimal pairwise distance, recomputed from the exact difference of the closest pair."""
    return decoration_stats(pattern).min_distance


def decoration_stats(pattern: PatternSet) -> DecorationStats:
    """
    Predecessor histogram and minimal distances of a pattern.

    The closest pair is located with a spatial grid; its distance is then
    re-evaluated as |embed(x - y)| on the exact difference.
    """
    records = pattern.records()
    counts = Counter(record.pred_count for record in records)
    histogram = {value: counts.get(value, 0) for value in range(1, pattern.ifs.m + 1)}
    for value, total in counts.items():
        histogram.setdefault(value, total)

    if len(records) < 2:
        return DecorationStats(histogram=histogram, min_distance=math.inf)

    grid = SpatialGrid.for_points(pattern.physical_array())
    nearest = [grid.nearest(i) for i in range(len(records))]
    distances = np.array([distance for _, distance in nearest])
    winner = int(np.argmin(distances))
    partner = nearest[winner][0]
    delta = abs(embed(records[winner].elem - records[partner].elem))

    classes: Dict[int, float] = {}
    for record, distance in zip(records, distances):
        value = record.pred_count
        classes[value] = min(classes.get(value, math.inf), float(distance))
    return DecorationStats(histogram=histogram, min_distance=delta, class_min_distances=classes)


def interior_radius(pattern: PatternSet) -> float:
    """Radius inside which predecessor counts are exact: rho - (c + max|z_k|)."""
    margin = compute_bounds(pattern.ifs).c + pattern.ifs.max_translation
    return pattern.rho - margin


def check_neighbor_law(
    pattern: PatternSet, stats: Optional[DecorationStats] = None
) -> List[NeighborLawViolation]:
    """
    Check the neighbour-distance law on interior points.

    Two points closer than delta*|beta| never share a predecessor map, since
    their preimages under that map would be closer than delta. So a point y
    with m - j predecessors leaves only j maps to all of its close neighbours
    together, and a point with m predecessors has no neighbour closer than
    delta*|beta|. Distances equal to delta*|beta| are allowed.

    Args:
        pattern: A built pattern
        stats: Decoration statistics supplying delta

    Returns:
        Violations; empty when the law holds
    """
    stats = stats or decoration_stats(pattern)
    records = pattern.records()
    if len(records) < 2:
        return []

    ifs = pattern.ifs
    m = ifs.m
    threshold = stats.min_distance * ifs.expansion * (1.0 - RADIUS_TOLERANCE)
    limit = interior_radius(pattern)
    positions = pattern.physical_array()
    grid = SpatialGrid.for_points(positions, stats.min_distance)
    maps_of: Dict[int, FrozenSet[int]] = {}

    def predecessor_maps(i: int) -> FrozenSet[int]:
        if i not in maps_of:
            sources = preimages(ifs, np.array([records[i].key], dtype=np.int64))[0]
            maps_of[i] = frozenset(k for k, row in enumerate(sources.tolist()) if tuple(row) in pattern.points)
        return maps_of[i]

    violations = []
    for i, record in enumerate(records):
        if math.hypot(*record.phys) > limit:
            continue
        neighbours = grid.query(positions[i], threshold, exclude=i)
        if not len(neighbours):
            continue
        used = frozenset().union(*(predecessor_maps(int(j)) for j in neighbours))
        allowed = m - record.pred_count
        if len(used) > allowed:
            delta = positions[neighbours] - positions[i]
            violations.append(
                NeighborLawViolation(
                    elem=record.elem,
                    pred_count=record.pred_count,
                    neighbor_count=len(neighbours),
                    neighbor_maps=len(used),
                    allowed=allowed,
                    nearest_distance=float(np.min(np.hypot(delta[:, 0], delta[:, 1]))),
                )
            )
    if violations:
        logger.warning("Neighbour law violated at %d interior points", len(violations))
    return violations


def covering_radius(pattern: PatternSet, region: Optional[float] = None, step: Optional[float] = None) -> float:
    """
    Empirical covering radius: the largest distance from a sample location to the pattern.

    Args:
        pattern: A built pattern
        region: Radius of the sampled disc (defaults to the interior radius)
        step: Spacing of the square sample grid (defaults to the grid cell)

    Returns:
        Largest sampled hole radius (inf for an empty pattern)
    """
    positions = pattern.physical_array()
    if not len(positions):
        return math.inf
    region = interior_radius(pattern) if region is None else region
    if region <= 0:
        return 0.0
    grid = SpatialGrid.for_points(positions)
    step = step or grid.cell_size

    axis = np.arange(-region, region + step / 2, step)
    xs, ys = np.meshgrid(axis, axis)
    samples = np.column_stack([xs.ravel(), ys.ravel()])
    samples = samples[np.hypot(samples[:, 0], samples[:, 1]) <= region]
    return max(grid.nearest_to(sample)[1] for sample in samples)


def ring_census(
    pattern: PatternSet,
    radius: float,
    *,
    pred_count: Optional[int] = None,
    tolerance: float = 1e-6,
) -> Dict[int, int]:
    """
    Number of neighbours at distance ``radius`` around interior points of one class.

    Args:
        pattern: A built pattern
        radius: Ring radius to look at (for example t or 1)
        pred_count: Class of centre points, defaults to m
        tolerance: Absolute tolerance on the distance

    Returns:
        Mapping from neighbour count to the number of centre points with that count
    """
    pred_count = pattern.ifs.m if pred_count is None else pred_count
    records = pattern.records()
    positions = pattern.physical_array()
    grid = SpatialGrid.for_points(positions)
    limit = interior_radius(pattern) - radius

    census: Counter = Counter()
    for i, record in enumerate(records):
        if record.pred_count != pred_count or math.hypot(*record.phys) > limit:
            continue
        candidates = grid.query(positions[i], radius + tolerance, exclude=i)
        delta = positions[candidates] - positions[i] if len(candidates) else np.zeros((0, 2))
        on_ring = np.abs(np.hypot(delta[:, 0], delta[:, 1]) - radius) <= tolerance
        census[int(np.count_nonzero(on_ring))] += 1
    return dict(sorted(census.items()))


__all__ = [
    "CycleReport",
    "CoreAccounting",
    "DecorationStats",
    "NeighborLawViolation",
    "cyclic_components",
    "core_accounting",
    "min_distance",
    "decoration_stats",
    "interior_radius",
    "check_neighbor_law",
    "covering_radius",
    "ring_census",
]
