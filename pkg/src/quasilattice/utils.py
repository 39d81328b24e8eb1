"""
Utilities module for quasilattice.

Graph and geometry helpers shared by the pipeline, analysis and render modules:
- Strongly connected components (iterative Tarjan) and forward reachability
- A uniform 2-D grid for nearest-neighbour and fixed-radius queries
"""

import logging
import math
from collections import defaultdict, deque
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar("T", bound=Hashable)


def strongly_connected_components(graph: Mapping[T, Sequence[T]]) -> List[Tuple[T, ...]]:
    """
    Tarjan's algorithm without recursion.

    Args:
        graph: Mapping from node to its successors. Successors missing from
            the mapping are treated as sinks.

    Returns:
        Components in reverse topological order of the condensation
    """
    index: Dict[T, int] = {}
    lowlink: Dict[T, int] = {}
    on_stack: Set[T] = set()
    stack: List[T] = []
    result: List[Tuple[T, ...]] = []
    counter = 0

    def visit(node: T) -> None:
        nonlocal counter
        index[node] = lowlink[node] = counter
        counter += 1
        stack.append(node)
        on_stack.add(node)

    for root in graph:
        if root in index:
            continue
        visit(root)
        work = [(root, iter(graph.get(root, ())))]
        while work:
            node, successors = work[-1]
            descended = False
            for successor in successors:
                if successor not in index:
                    visit(successor)
                    work.append((successor, iter(graph.get(successor, ()))))
                    descended = True
                    break
                if successor in on_stack:
                    lowlink[node] = min(lowlink[node], index[successor])
            if descended:
                continue

            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                result.append(tuple(component))
    return result


def reachable(graph: Mapping[T, Sequence[T]], sources: Iterable[T]) -> Set[T]:
    """All nodes reachable from ``sources`` along successor edges (sources included)."""
    seen = set(sources)
    queue = deque(seen)
    while queue:
        node = queue.popleft()
        for successor in graph.get(node, ()):
            if successor not in seen:
                seen.add(successor)
                queue.append(successor)
    return seen


class SpatialGrid:
    """
    Uniform grid over 2-D points for proximity queries.

    Each point is hashed to the integer cell ``floor(p / cell_size)``. Queries
    only visit the cells that can hold an answer.

    Args:
        points: Array of shape (n, 2)
        cell_size: Edge length of a grid cell
    """

    def __init__(self, points: np.ndarray, cell_size: float):
        if cell_size <= 0:
            raise ValueError(f"cell_size must be positive, got {cell_size}")
        self.points = np.asarray(points, dtype=float).reshape(-1, 2)
        self.cell_size = float(cell_size)
        self.inv_size = 1.0 / self.cell_size

        cells: Dict[Tuple[int, int], List[int]] = defaultdict(list)
        self.keys = np.floor(self.points * self.inv_size).astype(np.int64)
        for i, (a, b) in enumerate(self.keys.tolist()):
            cells[(a, b)].append(i)
        self.cells = {key: np.array(members, dtype=np.int64) for key, members in cells.items()}

        if len(self.points):
            self._low = self.keys.min(axis=0)
            self._high = self.keys.max(axis=0)
        else:
            self._low = self._high = np.zeros(2, dtype=np.int64)

    @classmethod
    def for_points(cls, points: np.ndarray, delta: Optional[float] = None) -> "SpatialGrid":
        """
        Grid whose cells have side delta/2 for the minimal point distance delta.

        Args:
            points: Array of shape (n, 2)
            delta: Minimal point distance; estimated by the mean spacing of
                the bounding box when omitted
        """
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        if delta is not None and delta > 0 and math.isfinite(delta):
            return cls(points, delta / 2)
        if len(points) < 2:
            return cls(points, 1.0)
        span = points.max(axis=0) - points.min(axis=0)
        area = float(span[0] * span[1])
        if area <= 0.0:
            area = float(max(span.max(), 1.0)) ** 2
        return cls(points, max(math.sqrt(area / len(points)) / 2, 1e-9))

    def __len__(self) -> int:
        return len(self.points)

    def _ring(self, center: Tuple[int, int], r: int) -> Iterable[Tuple[int, int]]:
        cx, cy = center
        if r == 0:
            yield center
            return
        for dx in range(-r, r + 1):
            yield (cx + dx, cy - r)
            yield (cx + dx, cy + r)
        for dy in range(-r + 1, r):
            yield (cx - r, cy + dy)
            yield (cx + r, cy + dy)

    def query(self, point: Sequence[float], radius: float, exclude: Optional[int] = None) -> np.ndarray:
        """
        Indices of the points within ``radius`` of ``point`` (inclusive).

        Args:
            point: Query location (x, y)
            radius: Search radius
            exclude: Optional index to leave out (the query point itself)
        """
        px, py = float(point[0]), float(point[1])
        lower = np.floor(np.array([px - radius, py - radius]) * self.inv_size).astype(np.int64)
        upper = np.floor(np.array([px + radius, py + radius]) * self.inv_size).astype(np.int64)
        found = []
        for a in range(int(lower[0]), int(upper[0]) + 1):
            for b in range(int(lower[1]), int(upper[1]) + 1):
                members = self.cells.get((a, b))
                if members is None:
                    continue
                delta = self.points[members] - (px, py)
                hits = members[np.hypot(delta[:, 0], delta[:, 1]) <= radius]
                found.extend(hits.tolist())
        if exclude is not None:
            found = [i for i in found if i != exclude]
        return np.array(sorted(found), dtype=np.int64)

    def nearest_to(self, point: Sequence[float], exclude: Optional[int] = None) -> Tuple[int, float]:
        """
        Nearest grid point to an arbitrary location.

        Returns:
            (index, distance); (-1, inf) when no candidate exists
        """
        origin = np.array([float(point[0]), float(point[1])])
        home = np.floor(origin * self.inv_size).astype(np.int64)
        center = (int(home[0]), int(home[1]))
        best_index, best = -1, math.inf
        if not len(self.points):
            return best_index, best
        limit = int(max(np.max(np.abs(self._high - home)), np.max(np.abs(home - self._low))))
        for r in range(limit + 1):
            for cell in self._ring(center, r):
                members = self.cells.get(cell)
                if members is None:
                    continue
                delta = self.points[members] - origin
                distances = np.hypot(delta[:, 0], delta[:, 1])
                if exclude is not None:
                    distances[members == exclude] = math.inf
                j = int(np.argmin(distances))
                if distances[j] < best:
                    best_index, best = int(members[j]), float(distances[j])
            # everything beyond ring r is at least r cells away
            if best <= r * self.cell_size:
                break
        return best_index, best

    def nearest(self, i: int) -> Tuple[int, float]:
        """Nearest other point to point ``i``; (-1, inf) when the grid holds a single point."""
        return self.nearest_to(self.points[i], exclude=i)

    def nearest_distances(self) -> np.ndarray:
        """Nearest-neighbour distance of every point (inf for a lone point)."""
        return np.array([self.nearest(i)[1] for i in range(len(self.points))], dtype=float)


__all__ = ["strongly_connected_components", "reachable", "SpatialGrid"]
