"""
Construction of self-similar model sets.

This module provides tools for:
- Step 1: projecting the candidate lattice Z^d_N to the core F0
- Step 2: pruning F0 to F1 = F0 ∩ Λ* with the successor graph
- Step 3: recursive extension of seeds to Λ* ∩ B_rho(0) with predecessor counts
- An inverse-map membership oracle for single ring elements
"""

from __future__ import annotations

import logging
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from . import settings
from .analysis import cyclic_components
from .errors import BudgetExceeded, Intractable, ValidationError
from .ifs import Bounds, IfsSpec, compute_bounds, images, preimages, successor_graph
from .ring import RingElement

logger = logging.getLogger(__name__)

Key = Tuple[int, ...]

COMPACT = "compact"
SEEDS = "seeds"
ALL_CYCLES = "all_cycles"

QUADRATIC_FORM = "quadratic_form"
STABILIZE = "stabilize"


@dataclass(frozen=True)
class PointRecord:
    """
    One point of a pattern.

    Attributes:
        elem: Exact ring element
        phys: Physical position (x1, x2)
        pred_count: Number of maps g_k with g_k^-1(elem) in the pattern
        is_core: Member of the pruned core F1
        is_cyclic: Member of a cyclic component of the successor graph
    """

    elem: RingElement
    phys: Tuple[float, float]
    pred_count: int
    is_core: bool = False
    is_cyclic: bool = False

    @property
    def key(self) -> Key:
        return self.elem.coords


@dataclass
class CoreResult:
    """Outcome of steps 1 and 2: N, both cores and the successor graph over F1."""

    N: int
    bounds: Bounds
    F0: Tuple[RingElement, ...]
    F1: Tuple[RingElement, ...]
    graph: Dict[Key, Tuple[Key, ...]]
    lattice_size: int = 0

    @property
    def removed(self) -> Tuple[RingElement, ...]:
        """Points of F0 dropped by the pruning step."""
        kept = {x.coords for x in self.F1}
        return tuple(x for x in self.F0 if x.coords not in kept)


@dataclass
class PatternSet:
    """
    Finite patch Λ ∩ B_rho(0) of a model set, keyed by exact coordinates.

    Iteration yields records in lexicographic coordinate order.
    """

    ifs: IfsSpec
    rho: float
    seed_mode: str = ALL_CYCLES
    seeds: Tuple[RingElement, ...] = ()
    points: Dict[Key, PointRecord] = field(default_factory=dict)
    core: Optional[CoreResult] = None

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, item: Union[RingElement, Sequence[int]]) -> bool:
        key = item.coords if isinstance(item, RingElement) else tuple(int(v) for v in item)
        return key in self.points

    def __iter__(self) -> Iterator[PointRecord]:
        return iter(self.records())

    def get(self, item: Union[RingElement, Sequence[int]]) -> Optional[PointRecord]:
        key = item.coords if isinstance(item, RingElement) else tuple(int(v) for v in item)
        return self.points.get(key)

    def records(self) -> List[PointRecord]:
        return [self.points[key] for key in sorted(self.points)]

    def elements(self) -> List[RingElement]:
        return [record.elem for record in self.records()]

    def coordinate_array(self) -> np.ndarray:
        d = self.ifs.field.degree
        return np.array(sorted(self.points), dtype=np.int64).reshape(-1, d)

    def physical_array(self) -> np.ndarray:
        return np.array([record.phys for record in self.records()], dtype=float).reshape(-1, 2)

    def pred_counts(self) -> np.ndarray:
        return np.array([record.pred_count for record in self.records()], dtype=np.int64)

    def mark(self, core_keys: Iterable[Key], cyclic_keys: Iterable[Key]) -> None:
        """Set the is_core and is_cyclic flags from key sets."""
        core_keys = set(core_keys)
        cyclic_keys = set(cyclic_keys)
        for key, record in self.points.items():
            self.points[key] = replace(record, is_core=key in core_keys, is_cyclic=key in cyclic_keys)


def candidate_count(d: int, N: int) -> int:
    """Size (2N+1)^d of the candidate lattice Z^d_N."""
    return (2 * N + 1) ** d


def quadratic_form_bound(ifs: IfsSpec, bounds: Optional[Bounds] = None) -> int:
    """
    Certified N for the projection step.

    The sum of |x|^2 over physical space and all internal planes is a
    positive-definite quadratic form n^T G n in lattice coordinates. Every core
    point satisfies it with right-hand side R^2 = c^2 + sum c_j^2, so each
    coordinate obeys |n_i| <= R * sqrt((G^-1)_ii).

    Example:
        >>> quadratic_form_bound(pentagonal_ifs)  # doctest: +SKIP
        2
    """
    bounds = bounds or compute_bounds(ifs)
    embeddings = ifs.field.embeddings
    basis = ifs.field.lattice_basis.astype(float)
    gram = np.zeros((basis.shape[1], basis.shape[1]))
    for matrix in (embeddings.physical,) + embeddings.internal:
        projected = matrix @ basis
        gram += projected.T @ projected
    radius_sq = bounds.c**2 + sum(c * c for c in bounds.c_planes)
    extent = math.sqrt(radius_sq * float(np.max(np.diag(np.linalg.inv(gram)))))
    return max(1, int(math.floor(extent * (1.0 + settings.RADIUS_TOLERANCE))))


def _lattice_block(N: int, d: int) -> np.ndarray:
    axis = np.arange(-N, N + 1, dtype=np.int64)
    grids = np.meshgrid(*([axis] * (d - 1)), indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, d - 1)


def enumerate_core(
    ifs: IfsSpec,
    bounds: Optional[Bounds] = None,
    N: int = 1,
    *,
    radius_factor: float = 1.0,
    budget: int = settings.LATTICE_BUDGET,
    threads: Optional[int] = None,
) -> List[RingElement]:
    """
    Step 1: lattice points of Z^d_N whose embeddings lie in the bound balls.

    Keeps x with |x| <= radius_factor * c and |sigma_j(x)| <= c_j in every
    internal plane, all with relative slack ``RADIUS_TOLERANCE``.

    Args:
        ifs: The IFS
        bounds: Precomputed bounds (computed when omitted)
        N: Coordinate range -N..N in the lattice basis
        radius_factor: Enlarges the physical radius (2.0 gives B_2c)
        budget: Maximum lattice size
        threads: Worker threads (``QL_THREADS`` when omitted)

    Returns:
        F0 sorted by power-basis coordinates

    Raises:
        Intractable: If (2N+1)^d exceeds ``budget``
    """
    bounds = bounds or compute_bounds(ifs)
    field_spec = ifs.field
    d = field_spec.degree
    size = candidate_count(d, N)
    if size > budget:
        raise Intractable(f"Candidate lattice has {size} points for N={N}, d={d}; budget is {budget}")

    slack = 1.0 + settings.RADIUS_TOLERANCE
    basis = field_spec.lattice_basis
    physical = field_spec.embeddings.values()
    internal = [field_spec.embeddings.values(j) for j in range(field_spec.embeddings.plane_count)]
    rest = _lattice_block(N, d)

    def keep(first: int) -> np.ndarray:
        lattice = np.hstack([np.full((len(rest), 1), first, dtype=np.int64), rest])
        coords = lattice @ basis.T
        mask = np.abs(coords @ physical) <= bounds.c * radius_factor * slack
        for values, limit in zip(internal, bounds.c_planes):
            mask &= np.abs(coords @ values) <= limit * slack
        return coords[mask]

    threads = threads or settings.thread_count()
    firsts = range(-N, N + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(keep, firsts))
    else:
        blocks = [keep(first) for first in firsts]

    rows = sorted(tuple(row) for block in blocks for row in block.tolist())
    logger.info("Step 1: %d of %d lattice points project into the bound balls (N=%d)", len(rows), size, N)
    return [field_spec.element(row) for row in rows]


def determine_N(
    ifs: IfsSpec,
    bounds: Optional[Bounds] = None,
    *,
    strategy: str = QUADRATIC_FORM,
    consecutive: int = 1,
    budget: int = settings.LATTICE_BUDGET,
    cross_check: bool = True,
) -> int:
    """
    Coordinate range N for the projection step.

    The default is the quadratic-form bound, which is certified: no lattice
    vector outside Z^d_N can satisfy every radius bound. The smallest N whose
    core count is stable is available as ``strategy="stabilize"`` and is
    also used as the cross-check of the certified value.

    Args:
        ifs: The IFS
        bounds: Precomputed bounds
        strategy: ``"quadratic_form"`` returns the certified bound;
            ``"stabilize"`` returns the smallest N whose core count is unchanged
            for the next ``consecutive`` values of N
        consecutive: Number of equal successive counts required by ``"stabilize"``
        budget: Maximum lattice size
        cross_check: Compare the core counts at N and N+1 for the certified bound

    Raises:
        Intractable: If a lattice that must be enumerated exceeds ``budget``

    Example:
        >>> determine_N(pentagonal_ifs)  # doctest: +SKIP
        2
    """
    bounds = bounds or compute_bounds(ifs)
    d = ifs.field.degree
    certified = quadratic_form_bound(ifs, bounds)
    counts: Dict[int, int] = {}

    def count(N: int) -> int:
        if N not in counts:
            counts[N] = len(enumerate_core(ifs, bounds, N, budget=budget))
        return counts[N]

    if strategy == QUADRATIC_FORM:
        if candidate_count(d, certified) > budget:
            raise Intractable(
                f"Certified N={certified} needs {candidate_count(d, certified)} lattice points; budget is {budget}"
            )
        if cross_check and candidate_count(d, certified + 1) <= budget:
            if count(certified) != count(certified + 1):
                logger.warning(
                    "Core count changes from N=%d to N=%d (%d -> %d); the quadratic-form bound is not tight",
                    certified, certified + 1, counts[certified], counts[certified + 1],
                )
        logger.info("N=%d (quadratic-form bound, lattice size %d)", certified, candidate_count(d, certified))
        return certified

    if strategy != STABILIZE:
        raise ValidationError(f"Unknown strategy {strategy!r}; use {QUADRATIC_FORM!r} or {STABILIZE!r}")
    if consecutive < 1:
        raise ValidationError(f"consecutive must be positive, got {consecutive}")

    N = 1
    while any(count(N + i) != count(N) for i in range(1, consecutive + 1)):
        N += 1
    if N != certified:
        logger.warning("Stabilised at N=%d while the quadratic-form bound gives N=%d", N, certified)
    logger.info("N=%d (stabilised core count %d)", N, counts[N])
    return N


def prune_core(
    F0: Sequence[RingElement], ifs: IfsSpec, bounds: Optional[Bounds] = None
) -> Tuple[List[RingElement], Dict[Key, Tuple[Key, ...]]]:
    """
    Step 2: remove points of F0 without predecessors until none is left.

    The successor graph is built over F0 with images restricted to the ball
    of radius c. A removed point decrements the predecessor counts of its
    successors before it disappears.

    Returns:
        (F1 in F0 order, successor graph restricted to F1)
    """
    bounds = bounds or compute_bounds(ifs)
    graph = successor_graph(F0, ifs, radius=bounds.c * (1.0 + settings.RADIUS_TOLERANCE))

    predecessors: Dict[Key, int] = {key: 0 for key in graph}
    for targets in graph.values():
        for target in targets:
            predecessors[target] += 1

    alive = set(graph)
    queue = deque(key for key, value in predecessors.items() if value == 0)
    while queue:
        key = queue.popleft()
        if key not in alive:
            continue
        alive.discard(key)
        for target in graph[key]:
            if target in alive:
                predecessors[target] -= 1
                if predecessors[target] == 0:
                    queue.append(target)

    F1 = [x for x in F0 if x.coords in alive]
    pruned = {key: tuple(t for t in targets if t in alive) for key, targets in graph.items() if key in alive}
    logger.info("Step 2: %d of %d core points survive", len(F1), len(F0))
    if not F1:
        logger.warning("Pruned core is empty; the IFS has no cycles in the bound balls")
    return F1, pruned


def compute_core(
    ifs: IfsSpec,
    *,
    N: Optional[int] = None,
    radius_factor: float = 1.0,
    budget: int = settings.LATTICE_BUDGET,
    strategy: str = QUADRATIC_FORM,
    consecutive: int = 1,
) -> CoreResult:
    """Steps 1 and 2 in one call."""
    bounds = compute_bounds(ifs)
    if N is None:
        N = determine_N(ifs, bounds, strategy=strategy, consecutive=consecutive, budget=budget)
    elif N < 1:
        raise ValidationError(f"N must be positive, got {N}")
    F0 = enumerate_core(ifs, bounds, N, radius_factor=radius_factor, budget=budget)
    F1, graph = prune_core(F0, ifs, bounds)
    return CoreResult(
        N=N,
        bounds=bounds,
        F0=tuple(F0),
        F1=tuple(F1),
        graph=graph,
        lattice_size=candidate_count(ifs.field.degree, N),
    )


def extend(
    seeds: Sequence[RingElement],
    ifs: IfsSpec,
    rho: float,
    *,
    max_points: int = settings.POINT_BUDGET,
    seed_mode: str = SEEDS,
) -> PatternSet:
    """
    Step 3: worklist closure of the seeds under all g_k inside B_rho(0).

    Every visited point is expanded once. Each pair (x, k) with g_k(x) inside
    the ball adds one predecessor to g_k(x). Seeds outside the ball are
    expanded but not kept.

    Args:
        seeds: Initial points
        ifs: The IFS
        rho: Cutoff radius
        max_points: Point budget
        seed_mode: Recorded on the pattern

    Returns:
        PatternSet with exact predecessor counts

    Raises:
        ValidationError: If rho is not positive or there are no seeds
        BudgetExceeded: If the pattern grows beyond ``max_points``
    """
    if not rho > 0:
        raise ValidationError(f"rho must be positive, got {rho}")
    if not seeds:
        raise ValidationError("extend needs at least one seed")

    field_spec = ifs.field
    d = field_spec.degree
    limit = rho * (1.0 + settings.RHO_TOLERANCE)
    physical = field_spec.embeddings.values()

    counts: Dict[Key, int] = {}
    visited: Set[Key] = set()
    frontier: List[Key] = []
    for seed in seeds:
        if seed.coords not in visited:
            visited.add(seed.coords)
            frontier.append(seed.coords)
    seed_array = np.array(frontier, dtype=np.int64).reshape(-1, d)
    for key, inside in zip(frontier, np.abs(seed_array @ physical) <= limit):
        if inside:
            counts[key] = 0

    level = 0
    while frontier:
        targets = images(ifs, np.array(frontier, dtype=np.int64)).reshape(-1, d)
        inside = np.abs(targets @ physical) <= limit
        next_frontier = []
        for row in targets[inside].tolist():
            key = tuple(row)
            counts[key] = counts.get(key, 0) + 1
            if key not in visited:
                visited.add(key)
                next_frontier.append(key)
        if len(counts) > max_points:
            raise BudgetExceeded(f"Pattern exceeds {max_points} points at radius {rho}")
        level += 1
        logger.debug("Extension level %d: %d new points, %d total", level, len(next_frontier), len(counts))
        frontier = next_frontier

    keys = sorted(counts)
    positions = np.array(keys, dtype=np.int64).reshape(-1, d) @ physical
    points = {
        key: PointRecord(field_spec.element(key), (float(p.real), float(p.imag)), counts[key])
        for key, p in zip(keys, positions)
    }
    logger.info("Step 3: %d points within radius %g", len(points), rho)
    return PatternSet(ifs=ifs, rho=rho, seed_mode=seed_mode, seeds=tuple(seeds), points=points)


def build_model_set(
    ifs: IfsSpec,
    rho: float,
    window: str = COMPACT,
    seeds: Optional[Sequence[RingElement]] = None,
    *,
    N: Optional[int] = None,
    strict: bool = False,
    radius_factor: float = 1.0,
    budget: int = settings.LATTICE_BUDGET,
    max_points: int = settings.POINT_BUDGET,
    core: Optional[CoreResult] = None,
) -> PatternSet:
    """
    The full pipeline: core, pruning and recursive extension.

    Args:
        ifs: The IFS
        rho: Cutoff radius
        window: ``"compact"`` extends F1 (the maximal solution);
            ``"seeds"`` extends the given seeds (sub-solutions)
        seeds: Seed points for the ``"seeds"`` window
        N: Override for the lattice range
        strict: Reject seeds that fail the membership oracle
        radius_factor: Physical radius factor for step 1
        budget: Lattice budget
        max_points: Point budget
        core: Reuse a previously computed core

    Returns:
        PatternSet with core and cyclic flags set

    Example:
        >>> pattern = build_model_set(pentagonal_ifs, 30.0)  # doctest: +SKIP
        >>> len(pattern) > 8000                               # doctest: +SKIP
        True
    """
    if not rho > 0:
        raise ValidationError(f"rho must be positive, got {rho}")
    if core is None:
        core = compute_core(ifs, N=N, radius_factor=radius_factor, budget=budget)
    report = cyclic_components(core.F1, ifs)

    if window == COMPACT:
        if not core.F1:
            pattern = PatternSet(ifs=ifs, rho=rho, seed_mode=ALL_CYCLES)
        else:
            pattern = extend(core.F1, ifs, rho, max_points=max_points, seed_mode=ALL_CYCLES)
    elif window == SEEDS:
        if not seeds:
            raise ValidationError("The seeds window needs at least one seed")
        if strict:
            for seed in seeds:
                if not membership_oracle(seed, ifs, report, core.bounds):
                    raise ValidationError(f"Seed {seed} does not belong to the maximal solution")
        pattern = extend(seeds, ifs, rho, max_points=max_points, seed_mode=SEEDS)
    else:
        raise ValidationError(f"Unknown window {window!r}; use {COMPACT!r} or {SEEDS!r}")

    pattern.core = core
    pattern.mark((x.coords for x in core.F1), report.members)
    return pattern


def membership_oracle(
    x: RingElement,
    ifs: IfsSpec,
    cyclic_set: Iterable,
    bounds: Optional[Bounds] = None,
) -> bool:
    """
    Decide whether ``x`` belongs to the maximal solution Λ*.

    Searches inverse-map words g_k^-1 breadth first. A branch is cut as soon
    as an internal-plane image leaves B_{c_j}, since it can never return.
    Visited states are never expanded twice.

    Args:
        x: Candidate point
        ifs: The IFS
        cyclic_set: CycleReport, or an iterable of ring elements or coordinate keys
        bounds: Precomputed bounds

    Returns:
        True iff some inverse word leads ``x`` into the cyclic set
    """
    bounds = bounds or compute_bounds(ifs)
    targets = _key_set(cyclic_set)
    if x.coords in targets:
        return True

    field_spec = ifs.field
    d = field_spec.degree
    slack = 1.0 + settings.RADIUS_TOLERANCE
    planes = [
        (field_spec.embeddings.values(j), c_j * slack) for j, c_j in enumerate(bounds.c_planes)
    ]

    def admissible(coords: np.ndarray) -> np.ndarray:
        mask = np.ones(len(coords), dtype=bool)
        for values, limit in planes:
            mask &= np.abs(coords @ values) <= limit
        return mask

    frontier = np.array([x.coords], dtype=np.int64)
    if not admissible(frontier)[0]:
        return False

    visited = {x.coords}
    while len(frontier):
        candidates = preimages(ifs, frontier).reshape(-1, d)
        fresh = []
        for row in candidates[admissible(candidates)].tolist():
            key = tuple(row)
            if key in targets:
                return True
            if key not in visited:
                visited.add(key)
                fresh.append(row)
        frontier = np.array(fresh, dtype=np.int64).reshape(-1, d)
    return False


@dataclass(frozen=True)
class OracleCheck:
    """Agreement between the membership oracle and an extended pattern."""

    radius: float
    checked: int
    members: int
    mismatches: Tuple[RingElement, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def verify_oracle(
    ifs: IfsSpec,
    radius: float = 8.0,
    *,
    core: Optional[CoreResult] = None,
    stride: int = 1,
    max_points: int = settings.POINT_BUDGET,
) -> OracleCheck:
    """
    Compare :func:`membership_oracle` with membership in extend(F1).

    Every lattice point of Z^d_N with physical modulus at most ``radius`` is
    tested (every ``stride``-th one when ``stride`` > 1). The pattern is
    extended to radius + |beta|*radius + max|z_k| so that membership inside
    ``radius`` is final.
    """
    if stride < 1:
        raise ValidationError(f"stride must be positive, got {stride}")
    core = core or compute_core(ifs)
    report = cyclic_components(core.F1, ifs)
    rho = radius + ifs.expansion * radius + ifs.max_translation
    pattern = extend(core.F1, ifs, rho, max_points=max_points) if core.F1 else PatternSet(ifs=ifs, rho=rho)

    field_spec = ifs.field
    d = field_spec.degree
    rest = _lattice_block(core.N, d)
    physical = field_spec.embeddings.values()
    candidates = []
    for first in range(-core.N, core.N + 1):
        lattice = np.hstack([np.full((len(rest), 1), first, dtype=np.int64), rest])
        coords = lattice @ field_spec.lattice_basis.T
        inside = np.abs(coords @ physical) <= radius * (1.0 + settings.RADIUS_TOLERANCE)
        candidates.extend(tuple(row) for row in coords[inside].tolist())
    candidates = sorted(set(candidates))[::stride]

    mismatches = []
    members = 0
    for key in candidates:
        x = field_spec.element(key)
        expected = key in pattern.points
        members += expected
        if membership_oracle(x, ifs, report, core.bounds) != expected:
            mismatches.append(x)
    if mismatches:
        logger.warning("Oracle disagrees with the pattern at %d of %d points", len(mismatches), len(candidates))
    return OracleCheck(radius=radius, checked=len(candidates), members=members, mismatches=tuple(mismatches))


def _key_set(items) -> Set[Key]:
    members = getattr(items, "members", None)
    if members is not None:
        return set(members)
    keys = set()
    for item in items:
        keys.add(item.coords if isinstance(item, RingElement) else tuple(int(v) for v in item))
    return keys


__all__ = [
    "COMPACT",
    "SEEDS",
    "ALL_CYCLES",
    "QUADRATIC_FORM",
    "STABILIZE",
    "PointRecord",
    "CoreResult",
    "PatternSet",
    "candidate_count",
    "quadratic_form_bound",
    "enumerate_core",
    "determine_N",
    "prune_core",
    "compute_core",
    "extend",
    "build_model_set",
    "membership_oracle",
    "OracleCheck",
    "verify_oracle",
]
