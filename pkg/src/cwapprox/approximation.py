"""Weak star condition checking and the subdivision-until-approximable loops.

A vertex v of the source sphere passes the weak star condition when the
location simplices of the images of v and its neighbors share a common
target vertex; any such witness is an admissible value for a weak simplicial
approximation.  When some vertices fail, the sphere is refined: globally,
globally with normalization, or generalized (holding the subcomplex of
passing simplices fixed); the generalized loop may not terminate and is
surfaced through an iteration cap rather than silently spinning.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .complexes import (
    GeometricComplex,
    Simplex,
    SimplicialComplex,
    VertexMap,
    is_simplicial,
)
from .errors import InternalError, InvalidInputError, NonTerminationError, PreconditionError
from .spheres import (
    LocationHierarchy,
    SphereTriangulation,
    radial_location,
    sphere_subdivide,
)
from .subdivision import unsatisfied_subcomplex

METHODS = {
    "barycentric": ("barycentric", False),
    "edgewise": ("edgewise", False),
    "delaunay-barycentric": ("barycentric", True),
    "delaunay-edgewise": ("edgewise", True),
}
STRATEGIES = ("global", "global-normalized", "generalized")


@dataclass(frozen=True)
class ApproximationConfig:
    method: str = "delaunay-edgewise"
    strategy: str = "generalized"
    max_rounds: int = 12
    pre_subdivisions: int = 0
    seed: int = 0
    eps: float = 1e-10

    def validated_for(self, sphere_dim: int) -> "ApproximationConfig":
        if self.method not in METHODS:
            raise InvalidInputError(f"unknown method {self.method!r}")
        if self.strategy not in STRATEGIES:
            raise InvalidInputError(f"unknown strategy {self.strategy!r}")
        base, delaunay = METHODS[self.method]
        if base == "edgewise" and sphere_dim > 3:
            raise InvalidInputError(
                f"edgewise methods need sphere dimension <= 3, got {sphere_dim}"
            )
        if delaunay and self.strategy == "global":
            raise InvalidInputError(
                "Delaunay methods need normalized vertices; "
                "use global-normalized or generalized"
            )
        return self


@dataclass
class InducedMapEvaluation:
    """Per-vertex location of the induced map's image in the target."""

    locations: Dict[int, Simplex] = field(default_factory=dict)

    def covers(self, k: SimplicialComplex) -> bool:
        return all(v in self.locations for v in k.vertex_set())


def evaluate_map(
    f: Callable[[np.ndarray], Simplex],
    sphere: SphereTriangulation,
    cache: Optional[Dict[int, Simplex]] = None,
) -> InducedMapEvaluation:
    """Evaluate f at the (normalized) vertex coordinates of the sphere.

    Retained vertex ids keep their cached locations across rounds: image
    evaluation can be expensive (recursive skeleton location maps).
    """
    locations = dict(cache) if cache else {}
    for v in sphere.geom.complex.vertices():
        if v in locations:
            continue
        x = np.asarray(sphere.geom.coords[v], dtype=float)
        n = np.linalg.norm(x)
        if n == 0.0:
            raise InvalidInputError(f"vertex {v} at the origin cannot be projected")
        locations[v] = f(x / n)
    return InducedMapEvaluation(locations)


def weak_star_check(
    evaluation: InducedMapEvaluation, k: SimplicialComplex
) -> Tuple[bool, Set[int], Dict[int, Set[int]]]:
    """Weak star condition at every vertex of k.

    For each vertex the admissible witnesses are the common vertices of the
    location simplices over its closed-star vertex set; a vertex passes iff
    that intersection is non-empty.  Returns (all_ok, failing set, witnesses
    of the passing vertices).
    """
    locations = evaluation.locations
    neighbors: Dict[int, Set[int]] = {v: {v} for v in k.vertex_set()}
    for a, b in k.simplices(1):
        neighbors[a].add(b)
        neighbors[b].add(a)
    failing: Set[int] = set()
    witnesses: Dict[int, Set[int]] = {}
    for v, nbrs in neighbors.items():
        common: Optional[Set[int]] = None
        for w in nbrs:
            loc = set(locations[w])
            common = loc if common is None else common & loc
            if not common:
                break
        if common:
            witnesses[v] = common
        else:
            failing.add(v)
    return not failing, failing, witnesses


def choose_weak_approximation(
    witnesses: Dict[int, Set[int]],
    rng: np.random.Generator,
    source: SimplicialComplex,
    target: SimplicialComplex,
) -> VertexMap:
    """Pick a uniformly random witness per vertex; the result is simplicial."""
    images = {}
    for v in sorted(witnesses):
        pool = sorted(witnesses[v])
        if not pool:
            raise PreconditionError(f"vertex {v} has an empty witness set")
        images[v] = pool[rng.integers(len(pool))]
    g = VertexMap(images)
    if not is_simplicial(g, source, target):
        raise InternalError("weak approximation is not simplicial")
    return g


@dataclass
class ApproximationOutcome:
    sphere: SphereTriangulation
    vertex_map: VertexMap
    rounds: int
    vertex_counts: List[int]
    evaluation: InducedMapEvaluation
    elapsed: float


class RadialTargetMap:
    """Induced map onto a radially star-shaped target complex.

    Composes an optional point map on the sphere with radial location in the
    target; the target may carry its own location hierarchy for speed.
    """

    def __init__(
        self,
        target: GeometricComplex,
        hierarchy: Optional[LocationHierarchy] = None,
        point_map: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        eps: float = 1e-10,
    ):
        self.target = target
        self.hierarchy = hierarchy
        self.point_map = point_map
        self.eps = eps

    def __call__(self, x: np.ndarray) -> Simplex:
        y = self.point_map(x) if self.point_map is not None else x
        if self.hierarchy is not None:
            return self.hierarchy.locate(y, self.eps)
        return radial_location(self.target, y, self.eps)


def approximate(
    f: Callable[[np.ndarray], Simplex],
    sphere: SphereTriangulation,
    target: SimplicialComplex,
    cfg: ApproximationConfig,
    rng: Optional[np.random.Generator] = None,
) -> ApproximationOutcome:
    """Refine `sphere` until f admits a weak simplicial approximation into
    `target`, then choose one at random.

    f maps unit vectors to their location simplex in the target.  Raises
    NonTerminationError (with the last state attached) after max_rounds
    refinement rounds; callers may switch strategy and retry.
    """
    start = time.perf_counter()
    cfg = cfg.validated_for(sphere.dim)
    base_method, delaunay = METHODS[cfg.method]
    normalize = cfg.strategy != "global"
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.pre_subdivisions):
        sphere = sphere_subdivide(
            sphere, base_method, fixed=None, delaunay=delaunay, normalize=normalize
        )
    cache: Dict[int, Simplex] = {}
    counts: List[int] = []
    rounds = 0
    while True:
        evaluation = evaluate_map(f, sphere, cache)
        cache = evaluation.locations
        counts.append(sphere.vertex_count())
        all_ok, failing, witnesses = weak_star_check(evaluation, sphere.geom.complex)
        if all_ok:
            g = choose_weak_approximation(
                witnesses, rng, sphere.geom.complex, target
            )
            return ApproximationOutcome(
                sphere, g, rounds, counts, evaluation, time.perf_counter() - start
            )
        if rounds >= cfg.max_rounds:
            raise NonTerminationError(
                f"no weak approximation after {rounds} rounds "
                f"({len(failing)} failing vertices)",
                state={
                    "sphere": sphere,
                    "failing": failing,
                    "vertex_counts": counts,
                    "config": cfg,
                },
            )
        fixed = (
            unsatisfied_subcomplex(sphere.geom.complex, failing)
            if cfg.strategy == "generalized"
            else None
        )
        sphere = sphere_subdivide(
            sphere, base_method, fixed=fixed, delaunay=delaunay, normalize=normalize
        )
        rounds += 1


def recheck_approximation(
    g: VertexMap,
    evaluation: InducedMapEvaluation,
    k: SimplicialComplex,
) -> bool:
    """Post-hoc audit: g(v) must witness every neighbor's location simplex."""
    neighbors: Dict[int, Set[int]] = {v: {v} for v in k.vertex_set()}
    for a, b in k.simplices(1):
        neighbors[a].add(b)
        neighbors[b].add(a)
    return all(
        all(g(v) in evaluation.locations[w] for w in nbrs)
        for v, nbrs in neighbors.items()
    )


def contiguous(
    g1: VertexMap, g2: VertexMap, k: SimplicialComplex, target: SimplicialComplex
) -> bool:
    """Simplexwise unions of two maps land in the target (hence homotopic)."""
    return all(
        tuple(sorted({g1(v) for v in s} | {g2(v) for v in s})) in target
        for s in k.maximal_simplices()
    )
