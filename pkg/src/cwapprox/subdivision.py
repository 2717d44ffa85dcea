"""Barycentric and edgewise subdivisions, global and generalized.

Generalized subdivision keeps a chosen subcomplex intact and refines the
rest.  The edgewise variant needs a total vertex order plus a fixed table of
reparations (how to re-triangulate a simplex once only some of its edge
midpoints exist); the tables below cover dimensions up to 3 and are keyed by
the subset of subdivision-driving vertices, mapped to local positions.

New vertex ids are allocated in sorted parent-tuple order, so two runs over
equal inputs produce identical complexes.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .complexes import GeometricComplex, Simplex, SimplicialComplex
from .errors import InternalError, InvalidInputError, UnsupportedDimensionError


@dataclass
class OrderedComplex:
    """Complex with a strict total order on its vertices (position = rank)."""

    complex: SimplicialComplex
    order: Sequence[int]

    def __post_init__(self):
        vs = self.complex.vertex_set()
        if len(set(self.order)) != len(self.order) or set(self.order) != vs:
            raise InvalidInputError("order must list each vertex exactly once")

    @classmethod
    def by_id(cls, complex_: SimplicialComplex) -> "OrderedComplex":
        return cls(complex_, complex_.vertices())

    def rank(self) -> Dict[int, int]:
        return {v: i for i, v in enumerate(self.order)}


@dataclass
class SubdivisionResult:
    """Refined complex plus the map from new maximal simplices to the input
    maximal simplex whose realization contains them."""

    complex: SimplicialComplex
    coords: Optional[Dict[int, np.ndarray]]
    parent_of: Dict[Simplex, Simplex]

    def geometric(self) -> GeometricComplex:
        if self.coords is None:
            raise InvalidInputError("subdivision of an abstract complex has no coords")
        return GeometricComplex(self.complex, self.coords)


def _split_input(g) -> Tuple[SimplicialComplex, Optional[Dict[int, np.ndarray]]]:
    if isinstance(g, GeometricComplex):
        return g.complex, g.coords
    if isinstance(g, SimplicialComplex):
        return g, None
    raise InvalidInputError(f"expected a complex, got {type(g).__name__}")


# -- barycentric ---------------------------------------------------------------


def barycentric_subdivide(g) -> SubdivisionResult:
    """Global barycentric subdivision.

    One new vertex per simplex of dimension >= 1 (the barycenter, realized as
    the vertex average); maximal output simplices are the flags of each input
    maximal simplex, enumerated by vertex permutations.
    """
    k, coords = _split_input(g)
    new_coords = dict(coords) if coords is not None else None
    vertex_of: Dict[Simplex, int] = {(v,): v for v in k.vertices()}
    next_id = k.fresh_vertex_id()
    for s in sorted(k.simplices(), key=lambda s: (len(s), s)):
        if len(s) == 1:
            continue
        vertex_of[s] = next_id
        if new_coords is not None:
            new_coords[next_id] = np.mean([coords[v] for v in s], axis=0)
        next_id += 1
    out = SimplicialComplex()
    parent_of: Dict[Simplex, Simplex] = {}
    for s in k.maximal_simplices():
        if len(s) == 1:
            out.insert_closure(s)
            parent_of[s] = s
            continue
        for perm in permutations(s):
            chain = tuple(
                sorted(vertex_of[tuple(sorted(perm[: i + 1]))] for i in range(len(s)))
            )
            out.insert_closure(chain)
            parent_of[chain] = s
    return SubdivisionResult(out, new_coords, parent_of)


def generalized_barycentric(g, fixed: SimplicialComplex) -> SubdivisionResult:
    """Barycentric subdivision holding the subcomplex `fixed` intact.

    Built dimension by dimension: simplices of `fixed` are copied, every
    other i-simplex is coned at its barycenter over the already-subdivided
    boundary.
    """
    k, coords = _split_input(g)
    if not fixed.is_subcomplex_of(k):
        raise InvalidInputError("fixed is not a subcomplex of the input")
    new_coords = dict(coords) if coords is not None else None
    out = SimplicialComplex()
    # Simplices of the partial subdivision contained in the closure of each
    # input simplex, bucketed by that carrier.
    bucket: Dict[Simplex, List[Simplex]] = {}
    support: Dict[int, Simplex] = {}
    for v in k.vertices():
        out.insert_closure((v,))
        bucket[(v,)] = [(v,)]
        support[v] = (v,)
    next_id = k.fresh_vertex_id()
    for dim in range(1, k.dimension + 1):
        for s in sorted(k.simplices(dim)):
            if s in fixed:
                out.insert_closure(s)
                bucket.setdefault(s, []).append(s)
                continue
            apex = next_id
            next_id += 1
            support[apex] = s
            if new_coords is not None:
                new_coords[apex] = np.mean([coords[v] for v in s], axis=0)
            pieces = [(apex,)]
            for face in _proper_faces(s):
                for eta in bucket.get(face, ()):
                    pieces.append(tuple(sorted((apex,) + eta)))
            for piece in pieces:
                out.insert_closure(piece)
            bucket.setdefault(s, []).extend(pieces)
    parent_of: Dict[Simplex, Simplex] = {}
    for s in out.maximal_simplices():
        carrier: Set[int] = set()
        for v in s:
            carrier.update(support.get(v, (v,)))
        parent_of[s] = tuple(sorted(carrier))
    return SubdivisionResult(out, new_coords, parent_of)


def _proper_faces(s: Simplex):
    from itertools import combinations

    for size in range(1, len(s)):
        yield from combinations(s, size)


# -- edgewise ------------------------------------------------------------------

# Reparation tables: for a simplex with locally ordered vertices 0..d and a
# driving vertex set V, the listed simplices re-triangulate it using the
# midpoints of exactly the edges meeting V.  ("m", i, j) is the midpoint of
# the local edge (i, j).  Faces of the listed rows are mutually consistent,
# which makes per-maximal-simplex application well defined.

_EDGE_TABLE_DIM1 = {
    frozenset(): ((0, 1),),
    frozenset({0}): ((0, ("m", 0, 1)), (("m", 0, 1), 1)),
}

_EDGE_TABLE_DIM2 = {
    frozenset(): ((0, 1, 2),),
    frozenset({0}): (
        (0, ("m", 0, 1), ("m", 0, 2)),
        (("m", 0, 1), 1, 2),
        (("m", 0, 1), ("m", 0, 2), 2),
    ),
    frozenset({1}): (
        (("m", 0, 1), 1, ("m", 1, 2)),
        (("m", 0, 1), ("m", 1, 2), 2),
        (0, ("m", 0, 1), 2),
    ),
    frozenset({2}): (
        (("m", 0, 2), 1, ("m", 1, 2)),
        (0, ("m", 0, 2), 1),
        (("m", 0, 2), ("m", 1, 2), 2),
    ),
    frozenset({0, 1}): (
        (("m", 0, 1), 1, ("m", 1, 2)),
        (0, ("m", 0, 1), ("m", 0, 2)),
        (("m", 0, 2), ("m", 1, 2), 2),
        (("m", 0, 1), ("m", 0, 2), ("m", 1, 2)),
    ),
}
for _key in ({0, 2}, {1, 2}, {0, 1, 2}):
    _EDGE_TABLE_DIM2[frozenset(_key)] = _EDGE_TABLE_DIM2[frozenset({0, 1})]

_M = lambda i, j: ("m", i, j)

_EDGE_TABLE_DIM3 = {
    frozenset(): ((0, 1, 2, 3),),
    frozenset({0}): (
        (_M(0, 1), _M(0, 2), _M(0, 3), 3),
        (0, _M(0, 1), _M(0, 2), _M(0, 3)),
        (_M(0, 1), 1, 2, 3),
        (_M(0, 1), _M(0, 2), 2, 3),
    ),
    frozenset({1}): (
        (0, _M(0, 1), 2, 3),
        (_M(0, 1), _M(1, 2), _M(1, 3), 3),
        (_M(0, 1), 1, _M(1, 2), _M(1, 3)),
        (_M(0, 1), _M(1, 2), 2, 3),
    ),
    frozenset({2}): (
        (0, _M(0, 2), 1, 3),
        (_M(0, 2), 1, _M(1, 2), 3),
        (_M(0, 2), _M(1, 2), _M(2, 3), 3),
        (_M(0, 2), _M(1, 2), 2, _M(2, 3)),
    ),
    frozenset({3}): (
        (_M(0, 3), _M(1, 3), _M(2, 3), 3),
        (_M(0, 3), 1, _M(1, 3), 2),
        (_M(0, 3), _M(1, 3), 2, _M(2, 3)),
        (0, _M(0, 3), 1, 2),
    ),
    frozenset({0, 1}): (
        (_M(0, 1), _M(0, 3), _M(1, 2), _M(1, 3)),
        (_M(0, 2), _M(0, 3), _M(1, 2), 3),
        (0, _M(0, 1), _M(0, 2), _M(0, 3)),
        (_M(0, 1), _M(0, 2), _M(0, 3), _M(1, 2)),
        (_M(0, 3), _M(1, 2), _M(1, 3), 3),
        (_M(0, 2), _M(1, 2), 2, 3),
        (_M(0, 1), 1, _M(1, 2), _M(1, 3)),
    ),
    frozenset({0, 2}): (
        (_M(0, 1), _M(0, 3), _M(1, 2), 3),
        (_M(0, 3), _M(1, 2), _M(2, 3), 3),
        (0, _M(0, 1), _M(0, 2), _M(0, 3)),
        (_M(0, 1), _M(0, 2), _M(0, 3), _M(1, 2)),
        (_M(0, 2), _M(0, 3), _M(1, 2), _M(2, 3)),
        (_M(0, 1), 1, _M(1, 2), 3),
        (_M(0, 2), _M(1, 2), 2, _M(2, 3)),
    ),
    frozenset({0, 3}): (
        (0, _M(0, 1), _M(0, 2), _M(0, 3)),
        (_M(0, 1), _M(0, 2), _M(0, 3), _M(2, 3)),
        (_M(0, 3), _M(1, 3), _M(2, 3), 3),
        (_M(0, 1), 1, _M(1, 3), 2),
        (_M(0, 1), _M(0, 3), _M(1, 3), _M(2, 3)),
        (_M(0, 1), _M(1, 3), 2, _M(2, 3)),
        (_M(0, 1), _M(0, 2), 2, _M(2, 3)),
    ),
    frozenset({1, 2}): (
        (_M(0, 1), _M(1, 2), _M(1, 3), _M(2, 3)),
        (_M(0, 1), _M(0, 2), _M(2, 3), 3),
        (_M(0, 1), _M(1, 3), _M(2, 3), 3),
        (0, _M(0, 1), _M(0, 2), 3),
        (_M(0, 1), _M(0, 2), _M(1, 2), _M(2, 3)),
        (_M(0, 1), 1, _M(1, 2), _M(1, 3)),
        (_M(0, 2), _M(1, 2), 2, _M(2, 3)),
    ),
    frozenset({1, 3}): (
        (_M(0, 3), _M(1, 3), _M(2, 3), 3),
        (_M(0, 1), _M(0, 3), _M(1, 2), _M(1, 3)),
        (_M(0, 3), _M(1, 2), 2, _M(2, 3)),
        (0, _M(0, 1), _M(0, 3), 2),
        (_M(0, 1), _M(0, 3), _M(1, 2), 2),
        (_M(0, 1), 1, _M(1, 2), _M(1, 3)),
        (_M(0, 3), _M(1, 2), _M(1, 3), _M(2, 3)),
    ),
    frozenset({2, 3}): (
        (_M(0, 3), _M(1, 3), _M(2, 3), 3),
        (0, _M(0, 2), _M(0, 3), 1),
        (_M(0, 2), _M(0, 3), _M(1, 2), _M(2, 3)),
        (_M(0, 3), 1, _M(1, 2), _M(1, 3)),
        (_M(0, 3), _M(1, 2), _M(1, 3), _M(2, 3)),
        (_M(0, 2), _M(0, 3), 1, _M(1, 2)),
        (_M(0, 2), _M(1, 2), 2, _M(2, 3)),
    ),
    frozenset({0, 1, 2, 3}): (
        (_M(0, 3), _M(1, 3), _M(2, 3), 3),
        (_M(0, 1), _M(0, 3), _M(1, 2), _M(1, 3)),
        (0, _M(0, 1), _M(0, 2), _M(0, 3)),
        (_M(0, 1), _M(0, 2), _M(0, 3), _M(1, 2)),
        (_M(0, 2), _M(0, 3), _M(1, 2), _M(2, 3)),
        (_M(0, 1), 1, _M(1, 2), _M(1, 3)),
        (_M(0, 3), _M(1, 2), _M(1, 3), _M(2, 3)),
        (_M(0, 2), _M(1, 2), 2, _M(2, 3)),
    ),
}
for _key in ({0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}):
    _EDGE_TABLE_DIM3[frozenset(_key)] = _EDGE_TABLE_DIM3[frozenset({0, 1, 2, 3})]

_EDGE_TABLES = {1: _EDGE_TABLE_DIM1, 2: _EDGE_TABLE_DIM2, 3: _EDGE_TABLE_DIM3}


def reparation_row(dim: int, driving: frozenset) -> tuple:
    """Table row for a dim-simplex whose driving local vertex set is given."""
    table = _EDGE_TABLES[dim]
    if dim == 1 and driving:
        driving = frozenset({0})
    if dim == 2 and len(driving) >= 2:
        driving = frozenset({0, 1})
    if dim == 3 and len(driving) >= 3:
        driving = frozenset({0, 1, 2, 3})
    return table[driving]


def _driving_set(local_edges: Set[Tuple[int, int]], n_verts: int) -> frozenset:
    """Invert edge set -> driving vertices; raises when not table-shaped."""
    driving = frozenset(
        v
        for v in range(n_verts)
        if all(
            tuple(sorted((v, w))) in local_edges
            for w in range(n_verts)
            if w != v
        )
    )
    induced = {
        tuple(sorted((v, w)))
        for v in driving
        for w in range(n_verts)
        if w != v
    }
    if induced != local_edges:
        raise InternalError(
            f"edge set {sorted(local_edges)} is not induced by a vertex set"
        )
    return driving


def _apply_row(
    row: tuple,
    local: Sequence[int],
    midpoint_of: Dict[Tuple[int, int], int],
) -> List[Simplex]:
    out = []
    for tokens in row:
        verts = []
        for tok in tokens:
            if isinstance(tok, tuple):
                _, i, j = tok
                verts.append(midpoint_of[tuple(sorted((local[i], local[j])))])
            else:
                verts.append(local[tok])
        out.append(tuple(sorted(verts)))
    return out


def _edgewise_core(
    k: SimplicialComplex,
    coords: Optional[Dict[int, np.ndarray]],
    rank: Dict[int, int],
    split_edges: List[Simplex],
    driving_of_simplex,
) -> SubdivisionResult:
    if k.dimension > 3:
        raise UnsupportedDimensionError(
            f"edgewise subdivision defined for dimension <= 3, got {k.dimension}"
        )
    new_coords = dict(coords) if coords is not None else None
    midpoint_of: Dict[Simplex, int] = {}
    next_id = k.fresh_vertex_id()
    for e in sorted(split_edges):
        midpoint_of[e] = next_id
        if new_coords is not None:
            new_coords[next_id] = 0.5 * (coords[e[0]] + coords[e[1]])
        next_id += 1
    out = SimplicialComplex()
    parent_of: Dict[Simplex, Simplex] = {}
    for s in k.maximal_simplices():
        local = sorted(s, key=lambda v: rank[v])
        if len(s) == 1:
            out.insert_closure(s)
            parent_of[s] = s
            continue
        driving = driving_of_simplex(s, local)
        for piece in _apply_row(reparation_row(len(s) - 1, driving), local, midpoint_of):
            out.insert_closure(piece)
            parent_of[piece] = s
    return SubdivisionResult(out, new_coords, parent_of)


def edgewise_subdivide(g, order: Optional[Sequence[int]] = None) -> SubdivisionResult:
    """Global edgewise subdivision (dimension <= 3): midpoints on every edge,
    each maximal simplex re-triangulated by the full reparation row."""
    k, coords = _split_input(g)
    rank = _make_rank(k, order)
    split_edges = list(k.simplices(1))
    full = lambda s, local: frozenset(range(len(s)))
    return _edgewise_core(k, coords, rank, split_edges, full)


def generalized_edgewise(
    g, fixed: SimplicialComplex, order: Optional[Sequence[int]] = None
) -> SubdivisionResult:
    """Edgewise subdivision holding `fixed` intact: midpoints appear only on
    edges outside `fixed`, and each simplex is repaired by the table row for
    its driving vertices."""
    k, coords = _split_input(g)
    if not fixed.is_subcomplex_of(k):
        raise InvalidInputError("fixed is not a subcomplex of the input")
    rank = _make_rank(k, order)
    split_edges = [e for e in k.simplices(1) if e not in fixed]
    split_set = set(split_edges)

    def driving(s, local):
        pos = {v: i for i, v in enumerate(local)}
        local_edges = {
            tuple(sorted((pos[e[0]], pos[e[1]])))
            for e in _edges_of(s)
            if e in split_set
        }
        return _driving_set(local_edges, len(s))

    return _edgewise_core(k, coords, rank, split_edges, driving)


def _edges_of(s: Simplex):
    from itertools import combinations

    return combinations(s, 2)


def _make_rank(k: SimplicialComplex, order: Optional[Sequence[int]]) -> Dict[int, int]:
    if order is None:
        return {v: v for v in k.vertex_set()}
    oc = OrderedComplex(k, order)
    return oc.rank()


def subdivide(
    g,
    method: str,
    fixed: Optional[SimplicialComplex] = None,
    order: Optional[Sequence[int]] = None,
) -> SubdivisionResult:
    """Dispatch helper: method in {"barycentric", "edgewise"}, generalized
    when `fixed` is given."""
    if method == "barycentric":
        if fixed is None:
            return barycentric_subdivide(g)
        return generalized_barycentric(g, fixed)
    if method == "edgewise":
        if fixed is None:
            return edgewise_subdivide(g, order)
        return generalized_edgewise(g, fixed, order)
    raise InvalidInputError(f"unknown subdivision method {method!r}")


def unsatisfied_subcomplex(
    k: SimplicialComplex, failing_vertices: Iterable[int]
) -> SimplicialComplex:
    """Subcomplex of simplices avoiding every failing vertex.

    Equals the complement of the union of open stars of the failing set;
    holding it fixed confines refinement to where the weak star condition
    fails.
    """
    bad = set(failing_vertices)
    keep = k.vertex_set() - bad
    return k.restricted_to(keep)
