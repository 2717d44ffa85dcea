"""Ordered simplicial products with an interval, mapping cylinders and
cones, and the triangulated ball with quadrant-accelerated location.

The product K x I is the staircase triangulation: for an ordered m-simplex
[x_0 < ... < x_m] and each k, the (m+1)-simplex on the inner copies of
x_0..x_k plus the outer copies of x_k..x_m.  The mapping cylinder of a
simplicial map f glues the outer copy to the codomain through f (collapsing
duplicates); the cone additionally cones the inner copy at an apex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .complexes import (
    GeometricComplex,
    Simplex,
    SimplicialComplex,
    VertexMap,
    is_simplicial,
)
from .errors import InvalidInputError
from .geometry import DEFAULT_TOLERANCES, barycentric_coordinates, point_in_simplex
from .spheres import SphereTriangulation

APEX_RADIUS_TOL = 1e-13
INNER_RADIUS = 0.5  # any value in (0, 1) works; fixed once


def _ranked(order: Optional[Sequence[int]], complex_: SimplicialComplex) -> Dict[int, int]:
    if order is None:
        return {v: v for v in complex_.vertex_set()}
    if set(order) != complex_.vertex_set() or len(set(order)) != len(order):
        raise InvalidInputError("order must enumerate the vertex set exactly once")
    return {v: i for i, v in enumerate(order)}


def _prisms(s: Simplex, rank: Dict[int, int]):
    """Staircase pieces of s x I as (inner part, outer part) vertex splits."""
    ordered = sorted(s, key=lambda v: rank[v])
    for k in range(len(ordered)):
        yield ordered[: k + 1], ordered[k:]


@dataclass
class ProductWithInterval:
    complex: SimplicialComplex
    inner_of: Dict[int, int]  # original vertex -> K x {0} copy
    outer_of: Dict[int, int]  # original vertex -> K x {1} copy
    order: Tuple[int, ...]


def product_with_interval(
    k: SimplicialComplex, order: Optional[Sequence[int]] = None
) -> ProductWithInterval:
    """Triangulated K x [0,1] for an ordered complex K."""
    rank = _ranked(order, k)
    verts = k.vertices()
    inner_of = {v: v for v in verts}
    base = k.fresh_vertex_id()
    outer_of = {v: base + i for i, v in enumerate(verts)}
    out = SimplicialComplex()
    for s in k.maximal_simplices():
        for inner, outer in _prisms(s, rank):
            out.insert_closure(
                [inner_of[v] for v in inner] + [outer_of[v] for v in outer]
            )
    used_order = tuple(sorted(verts, key=lambda v: rank[v]))
    return ProductWithInterval(out, inner_of, outer_of, used_order)


@dataclass
class MappingCylinder:
    complex: SimplicialComplex
    inner_of: Dict[int, int]  # domain vertex -> its copy in the cylinder
    order: Tuple[int, ...]


def mapping_cylinder(
    f: VertexMap,
    source: SimplicialComplex,
    target: SimplicialComplex,
    order: Optional[Sequence[int]] = None,
) -> MappingCylinder:
    """K x I with the outer layer identified to the codomain via f.

    Vertex set is the disjoint union of a fresh copy of the domain vertices
    and the codomain; degenerate prisms (f collapsing vertices) lose
    dimension through duplicate removal.
    """
    if not is_simplicial(f, source, target):
        raise InvalidInputError("map is not simplicial; cannot build the cylinder")
    rank = _ranked(order, source)
    verts = source.vertices()
    base = max(target.fresh_vertex_id(), source.fresh_vertex_id())
    inner_of = {v: base + i for i, v in enumerate(verts)}
    out = SimplicialComplex()
    for s in target.maximal_simplices():
        out.insert_closure(s)
    for s in source.maximal_simplices():
        for inner, outer in _prisms(s, rank):
            out.insert_closure(
                {inner_of[v] for v in inner} | {f(v) for v in outer}
            )
    used_order = tuple(sorted(verts, key=lambda v: rank[v]))
    return MappingCylinder(out, inner_of, used_order)


@dataclass
class MappingCone:
    complex: SimplicialComplex
    inner_of: Dict[int, int]
    apex: int
    order: Tuple[int, ...]


def mapping_cone(
    f: VertexMap,
    source: SimplicialComplex,
    target: SimplicialComplex,
    order: Optional[Sequence[int]] = None,
) -> Tuple[SimplicialComplex, Dict[int, int], int]:
    """Mapping cylinder plus a cone over the inner layer at a fresh apex."""
    cyl = mapping_cylinder(f, source, target, order)
    apex = max(cyl.inner_of.values()) + 1
    out = cyl.complex
    for s in source.maximal_simplices():
        out.insert_closure([cyl.inner_of[v] for v in s] + [apex])
    return out, cyl.inner_of, apex


@dataclass
class BallTriangulation:
    """Cone over a sphere triangulation, realized in R^{d+1}.

    Outer vertices keep the sphere's ids at radius 1, inner copies sit at
    radius 1/2, the apex at the origin.  `quadrants` lists, per outer maximal
    simplex, the d+2 maximal ball simplices in its radial wedge, the
    outermost prism first (the designated fallback for points in the gap
    between the outer chords and the unit sphere).
    """

    geom: GeometricComplex
    sphere: SphereTriangulation
    apex: int
    inner_of: Dict[int, int]
    quadrants: Dict[Simplex, List[Simplex]]
    order: Tuple[int, ...]

    def inner_ids(self) -> Set[int]:
        return set(self.inner_of.values())


def triangulate_ball(
    sphere: SphereTriangulation, order: Optional[Sequence[int]] = None
) -> BallTriangulation:
    """Triangulate the unit ball as the simplicial cone over `sphere`."""
    k = sphere.geom.complex
    rank = _ranked(order, k)
    verts = k.vertices()
    base = k.fresh_vertex_id()
    inner_of = {v: base + i for i, v in enumerate(verts)}
    apex = base + len(verts)
    coords: Dict[int, np.ndarray] = {}
    for v in verts:
        coords[v] = np.asarray(sphere.geom.coords[v], dtype=float)
        coords[inner_of[v]] = INNER_RADIUS * coords[v]
    coords[apex] = np.zeros(sphere.geom.ambient_dim)
    out = SimplicialComplex()
    quadrants: Dict[Simplex, List[Simplex]] = {}
    for s in k.maximal_simplices():
        pieces = []
        for inner, outer in _prisms(s, rank):
            piece = tuple(
                sorted([inner_of[v] for v in inner] + list(outer))
            )
            out.insert_closure(piece)
            pieces.append(piece)
        cone_piece = tuple(sorted([inner_of[v] for v in s] + [apex]))
        out.insert_closure(cone_piece)
        # First entry covers the full outer facet of the wedge.
        pieces_sorted = [pieces[0]] + pieces[1:] + [cone_piece]
        quadrants[s] = pieces_sorted
    used_order = tuple(sorted(verts, key=lambda v: rank[v]))
    return BallTriangulation(
        GeometricComplex(out, coords), sphere, apex, inner_of, quadrants, used_order
    )


def ball_locate(
    ball: BallTriangulation, x: np.ndarray, eps: float = DEFAULT_TOLERANCES.sign
) -> Simplex:
    """Locate a point of the unit ball in the cone triangulation.

    Radially locate x on the outer sphere, test the simplices of the hit
    quadrants, and return the intersection of the containing ones; points in
    the outer gap fall back to the designated outer simplex of the quadrant.
    """
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r > 1.0 + eps:
        raise InvalidInputError(f"point has norm {r} > 1")
    if r <= APEX_RADIUS_TOL:
        return (ball.apex,)
    facets = sorted(ball.sphere.locate_facets(x / r, eps))
    seen: Set[Simplex] = set()
    containing: List[Simplex] = []
    for facet in facets:
        for s in ball.quadrants[facet]:
            if s in seen:
                continue
            seen.add(s)
            if point_in_simplex(ball.geom.points_of(s), x, eps):
                containing.append(s)
    if not containing:
        return ball.quadrants[facets[0]][0]
    return carrier_face(ball.geom, min(containing), x, eps)


def carrier_face(
    geom: GeometricComplex, s: Simplex, x: np.ndarray, eps: float
) -> Simplex:
    """Face of s whose relative interior holds x: vertices with weight > eps."""
    bc = barycentric_coordinates(geom.points_of(s), x)
    face = tuple(v for v, w in zip(s, bc.weights) if w > eps)
    return face if face else s


def glue_ball(
    ball: BallTriangulation,
    g: VertexMap,
    target: SimplicialComplex,
) -> Tuple[SimplicialComplex, Dict[int, int]]:
    """Mapping cone of g realized by relabeling the ball.

    Outer ids map through g into the target, inner ids and the apex get
    fresh ids above the target's.  Returns the glued complex and the full
    relabeling of ball ids, which turns ball-located simplices into glued
    ones.
    """
    if not is_simplicial(g, ball.sphere.geom.complex, target):
        raise InvalidInputError("gluing map is not simplicial")
    relabel: Dict[int, int] = {}
    base = target.fresh_vertex_id()
    inner_sorted = sorted(ball.inner_of.values())
    for i, b in enumerate(inner_sorted):
        relabel[b] = base + i
    relabel[ball.apex] = base + len(inner_sorted)
    for v in ball.sphere.geom.complex.vertices():
        relabel[v] = g(v)
    out = SimplicialComplex()
    for s in target.maximal_simplices():
        out.insert_closure(s)
    for s in ball.geom.complex.maximal_simplices():
        out.insert_closure({relabel[v] for v in s})
    return out, relabel
