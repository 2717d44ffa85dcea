"""Triangulations of the d-sphere and point location on them.

The base triangulation is the boundary of the regular (d+1)-simplex with
unit vertices; refinements keep all vertices on the sphere (normalization),
optionally rebuilding the complex as the Delaunay complex of the vertex set,
i.e. the boundary of its convex hull.

Every triangulation carries a location hierarchy: one level per refinement
round, linking each maximal simplex to the next-level simplices that can
meet its radial wedge.  For true subdivisions the links form trees; Delaunay
re-triangulations are not subdivisions, so the links form a directed graph
and `locate` keeps one-ring and full-scan fallbacks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .complexes import GeometricComplex, Simplex, SimplicialComplex, VertexMap, is_simplicial
from .errors import (
    DegenerateGeometryError,
    GeometryViolationError,
    InternalError,
    InvalidInputError,
)
from .geometry import (
    DEFAULT_TOLERANCES,
    Tolerances,
    convex_hull,
    point_in_simplex,
    ray_facet_intersection,
)
from .subdivision import SubdivisionResult, subdivide

UNIT_NORM_TOL = 1e-12
CAP_MARGIN = 1e-9


def normalize_vertices(g: GeometricComplex) -> GeometricComplex:
    """Rescale every vertex coordinate to unit norm; combinatorics unchanged."""
    coords = {}
    for v, c in g.coords.items():
        n = np.linalg.norm(c)
        if n == 0.0:
            raise DegenerateGeometryError(f"vertex {v} sits at the origin")
        coords[v] = c / n
    return GeometricComplex(g.complex, coords)


def radial_location(
    geom: GeometricComplex,
    x: np.ndarray,
    eps: float = DEFAULT_TOLERANCES.sign,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Simplex:
    """Naive radial point location: scan every maximal simplex.

    Returns the simplex whose realization the half-line through x pierces
    (the intersection of all pierced facets when the ray hits a shared face).
    Kept deliberately simple; the hierarchy in `locate` is the fast path.
    """
    hits = []
    for s in geom.complex.maximal_simplices():
        hit = ray_facet_intersection(x, geom.points_of(s), tol)
        if hit is None:
            continue
        point, _ = hit
        if point_in_simplex(geom.points_of(s), point, eps, tol):
            hits.append(s)
    if not hits:
        raise GeometryViolationError(
            "radial ray misses the complex; origin is not interior"
        )
    return _common_face(hits)


def _common_face(hits: List[Simplex]) -> Simplex:
    common = set(hits[0])
    for s in hits[1:]:
        common.intersection_update(s)
    if not common:
        raise GeometryViolationError("pierced facets share no common face")
    return tuple(sorted(common))


class _LevelGeometry:
    """Vectorized radial-hit test against the maximal simplices of a level."""

    def __init__(self, geom: GeometricComplex):
        self.geom = geom
        self.maximal: List[Simplex] = geom.complex.maximal_simplices()
        self.index: Dict[Simplex, int] = {s: i for i, s in enumerate(self.maximal)}
        m = geom.ambient_dim
        k = len(self.maximal)
        pts = np.stack([geom.points_of(s) for s in self.maximal])  # (k, m, m)
        if pts.shape[1] != m:
            raise InvalidInputError("level maximal simplices are not facets")
        self.pts = pts
        # Plane of each facet: unit normal and offset.
        if m > 1:
            qs = np.linalg.qr(
                np.swapaxes(pts[:, 1:, :] - pts[:, :1, :], 1, 2), mode="complete"
            )[0]
            self.normals = qs[:, :, -1]
        else:
            self.normals = np.ones((k, 1))
        self.offsets = np.einsum("ij,ij->i", self.normals, pts[:, 0, :])
        # Barycentric solver per facet: lambda = binv @ [y, 1].
        b = np.concatenate(
            [np.swapaxes(pts, 1, 2), np.ones((k, 1, m))], axis=1
        )  # (k, m+1, m)
        self.binv = np.stack([np.linalg.pinv(b[i]) for i in range(k)])

    def hits(self, x: np.ndarray, eps: float) -> List[int]:
        """Indices of facets whose realization the ray through x pierces."""
        return self.hits_among(np.arange(len(self.maximal)), x, eps)

    def hits_among(self, idx, x: np.ndarray, eps: float) -> List[int]:
        idx = np.asarray(idx, dtype=int)
        if idx.size == 0:
            return []
        denom = self.normals[idx] @ x
        offs = self.offsets[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(np.abs(denom) > 1e-14, offs / denom, -1.0)
        ok = t > 1e-14
        if not ok.any():
            return []
        cand = idx[ok]
        y = t[ok, None] * x[None, :]
        rhs = np.concatenate([y, np.ones((y.shape[0], 1))], axis=1)
        lam = np.einsum("kij,kj->ki", self.binv[cand], rhs)
        good = (lam >= -eps).all(axis=1)
        # Guard against off-hull least-squares artifacts on skewed facets.
        recon = np.einsum("ki,kim->km", lam, self.pts[cand])
        good &= np.linalg.norm(recon - y, axis=1) <= 1e-7
        return [int(i) for i in cand[good]]


@dataclass
class LocationHierarchy:
    """Per-round complexes plus candidate links between consecutive levels.

    links[i] maps each maximal simplex of level i to the maximal simplices
    of level i+1 that may intersect it; `exact[i]` records whether the level
    step was a true subdivision (children partition the parent).
    """

    levels: List[GeometricComplex] = field(default_factory=list)
    links: List[Dict[Simplex, List[Simplex]]] = field(default_factory=list)
    exact: List[bool] = field(default_factory=list)
    _caches: List[Optional[_LevelGeometry]] = field(default_factory=list)

    @classmethod
    def single_level(cls, geom: GeometricComplex) -> "LocationHierarchy":
        return cls([geom], [], [], [None])

    def extended(
        self,
        geom: GeometricComplex,
        link: Dict[Simplex, List[Simplex]],
        exact: bool,
    ) -> "LocationHierarchy":
        return LocationHierarchy(
            self.levels + [geom],
            self.links + [link],
            self.exact + [exact],
            self._caches + [None],
        )

    def _cache(self, i: int) -> _LevelGeometry:
        if self._caches[i] is None:
            self._caches[i] = _LevelGeometry(self.levels[i])
        return self._caches[i]

    def _walk(self, x: np.ndarray, eps: float) -> List[Simplex]:
        lvl = self._cache(0)
        hit_ids = lvl.hits(x, eps)
        if not hit_ids:
            raise GeometryViolationError("radial ray misses the base level")
        for i in range(len(self.links)):
            cur = {lvl.maximal[j] for j in hit_ids}
            nxt = self._cache(i + 1)
            cand: Set[int] = set()
            for s in cur:
                for child in self.links[i].get(s, ()):
                    idx = nxt.index.get(child)
                    if idx is not None:
                        cand.add(idx)
            found = nxt.hits_among(sorted(cand), x, eps)
            if not found:
                ring = _one_ring(nxt, cand)
                found = nxt.hits_among(sorted(ring), x, eps)
            if not found:
                found = nxt.hits(x, eps)
            if not found:
                raise GeometryViolationError(f"radial ray misses level {i + 1}")
            lvl, hit_ids = nxt, found
        return [lvl.maximal[j] for j in hit_ids]

    def locate(self, x: np.ndarray, eps: float = DEFAULT_TOLERANCES.sign) -> Simplex:
        """Walk the hierarchy down to the last level; equals the naive scan
        there, with one-ring then full-scan fallbacks on sparse links."""
        return _common_face(self._walk(x, eps))

    def locate_facets(
        self, x: np.ndarray, eps: float = DEFAULT_TOLERANCES.sign
    ) -> List[Simplex]:
        """Maximal simplices of the final level pierced by the ray."""
        return self._walk(x, eps)


def _one_ring(lvl: _LevelGeometry, cand: Set[int]) -> Set[int]:
    verts = {v for j in cand for v in lvl.maximal[j]}
    return {
        j
        for j, s in enumerate(lvl.maximal)
        if not verts.isdisjoint(s)
    } | cand


@dataclass
class SphereTriangulation:
    """Triangulated d-sphere: unit vertex coordinates in R^{d+1}, the ids of
    the d+2 initial regular vertices (never removed), and the location
    hierarchy accumulated by refinement rounds."""

    geom: GeometricComplex
    dim: int
    anchor_ids: Tuple[int, ...]
    hierarchy: LocationHierarchy

    def locate(self, x: np.ndarray, eps: float = DEFAULT_TOLERANCES.sign) -> Simplex:
        return self.hierarchy.locate(x, eps)

    def locate_facets(self, x: np.ndarray, eps: float = DEFAULT_TOLERANCES.sign):
        return self.hierarchy.locate_facets(x, eps)

    def vertex_count(self) -> int:
        return len(self.geom.complex.vertices())

    def validate(self) -> None:
        for v, c in self.geom.coords.items():
            if abs(np.linalg.norm(c) - 1.0) > UNIT_NORM_TOL:
                raise GeometryViolationError(f"vertex {v} is not unit-norm")
        for a in self.anchor_ids:
            if (a,) not in self.geom.complex:
                raise GeometryViolationError(f"anchor {a} missing")
        for s in self.geom.complex.maximal_simplices():
            pts = self.geom.points_of(s)
            hit = ray_facet_intersection(pts.mean(axis=0), pts)
            if hit is None:
                raise GeometryViolationError(
                    "facet plane through the origin; radial projection breaks"
                )


def standard_sphere(d: int) -> SphereTriangulation:
    """Boundary of the regular (d+1)-simplex as a triangulation of S^d.

    The d+2 vertices are the canonical basis of R^{d+2} centered at its
    barycenter, rotated into R^{d+1} and normalized; their pairwise distance
    is sqrt(2(d+2)/(d+1)).
    """
    if d < 0:
        raise InvalidInputError("sphere dimension must be >= 0")
    n = d + 2
    ones = np.ones((n, 1)) / np.sqrt(n)
    q, _ = np.linalg.qr(np.hstack([ones, np.eye(n)]))
    basis = q[:, 1 : n]  # orthonormal basis of the hyperplane sum(x)=0
    centered = np.eye(n) - np.full((n, n), 1.0 / n)
    pts = centered @ basis
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    complex_ = SimplicialComplex()
    for i in range(n):
        complex_.insert_closure(tuple(j for j in range(n) if j != i))
    coords = {i: pts[i] for i in range(n)}
    geom = GeometricComplex(complex_, coords)
    return SphereTriangulation(
        geom, d, tuple(range(n)), LocationHierarchy.single_level(geom)
    )


def delaunay_on_sphere(
    coords: Dict[int, np.ndarray],
    anchor_ids: Sequence[int],
    dim: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Tuple[GeometricComplex, List]:
    """Delaunay complex of unit points: boundary complex of their hull.

    Returns the geometric complex plus the oriented hull facets.  Fails when
    the origin is not interior or a point does not survive as a hull vertex.
    """
    ids = sorted(coords)
    pts = np.array([coords[v] for v in ids])
    if dim == 0:
        complex_ = SimplicialComplex([(v,) for v in ids])
        return GeometricComplex(complex_, dict(coords)), []
    facets = convex_hull(pts, tol)
    if min(f.offset for f in facets) <= tol.sign:
        raise GeometryViolationError("origin is not interior to the hull")
    used = {v for f in facets for v in f.vertices}
    if len(used) != len(ids):
        raise GeometryViolationError(
            f"{len(ids) - len(used)} points fell inside the hull"
        )
    complex_ = SimplicialComplex()
    for f in facets:
        complex_.insert_closure(tuple(ids[i] for i in f.vertices))
    return GeometricComplex(complex_, dict(coords)), facets


def delaunay_sphere_triangulation(
    coords: Dict[int, np.ndarray], anchor_ids: Sequence[int], dim: int
) -> SphereTriangulation:
    geom, _ = delaunay_on_sphere(coords, anchor_ids, dim)
    return SphereTriangulation(
        geom, dim, tuple(anchor_ids), LocationHierarchy.single_level(geom)
    )


def _subdivision_link(result: SubdivisionResult) -> Dict[Simplex, List[Simplex]]:
    link: Dict[Simplex, List[Simplex]] = {}
    for child, parent in result.parent_of.items():
        link.setdefault(parent, []).append(child)
    return link


def _cap_link(
    old: GeometricComplex, new: GeometricComplex
) -> Dict[Simplex, List[Simplex]]:
    """Bounding-cap candidate lists between two sphere complexes.

    Radial wedges stay inside the spherical cap around the normalized
    barycenter, so cap overlap is a safe (over-inclusive) intersection test.
    """

    def caps(geom):
        maximal = geom.complex.maximal_simplices()
        centers = np.empty((len(maximal), geom.ambient_dim))
        radii = np.empty(len(maximal))
        for i, s in enumerate(maximal):
            pts = geom.points_of(s)
            c = pts.mean(axis=0)
            nc = np.linalg.norm(c)
            if nc < 1e-12:
                # Wedge spans a whole hemisphere; link to everything.
                centers[i] = 0.0
                radii[i] = np.pi
                continue
            c = c / nc
            cosang = np.clip(pts @ c, -1.0, 1.0)
            centers[i] = c
            radii[i] = float(np.arccos(cosang.min()))
        return maximal, centers, radii

    old_max, oc, orad = caps(old)
    new_max, nc, nrad = caps(new)
    ang = np.arccos(np.clip(oc @ nc.T, -1.0, 1.0))
    keep = ang <= orad[:, None] + nrad[None, :] + CAP_MARGIN
    return {
        old_max[i]: [new_max[j] for j in np.flatnonzero(keep[i])]
        for i in range(len(old_max))
    }


def sphere_subdivide(
    sphere: SphereTriangulation,
    method: str,
    fixed: Optional[SimplicialComplex] = None,
    delaunay: bool = False,
    normalize: bool = True,
) -> SphereTriangulation:
    """One refinement round on a sphere triangulation.

    method is "barycentric" or "edgewise"; `fixed` switches to the
    generalized subdivision; `delaunay` rebuilds the complex as the Delaunay
    complex of the new (normalized) vertex set.  The hierarchy gains one
    level: a tree link for plain subdivisions, a cap-based candidate graph
    for Delaunay rounds (those are re-triangulations, not subdivisions).
    """
    if sphere.dim == 0:
        return sphere  # nothing to refine on two points
    result = subdivide(sphere.geom, method, fixed=fixed)
    coords = result.coords
    if normalize or delaunay:
        norms = {v: np.linalg.norm(c) for v, c in coords.items()}
        if min(norms.values()) == 0.0:
            raise DegenerateGeometryError("subdivision vertex at the origin")
        coords = {v: c / norms[v] for v, c in coords.items()}
    if delaunay:
        new_geom, _ = delaunay_on_sphere(coords, sphere.anchor_ids, sphere.dim)
        link = _cap_link(sphere.geom, new_geom)
        exact = False
    else:
        new_geom = GeometricComplex(result.complex, coords)
        link = _subdivision_link(result)
        exact = True
    return SphereTriangulation(
        new_geom,
        sphere.dim,
        sphere.anchor_ids,
        sphere.hierarchy.extended(new_geom, link, exact),
    )


def delaunay_subdivide(
    sphere: SphereTriangulation,
    mode: str,
    fixed: Optional[SimplicialComplex] = None,
) -> SphereTriangulation:
    return sphere_subdivide(sphere, mode, fixed=fixed, delaunay=True)


def _retriangulated_star(
    star: List[Simplex],
    coords: Dict[int, np.ndarray],
    v: int,
    dim: int,
) -> Optional[Set[Simplex]]:
    """Fill the hole left by removing v: hull of the neighbors, facets
    visible from v.  Returns None when the patch fails the pseudomanifold
    check (callers fall back to a full rebuild)."""
    neighbors = sorted({u for s in star for u in s if u != v})
    hole_ridges = {tuple(u for u in s if u != v) for s in star}
    if dim == 1:
        if len(neighbors) != 2:
            return None
        patch = {tuple(neighbors)}
    else:
        if len(neighbors) < dim + 2:
            return None
        pts = np.array([coords[u] for u in neighbors])
        try:
            facets = convex_hull(pts)
        except (DegenerateGeometryError, InvalidInputError):
            return None
        vx = coords[v]
        patch = {
            tuple(sorted(neighbors[i] for i in f.vertices))
            for f in facets
            if float(f.normal @ vx) - f.offset > 1e-12
        }
    ridge_count: Dict[Simplex, int] = {}
    for s in patch:
        for i in range(len(s)):
            r = s[:i] + s[i + 1 :]
            ridge_count[r] = ridge_count.get(r, 0) + 1
    for r in hole_ridges:
        if ridge_count.pop(r, 0) != 1:
            return None
    if any(c != 2 for c in ridge_count.values()):
        return None
    return patch


def delaunay_simplify(
    sphere: SphereTriangulation,
    g: VertexMap,
    target: SimplicialComplex,
    rng: np.random.Generator,
) -> Tuple[SphereTriangulation, VertexMap]:
    """Greedy vertex removal under the simplex condition.

    A non-anchor vertex v is removable when the g-image of its closed-star
    vertex set is a simplex of the target; removing it only re-triangulates
    its star, so g stays simplicial and contiguous to the original map.
    Removal order is uniformly random among the currently removable
    vertices.  Stars are re-filled locally (hull of the neighbors), with a
    full Delaunay rebuild as fallback.
    """
    maximal: Set[Simplex] = set(sphere.geom.complex.maximal_simplices())
    coords = dict(sphere.geom.coords)
    protected = set(sphere.anchor_ids)
    gmap = dict(g.images)
    vstars: Dict[int, Set[Simplex]] = {u: set() for u in coords}
    for s in maximal:
        for u in s:
            vstars[u].add(s)

    def removable(v: int) -> bool:
        if v in protected:
            return False
        image = {gmap[v]}
        for s in vstars[v]:
            image.update(gmap[u] for u in s)
        return tuple(sorted(image)) in target

    removed_any = False
    candidates = {v for v in coords if removable(v)}
    while candidates:
        v = sorted(candidates)[rng.integers(len(candidates))]
        star = sorted(vstars[v])
        neighbors = {u for s in star for u in s if u != v}
        patch = _retriangulated_star(star, coords, v, sphere.dim)
        del coords[v]
        del gmap[v]
        if patch is None:
            geom, _ = delaunay_on_sphere(coords, sphere.anchor_ids, sphere.dim)
            new_maximal = set(geom.complex.maximal_simplices())
            touched = {
                u for s in maximal.symmetric_difference(new_maximal) for u in s
            }
            touched.discard(v)
            maximal = new_maximal
            vstars = {u: set() for u in coords}
            for s in maximal:
                for u in s:
                    vstars[u].add(s)
        else:
            touched = neighbors
            for s in star:
                maximal.discard(s)
                for u in s:
                    if u != v:
                        vstars[u].discard(s)
            for s in patch:
                maximal.add(s)
                for u in s:
                    vstars[u].add(s)
            del vstars[v]
        removed_any = True
        candidates.discard(v)
        for w in touched:
            if removable(w):
                candidates.add(w)
            else:
                candidates.discard(w)

    if not removed_any:
        return sphere, VertexMap(gmap)
    complex_ = SimplicialComplex(maximal)
    new_geom = GeometricComplex(complex_, coords)
    hierarchy = sphere.hierarchy.extended(
        new_geom, _cap_link(sphere.geom, new_geom), False
    )
    out = SphereTriangulation(new_geom, sphere.dim, sphere.anchor_ids, hierarchy)
    new_map = VertexMap(gmap)
    if not is_simplicial(new_map, out.geom.complex, target):
        raise InternalError("Delaunay simplification broke simpliciality")
    return out, new_map
