"""Numerical kernels: barycentric coordinates, containment and ray tests,
and a dimension-generic incremental convex hull for ambient dimension <= 5.

All sign tests go through a single tolerance record.  Hull predicates run on
deterministically jittered copies of the input points; output facets keep the
unperturbed coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from .errors import DegenerateGeometryError, InternalError, InvalidInputError

# Magnitude of the symbolic-style perturbation used inside hull predicates.
PERTURBATION_SCALE = 1e-9
_PERTURBATION_SEED = 0x9E3779B9
_INSERTION_SEED = 0x5DEECE66D


@dataclass(frozen=True)
class Tolerances:
    """Tolerance knobs for the geometric predicates.

    sign      : slack for ">= 0" tests on barycentric weights
    affine    : accepted residual when projecting onto an affine hull
    hull      : slack for the empty-halfspace test of hull facets
    weight_sum: accepted deviation of barycentric weights from summing to 1
    rank      : threshold for affine-independence ranks
    """

    sign: float = 1e-10
    affine: float = 1e-8
    hull: float = 1e-9
    weight_sum: float = 1e-9
    rank: float = 1e-10


DEFAULT_TOLERANCES = Tolerances()


@dataclass
class BarycentricCoords:
    weights: np.ndarray
    residual: float

    def recombine(self, simplex_points: np.ndarray) -> np.ndarray:
        return self.weights @ simplex_points


def barycentric_coordinates(
    simplex_points: np.ndarray,
    x: np.ndarray,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> BarycentricCoords:
    """Weights lambda with sum(lambda) = 1 and sum(lambda_i v_i) ~ x.

    When x lies off the affine hull, the least-squares projection weights are
    returned and the distance to the hull is reported as `residual`.
    """
    pts = np.asarray(simplex_points, dtype=float)
    x = np.asarray(x, dtype=float)
    k = pts.shape[0]
    a = np.vstack([pts.T, np.ones((1, k))])
    b = np.concatenate([x, [1.0]])
    w, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < k:
        raise DegenerateGeometryError("affinely dependent simplex points")
    residual = float(np.linalg.norm(a @ w - b))
    return BarycentricCoords(w, residual)


def point_in_simplex(
    simplex_points: np.ndarray,
    x: np.ndarray,
    eps: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> bool:
    """True iff all barycentric weights are >= -eps and x is on the hull."""
    bc = barycentric_coordinates(simplex_points, x, tol)
    if bc.residual > tol.affine:
        return False
    return bool(np.all(bc.weights >= -eps))


def ray_facet_intersection(
    direction: np.ndarray,
    facet_points: np.ndarray,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Optional[Tuple[np.ndarray, float]]:
    """Intersection of the half-line {t * direction, t > 0} with the affine
    hyperplane spanned by `facet_points`.

    Returns (point, t) or None when the ray is parallel or hits at t <= 0.
    A hyperplane through the origin has no well-defined radial hit.
    """
    pts = np.asarray(facet_points, dtype=float)
    x = np.asarray(direction, dtype=float)
    normal = _hyperplane_normal(pts)
    offset = float(normal @ pts[0])
    denom = float(normal @ x)
    if abs(denom) <= tol.sign:
        if abs(offset) <= tol.sign:
            raise DegenerateGeometryError(
                "ray lies inside the facet hyperplane; intersection is ill-posed"
            )
        return None  # parallel
    t = offset / denom
    if t <= tol.sign:
        return None
    return t * x, t


def _hyperplane_normal(pts: np.ndarray) -> np.ndarray:
    """Unit normal of the hyperplane spanned by m points in R^m."""
    m = pts.shape[1]
    if pts.shape[0] != m:
        raise InvalidInputError(
            f"facet needs {m} points in R^{m}, got {pts.shape[0]}"
        )
    if m == 1:
        return np.ones(1)
    diffs = (pts[1:] - pts[0]).T  # m x (m-1)
    q, _ = np.linalg.qr(diffs, mode="complete")
    normal = q[:, -1]
    if np.linalg.norm(diffs.T @ normal, np.inf) > 1e-7 * max(
        1.0, float(np.abs(diffs).max())
    ):
        raise DegenerateGeometryError("degenerate facet: no unique normal")
    return normal


# -- convex hull --------------------------------------------------------------


@dataclass
class HullFacet:
    """Oriented facet of a convex hull.

    `vertices` are indices into the input point array; `normal`/`offset`
    describe the supporting hyperplane with all input points on the side
    normal . x <= offset (up to the hull tolerance).
    """

    vertices: Tuple[int, ...]
    normal: np.ndarray
    offset: float


@dataclass
class _Facet:
    vertices: Tuple[int, ...]
    normal: np.ndarray
    offset: float
    outside: List[int] = field(default_factory=list)


def _facet_planes_batch(
    pts: np.ndarray, verts_list: List[Tuple[int, ...]], interior: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Outward unit normals and offsets for a batch of facets (one QR call)."""
    m = pts.shape[1]
    corners = pts[np.asarray(verts_list)]  # (k, m, m)
    if m == 1:
        normals = np.ones((len(verts_list), 1))
    else:
        diffs = np.swapaxes(corners[:, 1:, :] - corners[:, :1, :], 1, 2)
        q = np.linalg.qr(diffs, mode="complete")[0]
        normals = q[:, :, -1]
    offsets = np.einsum("km,km->k", normals, corners[:, 0, :])
    flip = normals @ interior > offsets
    normals[flip] *= -1.0
    offsets[flip] *= -1.0
    return normals, offsets


def _initial_simplex(pts: np.ndarray, tol: Tolerances) -> List[int]:
    n, m = pts.shape
    first = int(np.lexsort(pts.T[::-1])[0])
    chosen = [first]
    basis = np.zeros((m, 0))
    for _ in range(m):
        rel = pts - pts[chosen[0]]
        if basis.shape[1]:
            proj = rel @ basis
            rel = rel - proj @ basis.T
        dist = np.linalg.norm(rel, axis=1)
        best = int(np.argmax(dist))
        if dist[best] <= tol.rank:
            raise DegenerateGeometryError(
                "points are affinely dependent; convex hull is not full-dimensional"
            )
        chosen.append(best)
        vec = rel[best] / dist[best]
        basis = np.hstack([basis, vec[:, None]])
    return chosen


def convex_hull(
    points: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES
) -> List[HullFacet]:
    """Randomized incremental convex hull with conflict lists.

    Works in ambient dimension 1..5.  Degeneracies are broken by a
    deterministic jitter (magnitude PERTURBATION_SCALE, a fixed function of
    the point index) applied only inside the predicates; reported facet
    planes are recomputed from the original coordinates.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise InvalidInputError("points must be a 2-d array")
    n, m = pts.shape
    if not 1 <= m <= 5:
        raise InvalidInputError(f"ambient dimension {m} outside supported range 1..5")
    if n < m + 1:
        raise InvalidInputError(f"need at least {m + 1} points in R^{m}")

    if m == 1:
        lo, hi = int(np.argmin(pts[:, 0])), int(np.argmax(pts[:, 0]))
        if pts[lo, 0] == pts[hi, 0]:
            raise DegenerateGeometryError("all points coincide")
        return [
            HullFacet((lo,), np.array([-1.0]), -float(pts[lo, 0])),
            HullFacet((hi,), np.array([1.0]), float(pts[hi, 0])),
        ]

    jitter = np.random.default_rng(_PERTURBATION_SEED).standard_normal((n, m))
    work = pts + PERTURBATION_SCALE * jitter

    seed_ids = _initial_simplex(work, tol)
    interior = work[seed_ids].mean(axis=0)

    facets: Dict[int, _Facet] = {}
    ridge_map: Dict[frozenset, List[int]] = {}
    next_fid = 0

    def add_facets(verts_list: List[Tuple[int, ...]]) -> List[int]:
        nonlocal next_fid
        normals, offsets = _facet_planes_batch(work, verts_list, interior)
        fids = []
        for verts, normal, offset in zip(verts_list, normals, offsets):
            fid = next_fid
            next_fid += 1
            facets[fid] = _Facet(verts, normal, float(offset))
            for i in range(len(verts)):
                ridge = frozenset(verts[:i] + verts[i + 1 :])
                ridge_map.setdefault(ridge, []).append(fid)
            fids.append(fid)
        return fids

    def drop_facet(fid: int) -> _Facet:
        f = facets.pop(fid)
        verts = f.vertices
        for i in range(len(verts)):
            ridge = frozenset(verts[:i] + verts[i + 1 :])
            ridge_map[ridge].remove(fid)
            if not ridge_map[ridge]:
                del ridge_map[ridge]
        return f

    add_facets(
        [
            tuple(sorted(seed_ids[:combo] + seed_ids[combo + 1 :]))
            for combo in range(m + 1)
        ]
    )

    height = lambda f, p: float(f.normal @ work[p]) - f.offset

    def distribute(points: List[int], fids: List[int]) -> None:
        """Assign each point to the first listed facet it lies above."""
        if not points or not fids:
            return
        heights = (
            work[points] @ np.stack([facets[f].normal for f in fids]).T
            - np.array([facets[f].offset for f in fids])
        )
        above = heights > tol.hull
        for row, p in enumerate(points):
            hit = np.argmax(above[row])
            if above[row, hit]:
                fid = fids[hit]
                facets[fid].outside.append(p)
                point_home[p] = fid

    point_home: Dict[int, int] = {}
    remaining = [i for i in range(n) if i not in set(seed_ids)]
    distribute(remaining, list(facets))

    order = np.random.default_rng(_INSERTION_SEED).permutation(remaining)
    for p in map(int, order):
        start = point_home.pop(p, None)
        if start is None:
            continue  # interior to the current hull
        if start not in facets:
            raise InternalError("stale conflict pointer")
        # Flood fill of the facets visible from p, starting at its home.
        visible = {start}
        queue = [start]
        while queue:
            fid = queue.pop()
            verts = facets[fid].vertices
            for i in range(len(verts)):
                ridge = frozenset(verts[:i] + verts[i + 1 :])
                for nb in ridge_map[ridge]:
                    if nb not in visible and height(facets[nb], p) > tol.hull:
                        visible.add(nb)
                        queue.append(nb)
        horizon = []
        for fid in visible:
            verts = facets[fid].vertices
            for i in range(len(verts)):
                ridge = frozenset(verts[:i] + verts[i + 1 :])
                others = [x for x in ridge_map[ridge] if x not in visible]
                if others:
                    horizon.append(ridge)
        orphans: List[int] = []
        for fid in visible:
            for q in drop_facet(fid).outside:
                if q != p:
                    point_home.pop(q, None)
                    orphans.append(q)
        new_ids = add_facets([tuple(sorted(ridge | {p})) for ridge in horizon])
        distribute(orphans, new_ids)

    true_interior = pts[seed_ids].mean(axis=0)
    verts_list = [f.vertices for f in facets.values()]
    normals, offsets = _facet_planes_batch(pts, verts_list, true_interior)
    out = [
        HullFacet(tuple(sorted(verts)), normal, float(offset))
        for verts, normal, offset in zip(verts_list, normals, offsets)
    ]
    out.sort(key=lambda hf: hf.vertices)
    return out
