"""Abstract and geometric simplicial complexes.

A simplex is stored as a sorted tuple of non-negative integer vertex ids.
Complexes keep the full closure (every face of a stored simplex is stored),
trading memory for O(1) membership tests, which dominate the weak-star
checks of the approximation loop.
"""

from __future__ import annotations

from itertools import combinations
from typing import Dict, Iterable, Iterator, Optional, Set, Tuple

import numpy as np

from .errors import (
    DegenerateGeometryError,
    InvalidInputError,
    UndefinedResultError,
)

Simplex = Tuple[int, ...]


def as_simplex(vertices: Iterable[int]) -> Simplex:
    """Normalize an iterable of vertex ids into a valid simplex tuple.

    Raises InvalidInputError on empty input, repeats or negative ids.
    """
    s = tuple(sorted(vertices))
    if not s:
        raise InvalidInputError("empty simplex")
    if s[0] < 0:
        raise InvalidInputError(f"negative vertex id in {s}")
    if any(s[i] == s[i + 1] for i in range(len(s) - 1)):
        raise InvalidInputError(f"repeated vertex id in {s}")
    return s


def faces(s: Simplex) -> Iterator[Simplex]:
    """All non-empty subsets of a simplex, itself included."""
    for k in range(1, len(s) + 1):
        yield from combinations(s, k)


def boundary_faces(s: Simplex) -> Iterator[Simplex]:
    """Codimension-1 faces of a simplex, in vertex-drop order."""
    for i in range(len(s)):
        yield s[:i] + s[i + 1 :]


class SimplicialComplex:
    """Finite abstract simplicial complex, closed under non-empty subsets.

    Construction is single-writer: build it with `insert_closure`, then treat
    it as immutable.  All query methods are pure.
    """

    def __init__(self, maximal: Optional[Iterable[Iterable[int]]] = None):
        self._simplices: Set[Simplex] = set()
        self._maximal_cache: Optional[list] = None
        self._star_cache: Optional[Dict[int, list]] = None
        if maximal is not None:
            for s in maximal:
                self.insert_closure(s)

    # -- construction -------------------------------------------------------

    def insert_closure(self, s: Iterable[int]) -> "SimplicialComplex":
        """Insert a simplex together with all its faces. Idempotent."""
        s = as_simplex(s)
        if s in self._simplices:
            return self
        self._maximal_cache = None
        self._star_cache = None
        for f in faces(s):
            self._simplices.add(f)
        return self

    def copy(self) -> "SimplicialComplex":
        dup = SimplicialComplex()
        dup._simplices = set(self._simplices)
        return dup

    def vertex_star(self, v: int) -> list:
        """All simplices containing v, via a lazily built per-vertex index."""
        if self._star_cache is None:
            index: Dict[int, list] = {}
            for s in self._simplices:
                for w in s:
                    index.setdefault(w, []).append(s)
            self._star_cache = index
        return self._star_cache.get(v, [])

    # -- basic queries -------------------------------------------------------

    def __contains__(self, s: Iterable[int]) -> bool:
        return tuple(sorted(s)) in self._simplices

    def __len__(self) -> int:
        return len(self._simplices)

    def __iter__(self) -> Iterator[Simplex]:
        return iter(self._simplices)

    def __eq__(self, other) -> bool:
        return isinstance(other, SimplicialComplex) and self._simplices == other._simplices

    def simplices(self, dim: Optional[int] = None) -> Iterator[Simplex]:
        if dim is None:
            return iter(self._simplices)
        return (s for s in self._simplices if len(s) == dim + 1)

    def sorted_simplices(self, dim: int) -> list:
        return sorted(self.simplices(dim))

    @property
    def dimension(self) -> int:
        """Max simplex dimension; -1 for the empty complex."""
        if not self._simplices:
            return -1
        return max(len(s) for s in self._simplices) - 1

    def vertices(self) -> list:
        return sorted(s[0] for s in self._simplices if len(s) == 1)

    def vertex_set(self) -> Set[int]:
        return {s[0] for s in self._simplices if len(s) == 1}

    def fresh_vertex_id(self) -> int:
        """Smallest id strictly above every vertex currently present."""
        vs = self.vertex_set()
        return max(vs) + 1 if vs else 0

    def simplex_counts(self) -> list:
        """Number of simplices per dimension, index = dimension."""
        counts = [0] * (self.dimension + 1)
        for s in self._simplices:
            counts[len(s) - 1] += 1
        return counts

    def maximal_simplices(self) -> list:
        """Simplices not strictly contained in another simplex, sorted."""
        if self._maximal_cache is None:
            non_maximal: Set[Simplex] = set()
            for s in self._simplices:
                if len(s) > 1:
                    non_maximal.update(boundary_faces(s))
            out = [s for s in self._simplices if s not in non_maximal]
            self._maximal_cache = sorted(out, key=lambda s: (len(s), s))
        return self._maximal_cache

    def cofaces(self, s: Simplex) -> list:
        """All simplices containing s (s included)."""
        s_set = set(s)
        return [t for t in self.vertex_star(s[0]) if s_set.issubset(t)]

    # -- star / link / skeleton ----------------------------------------------

    def star(self, s) -> Set[Simplex]:
        """Open star: all simplices containing s.  Not a complex in general."""
        s = as_simplex(s) if not isinstance(s, tuple) else s
        if s not in self._simplices:
            raise InvalidInputError(f"{s} is not a simplex of the complex")
        return set(self.cofaces(s))

    def closed_star(self, s) -> "SimplicialComplex":
        """Smallest subcomplex containing the open star of s."""
        out = SimplicialComplex()
        for t in self.star(s):
            out.insert_closure(t)
        return out

    def link(self, s) -> "SimplicialComplex":
        """Closed star minus star: simplices t disjoint from s with s+t present."""
        s = as_simplex(s)
        if s not in self._simplices:
            raise InvalidInputError(f"{s} is not a simplex of the complex")
        s_set = set(s)
        out = SimplicialComplex()
        for t in self.cofaces(s):
            if len(t) > len(s):
                out._simplices.add(tuple(v for v in t if v not in s_set))
        return out

    def closed_star_vertices(self, v: int) -> Set[int]:
        """Vertex set of the closed star of a vertex: v plus its neighbors."""
        if (v,) not in self._simplices:
            raise InvalidInputError(f"unknown vertex {v}")
        out = {v}
        for s in self.vertex_star(v):
            if len(s) == 2:
                out.update(s)
        return out

    def skeleton(self, i: int) -> "SimplicialComplex":
        if i < 0:
            raise InvalidInputError("skeleton index must be >= 0")
        out = SimplicialComplex()
        out._simplices = {s for s in self._simplices if len(s) <= i + 1}
        return out

    def euler_characteristic(self) -> int:
        chi = 0
        for s in self._simplices:
            chi += -1 if len(s) % 2 == 0 else 1
        return chi

    def is_subcomplex_of(self, other: "SimplicialComplex") -> bool:
        return self._simplices.issubset(other._simplices)

    def restricted_to(self, keep: Set[int]) -> "SimplicialComplex":
        """Full subcomplex on the simplices entirely inside `keep`."""
        out = SimplicialComplex()
        out._simplices = {s for s in self._simplices if keep.issuperset(s)}
        return out

    def __repr__(self) -> str:
        return (
            f"SimplicialComplex(dim={self.dimension}, "
            f"counts={self.simplex_counts()})"
        )


def insert_closure(complex_: SimplicialComplex, s: Iterable[int]) -> SimplicialComplex:
    """Functional spelling of SimplicialComplex.insert_closure."""
    return complex_.insert_closure(s)


class VertexMap:
    """Map between vertex sets, possibly simplicial.

    Wraps a plain dict `images`; simpliciality against a pair of complexes is
    checkable with `is_simplicial`.
    """

    def __init__(self, images: Dict[int, int]):
        self.images = dict(images)

    def __call__(self, v: int) -> int:
        return self.images[v]

    def __eq__(self, other) -> bool:
        return isinstance(other, VertexMap) and self.images == other.images

    def __len__(self) -> int:
        return len(self.images)

    def apply(self, s: Iterable[int]) -> Simplex:
        """Image of a simplex with duplicates removed."""
        return tuple(sorted({self.images[v] for v in s}))

    def restrict(self, vertices: Iterable[int]) -> "VertexMap":
        return VertexMap({v: self.images[v] for v in vertices})

    def compose(self, then: "VertexMap") -> "VertexMap":
        """Returns then o self."""
        return VertexMap({v: then.images[w] for v, w in self.images.items()})

    def is_total_on(self, complex_: SimplicialComplex) -> bool:
        return set(complex_.vertices()).issubset(self.images.keys())

    def __repr__(self) -> str:
        return f"VertexMap({len(self.images)} vertices)"


def is_simplicial(
    f: VertexMap, source: SimplicialComplex, target: SimplicialComplex
) -> bool:
    """True iff the image of every simplex of `source` is a simplex of `target`."""
    if not f.is_total_on(source):
        raise InvalidInputError("vertex map is not total on the source complex")
    # Maximal simplices suffice: images of faces are faces of images.
    return all(f.apply(s) in target for s in source.maximal_simplices())


class GeometricComplex:
    """Simplicial complex with vertex coordinates in a common R^n."""

    def __init__(self, complex_: SimplicialComplex, coords: Dict[int, np.ndarray]):
        self.complex = complex_
        self.coords = {v: np.asarray(c, dtype=float) for v, c in coords.items()}
        dims = {c.shape for c in self.coords.values()}
        if len(dims) > 1:
            raise InvalidInputError(f"mixed coordinate dimensions: {dims}")
        for v in complex_.vertices():
            if v not in self.coords:
                raise InvalidInputError(f"vertex {v} has no coordinates")

    @property
    def ambient_dim(self) -> int:
        if not self.coords:
            return 0
        return next(iter(self.coords.values())).shape[0]

    def points_of(self, s: Iterable[int]) -> np.ndarray:
        """Stack of coordinates of a simplex, one row per vertex."""
        return np.array([self.coords[v] for v in s])

    def barycenter_of(self, s: Iterable[int]) -> np.ndarray:
        return self.points_of(s).mean(axis=0)

    def max_edge_length(self) -> float:
        best = None
        for a, b in self.complex.simplices(1):
            d = float(np.linalg.norm(self.coords[a] - self.coords[b]))
            if best is None or d > best:
                best = d
        if best is None:
            raise UndefinedResultError("complex has no edges")
        return best

    def validate_affine_independence(self, eps_rank: float = 1e-10) -> None:
        """Debug-mode check: every simplex spans an affinely independent set."""
        for s in self.complex.maximal_simplices():
            pts = self.points_of(s)
            if len(s) == 1:
                continue
            diffs = pts[1:] - pts[0]
            rank = np.linalg.matrix_rank(diffs, tol=eps_rank)
            if rank < len(s) - 1:
                raise DegenerateGeometryError(
                    f"simplex {s} is affinely dependent (rank {rank})"
                )

    def copy(self) -> "GeometricComplex":
        return GeometricComplex(self.complex.copy(), dict(self.coords))

    def __repr__(self) -> str:
        return f"GeometricComplex(n={self.ambient_dim}, {self.complex!r})"


# -- .simp text format -------------------------------------------------------


def save_simp(complex_: SimplicialComplex, path, header: str = "") -> None:
    """Write maximal simplices, one whitespace-separated line each.

    Lines starting with '#' are comments; the loader restores the closure.
    """
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for s in complex_.maximal_simplices():
            fh.write(" ".join(str(v) for v in s) + "\n")


def load_simp(path) -> SimplicialComplex:
    out = SimplicialComplex()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                ids = [int(tok) for tok in line.split()]
            except ValueError as exc:
                raise InvalidInputError(f"{path}:{lineno}: {exc}") from exc
            if ids != sorted(ids):
                raise InvalidInputError(
                    f"{path}:{lineno}: vertex ids must be ascending"
                )
            out.insert_closure(ids)
    return out
