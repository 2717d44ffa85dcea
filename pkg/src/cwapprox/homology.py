"""Simplicial homology over Z and Z/2 via integer matrix reduction.

Boundary matrices use the signs induced by the sorted vertex order.  The
integer reduction keeps exact arithmetic (Python ints), picks small pivots
to control coefficient growth, and prefers unit pivots to limit fill-in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Dict, List, Optional, Set, Tuple

from .complexes import SimplicialComplex, VertexMap, boundary_faces
from .errors import InconsistencyError, InvalidInputError


class IntegerMatrix:
    """Sparse integer matrix with row and column adjacency indices."""

    def __init__(self, n_rows: int, n_cols: int):
        self.shape = (n_rows, n_cols)
        self.entries: Dict[Tuple[int, int], int] = {}
        self.rows: Dict[int, Set[int]] = {}
        self.cols: Dict[int, Set[int]] = {}

    def __setitem__(self, key: Tuple[int, int], value: int) -> None:
        r, c = key
        if value == 0:
            if (r, c) in self.entries:
                del self.entries[(r, c)]
                self.rows[r].discard(c)
                self.cols[c].discard(r)
        else:
            self.entries[(r, c)] = value
            self.rows.setdefault(r, set()).add(c)
            self.cols.setdefault(c, set()).add(r)

    def __getitem__(self, key: Tuple[int, int]) -> int:
        return self.entries.get(key, 0)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def copy(self) -> "IntegerMatrix":
        out = IntegerMatrix(*self.shape)
        for (r, c), v in self.entries.items():
            out[r, c] = v
        return out

    def to_dense(self) -> List[List[int]]:
        out = [[0] * self.shape[1] for _ in range(self.shape[0])]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    @classmethod
    def from_dense(cls, rows: List[List[int]]) -> "IntegerMatrix":
        n = len(rows)
        m = len(rows[0]) if n else 0
        out = cls(n, m)
        for r in range(n):
            for c in range(m):
                if rows[r][c]:
                    out[r, c] = int(rows[r][c])
        return out

    def matmul_dense(self, other: "IntegerMatrix") -> List[List[int]]:
        if self.shape[1] != other.shape[0]:
            raise InvalidInputError("shape mismatch")
        out = [[0] * other.shape[1] for _ in range(self.shape[0])]
        for (r, k), v in self.entries.items():
            for c in other.rows.get(k, ()):
                out[r][c] += v * other[k, c]
        return out


def boundary_matrix(complex_: SimplicialComplex, k: int) -> IntegerMatrix:
    """Boundary operator from k-chains to (k-1)-chains.

    Columns are indexed by the sorted k-simplices, rows by the sorted
    (k-1)-simplices; the i-th face (i-th vertex dropped) gets sign (-1)^i.
    """
    if not 1 <= k <= max(complex_.dimension, 0):
        raise InvalidInputError(f"degree {k} out of range for {complex_!r}")
    rows = {s: i for i, s in enumerate(complex_.sorted_simplices(k - 1))}
    cols = complex_.sorted_simplices(k)
    mat = IntegerMatrix(len(rows), len(cols))
    for j, s in enumerate(cols):
        for i, f in enumerate(boundary_faces(s)):
            mat[rows[f], j] = -1 if i % 2 else 1
    return mat


def _symmetric_div(e: int, v: int) -> int:
    """Quotient q minimizing |e - q*v|."""
    q, r = divmod(e, v)
    if 2 * abs(r) > abs(v):
        q += 1
    return q


def _divisibility_chain(diag: List[int]) -> List[int]:
    d = [abs(x) for x in diag]
    changed = True
    while changed:
        changed = False
        for i in range(len(d)):
            for j in range(i + 1, len(d)):
                if d[j] % d[i]:
                    g = gcd(d[i], d[j])
                    d[i], d[j] = g, d[i] * d[j] // g
                    changed = True
    return sorted(d)


def invariant_factors(mat: IntegerMatrix) -> List[int]:
    """Nonzero diagonal of the Smith normal form, in divisibility order.

    Sparse elimination with pivoting on the smallest nonzero entry (unit
    pivots first, Markowitz tie-break on fill).
    """
    m = mat.copy()
    diag: List[int] = []
    while m.entries:
        pivot = None
        best = None
        for (r, c), v in m.entries.items():
            score = (abs(v) != 1, abs(v), len(m.rows[r]) + len(m.cols[c]))
            if best is None or score < best:
                best, pivot = score, (r, c)
            if score[0] == 0 and score[2] <= 2:
                break  # isolated unit pivot, cannot do better
        r, c = pivot
        while True:
            v = m[r, c]
            moved = False
            for r2 in list(m.cols[c]):
                if r2 == r:
                    continue
                q = _symmetric_div(m[r2, c], v)
                if q:
                    for c2 in list(m.rows[r]):
                        m[r2, c2] = m[r2, c2] - q * m[r, c2]
                if m[r2, c]:
                    r, c = r2, c  # smaller remainder becomes the pivot
                    moved = True
                    break
            if moved:
                continue
            for c2 in list(m.rows[r]):
                if c2 == c:
                    continue
                q = _symmetric_div(m[r, c2], v)
                if q:
                    for r2 in list(m.cols[c]):
                        m[r2, c2] = m[r2, c2] - q * m[r2, c]
                if m[r, c2]:
                    r, c = r, c2
                    moved = True
                    break
            if not moved:
                break
        diag.append(abs(m[r, c]))
        for c2 in list(m.rows[r]):
            m[r, c2] = 0
        for r2 in list(m.cols.get(c, set())):
            m[r2, c] = 0
    return _divisibility_chain(diag)


def rank_z(mat: IntegerMatrix) -> int:
    return len(invariant_factors(mat))


def rank_mod2(mat: IntegerMatrix) -> int:
    """Rank over GF(2) by bitmask elimination over the columns."""
    pivots: Dict[int, int] = {}
    rank = 0
    for c in range(mat.shape[1]):
        word = 0
        for r in mat.cols.get(c, ()):
            if mat[r, c] % 2:
                word |= 1 << r
        while word:
            top = word.bit_length() - 1
            if top in pivots:
                word ^= pivots[top]
            else:
                pivots[top] = word
                rank += 1
                break
    return rank


def smith_normal_form(
    mat: IntegerMatrix, with_transforms: bool = False
) -> Tuple[List[int], Optional[List[List[int]]], Optional[List[List[int]]]]:
    """Diagonal of the Smith normal form of `mat`, padded with zeros.

    With `with_transforms`, also returns unimodular U (rows) and V (cols)
    such that U * mat * V is the diagonal matrix; this path runs the dense
    textbook reduction and is meant for small matrices.
    """
    if not with_transforms:
        d = invariant_factors(mat)
        d += [0] * (min(mat.shape) - len(d))
        return d, None, None

    n, m = mat.shape
    a = [row[:] for row in mat.to_dense()]
    u = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    v = [[1 if i == j else 0 for j in range(m)] for i in range(m)]

    def row_op(dst, src, q):
        for j in range(m):
            a[dst][j] -= q * a[src][j]
        for j in range(n):
            u[dst][j] -= q * u[src][j]

    def col_op(dst, src, q):
        for i in range(n):
            a[i][dst] -= q * a[i][src]
        for i in range(m):
            v[i][dst] -= q * v[i][src]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(n, m):
        pivot = None
        best = None
        for i in range(t, n):
            for j in range(t, m):
                if a[i][j] and (best is None or abs(a[i][j]) < best):
                    best, pivot = abs(a[i][j]), (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        while True:
            dirty = False
            for i in range(t + 1, n):
                if a[i][t]:
                    q = _symmetric_div(a[i][t], a[t][t])
                    row_op(i, t, q)
                    if a[i][t]:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, m):
                if a[t][j]:
                    q = _symmetric_div(a[t][j], a[t][t])
                    col_op(j, t, q)
                    if a[t][j]:
                        swap_cols(t, j)
                        dirty = True
            if dirty:
                continue
            off = next(
                (
                    (i, j)
                    for i in range(t + 1, n)
                    for j in range(t + 1, m)
                    if a[i][j] % a[t][t]
                ),
                None,
            )
            if off is None:
                break
            row_op(t, off[0], -1)  # pull the offending row up, then re-clear
        if a[t][t] < 0:
            for j in range(m):
                a[t][j] = -a[t][j]
            for j in range(n):
                u[t][j] = -u[t][j]
        t += 1
    return [a[i][i] for i in range(min(n, m))], u, v


@dataclass
class HomologyProfile:
    """Per-degree betti ranks and torsion coefficients."""

    betti: List[int]
    torsion: List[List[int]] = field(default_factory=list)

    def group(self, k: int) -> Tuple[int, List[int]]:
        if 0 <= k < len(self.betti):
            return self.betti[k], self.torsion[k] if self.torsion else []
        return 0, []

    def group_str(self, k: int) -> str:
        b, tors = self.group(k)
        parts = ["Z"] * b + [f"Z/{t}" for t in tors]
        return " + ".join(parts) if parts else "0"

    def __str__(self) -> str:
        return "; ".join(
            f"H{k}={self.group_str(k)}" for k in range(len(self.betti))
        )

    def as_tuple(self) -> Tuple:
        return tuple(
            (self.betti[k], tuple(self.torsion[k] if self.torsion else ()))
            for k in range(len(self.betti))
        )


def homology(
    complex_: SimplicialComplex, coefficients: str = "integers"
) -> HomologyProfile:
    """Homology groups of a finite complex.

    Integer coefficients give betti ranks plus torsion from the invariant
    factors; "mod2" gives dimensions over the two-element field.
    """
    dim = complex_.dimension
    if dim < 0:
        return HomologyProfile([], [])
    counts = complex_.simplex_counts()
    if coefficients == "mod2":
        ranks = [0] * (dim + 2)
        for k in range(1, dim + 1):
            ranks[k] = rank_mod2(boundary_matrix(complex_, k))
        betti = [counts[k] - ranks[k] - ranks[k + 1] for k in range(dim + 1)]
        return HomologyProfile(betti, [[] for _ in range(dim + 1)])
    if coefficients != "integers":
        raise InvalidInputError(f"unknown coefficients {coefficients!r}")
    factors = [[] for _ in range(dim + 2)]
    for k in range(1, dim + 1):
        factors[k] = invariant_factors(boundary_matrix(complex_, k))
    betti = []
    torsion = []
    for k in range(dim + 1):
        betti.append(counts[k] - len(factors[k]) - len(factors[k + 1]))
        torsion.append([d for d in factors[k + 1] if d > 1])
    return HomologyProfile(betti, torsion)


def sphere_map_degree(
    g: VertexMap, source: SimplicialComplex, target: SimplicialComplex
) -> int:
    """|deg(g)| for a simplicial map between two triangulated d-spheres.

    Read off the mapping cone: H_d of the cone is Z/(deg) with the
    conventions Z <-> degree 0 and the trivial group <-> degree 1.
    """
    from .cones import mapping_cone

    d = source.dimension
    if target.dimension != d:
        raise InvalidInputError("sphere triangulations must share a dimension")
    cone, _, _ = mapping_cone(g, source, target)
    b, tors = homology(cone).group(d)
    if b == 1 and not tors:
        return 0
    if b == 0 and not tors:
        return 1
    if b == 0 and len(tors) == 1:
        return tors[0]
    raise InconsistencyError(
        f"H_{d} of the mapping cone is not cyclic: rank {b}, torsion {tors}"
    )
