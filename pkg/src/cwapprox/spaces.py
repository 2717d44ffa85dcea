"""Built-in CW structures: S^d, RP^n, L(p,q) and the Grassmannian of
2-planes in R^4, in the tagged-point representation consumed by the gluing
pipeline.

Conventions fixed here: projective cells normalize the sign of the leading
nonzero coordinate block; the lens 3-cell rotates the upper hemisphere
(z > 0) by 2*pi*q/p and sends the equator to the 1-skeleton through
theta -> p*theta; Grassmannian cells are indexed by Schubert symbols with
the product of balls flattened to a single ball.
"""

from __future__ import annotations

from math import atan2, cos, gcd, pi, sin, sqrt
from typing import List, Sequence, Tuple

import numpy as np

from .cw import CWCell, CWPoint
from .errors import InconsistencyError, InvalidInputError

_LEADING_TOL = 1e-12
_RANK_TOL = 1e-7


# -- spheres and projective spaces ---------------------------------------------


def cw_sphere(d: int) -> List[CWCell]:
    """One 0-cell and one d-cell glued by the constant map."""
    if d < 1:
        raise InvalidInputError("need d >= 1")
    return [
        CWCell(0, name="point"),
        CWCell(d, lambda x: CWPoint(0, np.empty(0)), name=f"cell{d}"),
    ]


def _projective_quotient(x: np.ndarray) -> CWPoint:
    """Antipodal quotient of a unit vector onto the cell structure of RP^k.

    The class of x lives in the open cell indexed by the position of its
    last nonzero coordinate; sign normalization makes that coordinate
    positive and the remaining prefix is the ball coordinate.
    """
    x = np.asarray(x, dtype=float)
    j = None
    for i in range(len(x) - 1, -1, -1):
        if abs(x[i]) > _LEADING_TOL:
            j = i
            break
    if j is None:
        raise InvalidInputError("zero vector has no projective class")
    sign = 1.0 if x[j] > 0 else -1.0
    return CWPoint(j, sign * x[:j])


def cw_projective(n: int) -> List[CWCell]:
    """RP^n with one cell per dimension; cell k glues S^{k-1} -> RP^{k-1}
    by the antipodal quotient."""
    if n < 1:
        raise InvalidInputError("need n >= 1")
    cells = [CWCell(0, name="rp0")]
    for k in range(1, n + 1):
        cells.append(CWCell(k, _projective_quotient, name=f"rp{k}"))
    return cells


# -- lens spaces -----------------------------------------------------------------


def _circle_point(beta: float) -> CWPoint:
    """Point of the CW circle (0-cell at angle pi) at angle beta."""
    beta = (beta + pi) % (2.0 * pi) - pi
    if pi - abs(beta) < 1e-9:
        return CWPoint(0, np.empty(0))
    return CWPoint(1, np.array([beta / pi]))


def cw_lens(p: int, q: int) -> List[CWCell]:
    """L(p,q) as a quotient of the ball: cells of dimension 0..3.

    The 2-cell is glued by theta -> p*theta; the 3-cell identifies the two
    hemispheres of its boundary, the lower one mapping straight into the
    2-cell, the upper one after rotation by 2*pi*q/p, the equator going into
    the 1-skeleton through theta -> p*theta.
    """
    if p < 1 or gcd(p, q) != 1:
        raise InvalidInputError("need p >= 1 with gcd(p, q) = 1")
    rot = 2.0 * pi * q / p

    def glue_circle(x: np.ndarray) -> CWPoint:
        return CWPoint(0, np.empty(0))

    def glue_disk(x: np.ndarray) -> CWPoint:
        theta = atan2(x[1], x[0])
        return _circle_point(p * theta)

    def glue_ball3(x: np.ndarray) -> CWPoint:
        a, b, c = float(x[0]), float(x[1]), float(x[2])
        if c < -_LEADING_TOL:
            return CWPoint(2, np.array([a, b]))
        if c > _LEADING_TOL:
            return CWPoint(
                2,
                np.array(
                    [a * cos(rot) - b * sin(rot), a * sin(rot) + b * cos(rot)]
                ),
            )
        return _circle_point(p * atan2(b, a))

    return [
        CWCell(0, name="lens0"),
        CWCell(1, glue_circle, name="lens1"),
        CWCell(2, glue_disk, name="lens2"),
        CWCell(3, glue_ball3, name="lens3"),
    ]


# -- ball product homeomorphism ---------------------------------------------------


def homeoball_split(x: np.ndarray, n: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """B^{n+m} -> B^n x B^m: scale (x, y) by |(x, y)| / max(|x|, |y|)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (n + m,):
        raise InvalidInputError(f"expected a point of B^{n + m}")
    u, y = x[:n], x[n:]
    big = max(np.linalg.norm(u), np.linalg.norm(y))
    if big == 0.0:
        return np.zeros(n), np.zeros(m)
    s = np.linalg.norm(x) / big
    return s * u, s * y


def homeoball_join(u: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Inverse of homeoball_split: scale by max(|x|, |y|) / |(x, y)|."""
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.concatenate([u, y])
    nz = np.linalg.norm(z)
    if nz == 0.0:
        return z
    return (max(np.linalg.norm(u), np.linalg.norm(y)) / nz) * z


# -- Grassmannian of 2-planes in R^4 ----------------------------------------------

SCHUBERT_SYMBOLS: Tuple[Tuple[int, int], ...] = (
    (1, 2),
    (1, 3),
    (2, 3),
    (1, 4),
    (2, 4),
    (3, 4),
)


def schubert_cell_dimension(symbol: Tuple[int, int]) -> int:
    s1, s2 = symbol
    return (s1 - 1) + (s2 - 2)


def schubert_symbol(frame: np.ndarray, tol: float = _RANK_TOL) -> Tuple[int, int]:
    """Jump positions of dim(T & R^k) for the plane spanned by the frame."""
    m = np.asarray(frame, dtype=float)
    if m.shape != (4, 2):
        raise InvalidInputError("expected a 4x2 frame")
    dims = []
    for k in range(1, 5):
        tail = m[k:, :]
        rank = np.linalg.matrix_rank(tail, tol=tol) if tail.size else 0
        dims.append(2 - rank)
    s1 = next(k + 1 for k, d in enumerate(dims) if d >= 1)
    s2 = next(k + 1 for k, d in enumerate(dims) if d >= 2)
    return (s1, s2)


def reduced_echelon_frame(frame: np.ndarray, symbol=None) -> np.ndarray:
    """Orthonormal basis (v1, v2) of the plane with v1 in H^{s1}, v2 in H^{s2}:
    positive pivot coordinate, zeros beyond it."""
    m = np.asarray(frame, dtype=float)
    q, _ = np.linalg.qr(m)
    if symbol is None:
        symbol = schubert_symbol(q)
    s1, s2 = symbol
    tail = q[s1:, :]
    if tail.size:
        _, _, vt = np.linalg.svd(tail)
        coeff = vt[-1]
    else:
        coeff = np.array([1.0, 0.0])
    v1 = q @ coeff
    v1[s1:] = 0.0
    norm1 = np.linalg.norm(v1)
    if norm1 < 1e-9 or abs(v1[s1 - 1]) < 1e-9:
        raise InconsistencyError("frame has no reduced echelon form at this symbol")
    v1 /= norm1
    if v1[s1 - 1] < 0:
        v1 = -v1
    col = q[:, 0] if abs(q[:, 0] @ v1) < abs(q[:, 1] @ v1) else q[:, 1]
    v2 = col - (col @ v1) * v1
    v2[s2:] = 0.0
    norm2 = np.linalg.norm(v2)
    if norm2 < 1e-9 or abs(v2[s2 - 1]) < 1e-9:
        raise InconsistencyError("frame has no reduced echelon form at this symbol")
    v2 /= norm2
    if v2[s2 - 1] < 0:
        v2 = -v2
    return np.stack([v1, v2], axis=1)


def _rotation_forward(v1: np.ndarray, v2: np.ndarray, s1: int) -> np.ndarray:
    """Rotation taking v1 to e_{s1}, applied to v2 (orthonormal case)."""
    i = s1 - 1
    e = np.zeros(4)
    e[i] = 1.0
    return v2 - (v2[i] / (1.0 + v1[i])) * (e + v1)


def _rotation_inverse(v1: np.ndarray, w: np.ndarray, s1: int) -> np.ndarray:
    """Inverse rotation, applied to a vector with zero s1-coordinate."""
    i = s1 - 1
    e = np.zeros(4)
    e[i] = 1.0
    return w - ((v1 @ w) / (1.0 + v1[i])) * (e + v1)


def _pad_primary(x: np.ndarray, s1: int) -> np.ndarray:
    v = np.zeros(4)
    v[: s1 - 1] = x
    v[s1 - 1] = sqrt(max(0.0, 1.0 - float(x @ x)))
    return v


def _pad_secondary(y: np.ndarray, s1: int, s2: int) -> np.ndarray:
    v = np.zeros(4)
    slots = [i for i in range(s2 - 1) if i != s1 - 1]
    for slot, val in zip(slots, y):
        v[slot] = val
    v[s2 - 1] = sqrt(max(0.0, 1.0 - float(y @ y)))
    return v


def grassmann_characteristic(symbol: Tuple[int, int], u: np.ndarray) -> np.ndarray:
    """Closed-ball characteristic map of a Schubert cell, as a 4x2 frame."""
    s1, s2 = symbol
    n, m = s1 - 1, s2 - 2
    x, y = homeoball_split(np.asarray(u, dtype=float), n, m)
    v1 = _pad_primary(x, s1)
    w = _pad_secondary(y, s1, s2)
    v2 = _rotation_inverse(v1, w, s1)
    return np.stack([v1, v2], axis=1)


def grassmann_inverse_characteristic(
    symbol: Tuple[int, int], frame: np.ndarray
) -> np.ndarray:
    """Ball coordinates of a plane inside its own Schubert cell."""
    s1, s2 = symbol
    ech = reduced_echelon_frame(frame, symbol)
    v1, v2 = ech[:, 0], ech[:, 1]
    w = _rotation_forward(v1, v2, s1)
    x = v1[: s1 - 1]
    y = np.array([w[i] for i in range(s2 - 1) if i != s1 - 1])
    return homeoball_join(x, y)


def cw_grassmannian_2_4() -> List[CWCell]:
    """G(2,4) from its six Schubert cells, boundaries resolved by symbol."""
    index_of = {sym: i for i, sym in enumerate(SCHUBERT_SYMBOLS)}

    def make_gluing(symbol):
        def gluing(z: np.ndarray) -> CWPoint:
            frame = grassmann_characteristic(symbol, z)
            target = schubert_symbol(frame)
            if index_of[target] >= index_of[symbol]:
                raise InconsistencyError(
                    f"boundary of cell {symbol} landed in {target}"
                )
            return CWPoint(
                index_of[target], grassmann_inverse_characteristic(target, frame)
            )

        return gluing

    cells = [CWCell(0, name="schubert(1,2)")]
    for sym in SCHUBERT_SYMBOLS[1:]:
        cells.append(
            CWCell(
                schubert_cell_dimension(sym),
                make_gluing(sym),
                name=f"schubert{sym}",
            )
        )
    return cells


def frame_to_projection(frame: np.ndarray) -> np.ndarray:
    """Orthogonal projection matrix onto the plane of an orthonormal frame."""
    m = np.asarray(frame, dtype=float)
    return m @ m.T


def projection_to_frame(proj: np.ndarray) -> np.ndarray:
    """Orthonormal 2-frame spanning the range of a rank-2 projection."""
    vals, vecs = np.linalg.eigh(np.asarray(proj, dtype=float))
    if abs(vals[-1] - 1.0) > 1e-6 or abs(vals[-2] - 1.0) > 1e-6:
        raise InvalidInputError("matrix is not a rank-2 orthogonal projection")
    return vecs[:, -2:]
