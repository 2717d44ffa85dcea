"""Edge contraction under the link condition.

Contracting [a, b] onto a fresh vertex c is a homotopy equivalence exactly
when link(ab) = link(a) & link(b); repeated random contraction shrinks a
complex while preserving its homotopy type.  Only edges meeting the closed
star of the new vertex need re-testing after a contraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .complexes import Simplex, SimplicialComplex, VertexMap, as_simplex
from .errors import InvalidInputError, PreconditionError


@dataclass
class ContractionTrace:
    """Contracted edges in order, with the composite quotient map."""

    steps: List[Tuple[Simplex, int]]
    quotient: VertexMap


def link_condition(k: SimplicialComplex, e) -> bool:
    """True iff the link of the edge equals the intersection of the vertex links.

    The inclusion link(ab) <= link(a) & link(b) always holds, so only the
    converse is tested: every common link simplex must span a simplex with
    the whole edge.
    """
    e = as_simplex(e)
    if len(e) != 2 or e not in k:
        raise InvalidInputError(f"{e} is not an edge of the complex")
    a, b = e
    link_a = {tuple(x for x in s if x != a) for s in k.vertex_star(a) if len(s) > 1}
    link_b = {tuple(x for x in s if x != b) for s in k.vertex_star(b) if len(s) > 1}
    return all(tuple(sorted(t + e)) in k for t in link_a & link_b)


def contract_edge(
    k: SimplicialComplex, e
) -> Tuple[SimplicialComplex, VertexMap, int]:
    """Contract an edge satisfying the link condition onto a fresh vertex.

    Returns the contracted complex, the surjective quotient vertex map, and
    the new vertex id.
    """
    e = as_simplex(e)
    if not link_condition(k, e):
        raise PreconditionError(f"edge {e} fails the link condition")
    a, b = e
    c = k.fresh_vertex_id()
    images = {v: (c if v in (a, b) else v) for v in k.vertex_set()}
    q = VertexMap(images)
    out = SimplicialComplex()
    for s in k.maximal_simplices():
        out.insert_closure(q.apply(s))
    return out, q, c


def contract_all(
    k: SimplicialComplex,
    rng: np.random.Generator,
    greedy: bool = False,
) -> Tuple[SimplicialComplex, ContractionTrace]:
    """Contract random admissible edges until none satisfies the link condition.

    With `greedy` (experimental) the edge whose endpoints have the lowest
    degree is preferred instead of a uniform choice.
    """
    cur = k
    steps: List[Tuple[Simplex, int]] = []
    bucket: Dict[int, List[int]] = {v: [v] for v in k.vertex_set()}
    valid = {e for e in cur.simplices(1) if link_condition(cur, e)}
    while valid:
        if greedy:
            deg = _degrees(cur)
            edge = min(valid, key=lambda e: (min(deg[e[0]], deg[e[1]]), e))
        else:
            pool = sorted(valid)
            edge = pool[rng.integers(len(pool))]
        a, b = edge
        cur, _, c = contract_edge(cur, edge)
        steps.append((edge, c))
        bucket[c] = bucket.pop(a) + bucket.pop(b)
        valid = {e for e in valid if a not in e and b not in e}
        retest = {
            s
            for w in cur.closed_star_vertices(c)
            for s in cur.vertex_star(w)
            if len(s) == 2
        }
        for e in retest:
            if link_condition(cur, e):
                valid.add(e)
            else:
                valid.discard(e)
    images = {v: cur_id for cur_id, origs in bucket.items() for v in origs}
    return cur, ContractionTrace(steps, VertexMap(images))


def _degrees(k: SimplicialComplex) -> Dict[int, int]:
    deg = {v: 0 for v in k.vertex_set()}
    for a, b in k.simplices(1):
        deg[a] += 1
        deg[b] += 1
    return deg
