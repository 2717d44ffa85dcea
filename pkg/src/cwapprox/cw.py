"""Cell-by-cell triangulation of CW complexes.

Points of the CW complex are kept in the tagged form (cell index, open-ball
coordinates); gluing maps consume a unit vector of the cell's boundary
sphere and return a tagged point of a strictly earlier cell.  Each glued
cell yields a skeleton stage: the glued complex, the approximated gluing
map, the triangulated ball, and the recursive location map used to evaluate
the next cell's induced gluing map.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .approximation import ApproximationConfig, approximate
from .complexes import (
    Simplex,
    SimplicialComplex,
    VertexMap,
    save_simp,
)
from .cones import BallTriangulation, ball_locate, glue_ball, triangulate_ball
from .contraction import ContractionTrace, contract_all
from .errors import InvalidInputError
from .spheres import SphereTriangulation, delaunay_simplify, sphere_subdivide
from .approximation import METHODS


@dataclass
class CWPoint:
    """Tagged point: cell index plus coordinates in that cell's open ball."""

    cell: int
    coords: np.ndarray

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float)


@dataclass
class CWCell:
    """Cell of dimension d with its gluing map S^{d-1} -> earlier cells.

    The inverse characteristic map is implicit: a CWPoint already stores the
    ball coordinates of the point inside its cell.  The 0-cell has no gluing
    map.
    """

    dimension: int
    gluing: Optional[Callable[[np.ndarray], CWPoint]] = None
    name: str = ""


@dataclass
class StageOptions:
    contract: bool = False
    simplify: bool = False


@dataclass
class StageReport:
    cell: int
    dimension: int
    method: str
    strategy: str
    seed: int
    rounds: int
    sphere_counts: List[int]
    sphere_final: int
    sphere_simplified: Optional[int]
    complex_before_contraction: int
    complex_final: int
    elapsed: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SkeletonStage:
    """Skeleton K_i with everything needed to locate points in it."""

    index: int
    complex: SimplicialComplex
    cell: Optional[CWCell] = None
    prev: Optional["SkeletonStage"] = None
    sphere: Optional[SphereTriangulation] = None
    ball: Optional[BallTriangulation] = None
    approx: Optional[VertexMap] = None
    relabel: Optional[Dict[int, int]] = None
    contraction: Optional[ContractionTrace] = None
    report: Optional[StageReport] = None

    def _push(self, s: Simplex) -> Simplex:
        """Image of a pre-contraction simplex in the final complex."""
        if self.contraction is None:
            return s
        return self.contraction.quotient.apply(s)


def base_stage() -> SkeletonStage:
    """Stage 0: the unique 0-cell as a single vertex."""
    return SkeletonStage(index=0, complex=SimplicialComplex([[0]]))


def stage_locate(stage: SkeletonStage, p: CWPoint, eps: float = 1e-10) -> Simplex:
    """Simplex of the stage's complex carrying the tagged point.

    Recursive case split: earlier cells delegate to the previous stage;
    interior points (norm < 1/2) locate in the doubled ball and relabel into
    the glued complex; boundary-adjacent points push through the gluing map
    and locate in the previous skeleton.
    """
    if p.cell > stage.index:
        raise InvalidInputError(
            f"point tags cell {p.cell}, later than stage {stage.index}"
        )
    if stage.index == 0:
        return (0,)
    if p.cell < stage.index:
        return stage._push(stage_locate(stage.prev, p, eps))
    u = p.coords
    r = float(np.linalg.norm(u))
    if r < 0.5:
        inner = ball_locate(stage.ball, 2.0 * u, eps)
        relabeled = tuple(sorted({stage.relabel[b] for b in inner}))
        return stage._push(relabeled)
    glued = stage.cell.gluing(u / r)
    if glued.cell >= stage.index:
        raise InvalidInputError(
            f"gluing map of cell {stage.index} returned cell {glued.cell}"
        )
    return stage._push(stage_locate(stage.prev, glued, eps))


def _stage_rngs(seed: int, stage_index: int):
    """Independent per-stage streams for approximation, simplify, contract."""
    seq = np.random.SeedSequence([seed, stage_index])
    return [np.random.default_rng(s) for s in seq.spawn(3)]


def glue_cell(
    prev: SkeletonStage,
    cell: CWCell,
    cfg: ApproximationConfig,
    options: StageOptions = StageOptions(),
) -> SkeletonStage:
    """Approximate the induced gluing map, build the ball, glue the cone.

    Non-termination of the approximation loop propagates with its last state
    attached; switching strategy or raising pre_subdivisions are the
    documented outs.
    """
    if cell.dimension < 1:
        raise InvalidInputError("only the base cell may have dimension 0")
    if options.simplify and not METHODS[cfg.method][1]:
        raise InvalidInputError("Delaunay simplification needs a Delaunay method")
    start = time.perf_counter()
    index = prev.index + 1
    rng_approx, rng_simplify, rng_contract = _stage_rngs(cfg.seed, index)
    sphere = _initial_sphere(cell.dimension - 1)

    def induced(x: np.ndarray) -> Simplex:
        return stage_locate(prev, cell.gluing(x), cfg.eps)

    outcome = approximate(induced, sphere, prev.complex, cfg, rng_approx)
    sphere, gmap = outcome.sphere, outcome.vertex_map
    simplified_count = None
    if options.simplify and sphere.dim >= 1:
        sphere, gmap = delaunay_simplify(sphere, gmap, prev.complex, rng_simplify)
        simplified_count = sphere.vertex_count()
    ball = triangulate_ball(sphere)
    raw, relabel = glue_ball(ball, gmap, prev.complex)
    contraction = None
    final = raw
    if options.contract:
        final, contraction = contract_all(raw, rng_contract)
    report = StageReport(
        cell=index,
        dimension=cell.dimension,
        method=cfg.method,
        strategy=cfg.strategy,
        seed=cfg.seed,
        rounds=outcome.rounds,
        sphere_counts=outcome.vertex_counts,
        sphere_final=outcome.sphere.vertex_count(),
        sphere_simplified=simplified_count,
        complex_before_contraction=len(raw.vertices()),
        complex_final=len(final.vertices()),
        elapsed=time.perf_counter() - start,
    )
    return SkeletonStage(
        index=index,
        complex=final,
        cell=cell,
        prev=prev,
        sphere=sphere,
        ball=ball,
        approx=gmap,
        relabel=relabel,
        contraction=contraction,
        report=report,
    )


def _initial_sphere(d: int) -> SphereTriangulation:
    from .spheres import standard_sphere

    return standard_sphere(d)


def build_cw(
    cells: Sequence[CWCell],
    cfg: ApproximationConfig,
    options: StageOptions = StageOptions(),
    checkpoint_dir: Optional[str] = None,
    progress: Optional[Callable[[StageReport], None]] = None,
) -> SkeletonStage:
    """Glue the cells in order; cells[0] must be the unique 0-cell."""
    if not cells or cells[0].dimension != 0:
        raise InvalidInputError("cells[0] must be the unique 0-cell")
    stage = base_stage()
    for cell in cells[1:]:
        stage = glue_cell(stage, cell, cfg, options)
        if checkpoint_dir is not None:
            write_checkpoint(stage, checkpoint_dir)
        if progress is not None and stage.report is not None:
            progress(stage.report)
    return stage


# -- checkpoints ---------------------------------------------------------------


def write_checkpoint(stage: SkeletonStage, directory: str) -> Tuple[str, str]:
    """Persist a stage: .simp complex plus a JSON sidecar with seeds, method,
    strategy, rounds, vertex order, contraction trace and the approximation
    map as integer pairs."""
    import os

    os.makedirs(directory, exist_ok=True)
    tag = f"stage{stage.index:02d}"
    simp_path = os.path.join(directory, f"{tag}.simp")
    meta_path = os.path.join(directory, f"{tag}.meta.json")
    save_simp(stage.complex, simp_path, header=f"skeleton stage {stage.index}")
    meta: Dict[str, object] = {"stage": stage.index}
    if stage.report is not None:
        meta.update(stage.report.as_dict())
    if stage.ball is not None:
        meta["vertex_order"] = list(stage.ball.order)
    if stage.approx is not None:
        meta["approximation"] = sorted(
            [int(a), int(b)] for a, b in stage.approx.images.items()
        )
    if stage.contraction is not None:
        meta["contraction_trace"] = [
            [list(edge), int(c)] for edge, c in stage.contraction.steps
        ]
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
    return simp_path, meta_path
