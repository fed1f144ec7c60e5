"""Groundwater flow vectors from per-interval elevation data.

For each well with a groundwater-level reading in an interval, a plane
L = a + b x + c y is least-squares fitted through the well and its Delaunay
neighbours' readings.  Flow points down-gradient: theta = atan2(-c, -b)
(degrees, counterclockwise from +x, in [0, 360)), and the relative hydraulic
gradient R = sqrt(b^2 + c^2) measures relative flow velocity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay as _SciPyDelaunay
from scipy.spatial import QhullError

from .dataset import RESERVED_GW, Diagnostic
from .errors import TriangulationError


@dataclass(frozen=True)
class Triangulation:
    """Delaunay triangulation of well positions.

    ``triangles`` are sorted index triples into ``well_ids``/``points``;
    ``neighbors`` maps each well id to its Delaunay-adjacent well ids.
    """

    well_ids: tuple
    points: np.ndarray  # (n, 2)
    triangles: tuple  # of (i, j, k) sorted triples
    neighbors: dict

    def neighbor_ids(self, well_id):
        return self.neighbors[well_id]


def delaunay(wells):
    """Triangulate well locations.

    ``wells`` is a sequence of objects with well_id/x/y (or (id, x, y)
    triples).  Raises TriangulationError for < 3 wells or a collinear
    layout.  Triangles are emitted as sorted vertex-index triples in
    lexicographic order, which fixes the representation deterministically.
    """
    ids, pts = [], []
    for w in wells:
        if hasattr(w, "well_id"):
            ids.append(w.well_id)
            pts.append((float(w.x), float(w.y)))
        else:
            ids.append(w[0])
            pts.append((float(w[1]), float(w[2])))
    points = np.asarray(pts, dtype=float)
    if len(ids) < 3:
        raise TriangulationError(f"need >= 3 wells to triangulate, got {len(ids)}")

    # Collinearity: rank of centered coordinates
    centered = points - points.mean(axis=0)
    if np.linalg.matrix_rank(centered, tol=1e-9 * max(1.0, np.abs(centered).max())) < 2:
        raise TriangulationError("well locations are collinear; flow estimation disabled")

    try:
        tri = _SciPyDelaunay(points)
    except QhullError as exc:
        raise TriangulationError(f"triangulation failed: {exc}") from exc

    triangles = sorted(tuple(sorted(simplex)) for simplex in tri.simplices.tolist())
    neighbors = {well_id: set() for well_id in ids}
    for i, j, k in triangles:
        for a, b in ((i, j), (j, k), (i, k)):
            neighbors[ids[a]].add(ids[b])
            neighbors[ids[b]].add(ids[a])

    return Triangulation(
        well_ids=tuple(ids),
        points=points,
        triangles=tuple(triangles),
        neighbors={k: frozenset(v) for k, v in neighbors.items()},
    )


def circumcircle_ok(points, triangle, others, rtol=1e-9):
    """Empty-circumcircle check for one triangle: no other vertex strictly
    inside (on-circle within tolerance is allowed).  Direct geometric test
    used by the debug verifier and the test oracles."""
    a, b, c = (points[i] for i in triangle)
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0:
        return False
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay)
          + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx)
          + (cx**2 + cy**2) * (bx - ax)) / d
    r2 = (ax - ux) ** 2 + (ay - uy) ** 2
    tol = rtol * r2
    for i in others:
        if i in triangle:
            continue
        d2 = (points[i][0] - ux) ** 2 + (points[i][1] - uy) ** 2
        if d2 < r2 - tol:
            return False
    return True


def verify_delaunay(tri):
    """Brute-force empty-circumcircle verification over all triangles."""
    n = len(tri.well_ids)
    return all(
        circumcircle_ok(tri.points, t, range(n)) for t in tri.triangles
    )


def fit_plane(xs, ys, levels):
    """Least-squares plane L = a + b x + c y through >= 3 non-collinear
    points.  Returns (a, b, c) or raises ValueError on a degenerate set."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    levels = np.asarray(levels, dtype=float)
    if len(xs) < 3:
        raise ValueError(f"plane fit needs >= 3 points, got {len(xs)}")
    X = np.column_stack([np.ones_like(xs), xs, ys])
    # Centering keeps the normal equations well conditioned for site-scale
    # coordinates (e.g. UTM offsets).
    mx, my = xs.mean(), ys.mean()
    Xc = np.column_stack([np.ones_like(xs), xs - mx, ys - my])
    sol, _, rank, _ = np.linalg.lstsq(Xc, levels, rcond=None)
    if rank < 3:
        raise ValueError("plane fit is degenerate (collinear points)")
    a0, b, c = sol
    # a level table that is flat up to rounding must yield b = c = 0 exactly
    variation = abs(b) * np.ptp(xs) + abs(c) * np.ptp(ys)
    if variation <= 1e-12 * max(1.0, float(np.abs(levels).max())):
        b = c = 0.0
    a = a0 - b * mx - c * my
    return float(a), float(b), float(c)


@dataclass(frozen=True)
class FlowVector:
    well_id: str
    interval: int
    a: float
    b: float
    c: float
    theta: float  # degrees CCW from +x, down-gradient
    R: float

    def to_dict(self):
        return {
            "well_id": self.well_id,
            "theta_degrees": self.theta,
            "R": self.R,
            "a": self.a,
            "b": self.b,
            "c": self.c,
        }


def flow_vector(well_id, interval, a, b, c):
    """Build the flow vector for fitted plane coefficients, or None when the
    surface is flat (R = 0, direction undefined)."""
    R = math.hypot(b, c)
    if R == 0.0:
        return None
    theta = math.degrees(math.atan2(-c, -b)) % 360.0
    return FlowVector(well_id=well_id, interval=interval, a=a, b=b, c=c, theta=theta, R=R)


@dataclass
class FlowField:
    """Per-interval collection of flow vectors plus per-well skip reasons."""

    interval: int
    vectors: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (well_id, reason) pairs

    def to_dict(self):
        return {
            "interval": self.interval,
            "vectors": [v.to_dict() for v in self.vectors],
            "skipped": [{"well_id": w, "reason": r} for w, r in self.skipped],
        }


def interval_levels(dataset, interval):
    """Latest groundwater elevation per well within the interval."""
    levels = {}
    for r in dataset.records_for(constituent=RESERVED_GW, interval=interval):
        cur = levels.get(r.well_id)
        if cur is None or r.sample_date >= cur[0]:
            levels[r.well_id] = (r.sample_date, r.working)
    return {w: lv for w, (_, lv) in levels.items()}


def flow_field(dataset, interval, tri=None):
    """Estimate one flow vector per well holding a GW record in the interval.

    Wells with fewer than two level-bearing Delaunay neighbours, or a
    degenerate local configuration, are skipped with a reason code rather
    than failing the field.
    """
    field_ = FlowField(interval=interval)
    if tri is None:
        try:
            tri = delaunay(dataset.wells)
        except TriangulationError as exc:
            field_.skipped.append(("*", f"triangulation: {exc}"))
            return field_

    levels = interval_levels(dataset, interval)
    coords = {w.well_id: (w.x, w.y) for w in dataset.wells}

    for well_id in sorted(levels):
        if well_id not in tri.neighbors:
            field_.skipped.append((well_id, "not in triangulation"))
            continue
        local = [well_id] + sorted(
            n for n in tri.neighbors[well_id] if n in levels
        )
        if len(local) < 3:
            field_.skipped.append(
                (well_id, f"only {len(local) - 1} neighbour(s) with levels")
            )
            continue
        xs = [coords[w][0] for w in local]
        ys = [coords[w][1] for w in local]
        ls = [levels[w] for w in local]
        try:
            a, b, c = fit_plane(xs, ys, ls)
        except ValueError as exc:
            field_.skipped.append((well_id, str(exc)))
            continue
        vec = flow_vector(well_id, interval, a, b, c)
        if vec is None:
            field_.skipped.append((well_id, "flat water table (R = 0)"))
        else:
            field_.vectors.append(vec)
    return field_


def all_flow_fields(dataset, tri=None, diagnostics=None):
    """Flow fields for every interval; a single triangulation is reused."""
    if tri is None:
        try:
            tri = delaunay(dataset.wells)
        except TriangulationError as exc:
            if diagnostics is not None:
                diagnostics.append(Diagnostic("warning", "NO_TRIANGULATION", str(exc)))
            tri = None
    fields = []
    for k in range(len(dataset.intervals)):
        if tri is None:
            fields.append(FlowField(interval=k, skipped=[("*", "no triangulation")]))
        else:
            fields.append(flow_field(dataset, k, tri))
    return tri, fields
