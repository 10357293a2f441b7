"""Chemical distance on weak clusters and weighted passage times."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .clusters import ClusterLabels
from .lattice import BondConfig, DualPoint, dual_midpoint, nearest_bond

RIGID = math.inf


@dataclass(frozen=True)
class PathResult:
    """Outcome of a shortest-path query.

    ``value`` is a bond count (chemical distance) or a total weight (passage
    time), ``math.inf`` when unreachable.  ``path`` holds dual points for
    chemical distances and Z^2 vertices for passage times.
    """

    value: float
    path: tuple | None = None

    @property
    def reachable(self) -> bool:
        return math.isfinite(self.value)


def _bond_flat(cfg: BondConfig, point) -> int:
    try:
        return cfg.window.flat(nearest_bond(cfg.window, point))
    except ValueError as err:
        raise ValueError(f"{point} is not a bond midpoint of the window") from err


def _walk_back(parent, end):
    out = [end]
    while parent[out[-1]] >= 0:
        out.append(int(parent[out[-1]]))
    return out[::-1]


def chemical_distance(cfg: BondConfig, x, y, with_path: bool = True) -> PathResult:
    """Fewest weak bonds on a weak path from dual point ``x`` to ``y``.

    Both end bonds are counted, so ``D(x, x) = 1`` for weak ``x``.  Strong
    endpoints or different clusters give an unreachable result.
    """
    w = cfg.window
    a, b = _bond_flat(cfg, x), _bond_flat(cfg, y)
    weak = cfg.weak
    if not (weak[a] and weak[b]):
        return PathResult(math.inf)
    dist, parent = _kernels.bfs_bonds(weak, w.width, w.height, False, a, b)
    if dist[b] < 0:
        return PathResult(math.inf)
    path = None
    if with_path:
        path = tuple(dual_midpoint(w, w.bond(f)) for f in _walk_back(parent, b))
    return PathResult(int(dist[b]), path)


def passage_time(cfg: BondConfig, beta: float, x, y, with_path: bool = True) -> PathResult:
    """Least total weight of a lattice path from vertex ``x`` to ``y``.

    Weak bonds weigh 1, strong bonds ``beta``; ``beta = inf`` makes strong
    bonds impassable instead of infinitely heavy.
    """
    beta = float(beta)
    if not beta >= 1.0:
        raise ValueError(f"beta must be >= 1 or inf, got {beta}")
    w = cfg.window
    src, dst = w.vertex_index(tuple(x)), w.vertex_index(tuple(y))
    rigid = math.isinf(beta)
    dist, parent = _kernels.dijkstra_vertices(
        cfg.strong, w.width, w.height, 1.0 if rigid else beta, rigid, src, dst
    )
    if not math.isfinite(dist[dst]):
        return PathResult(math.inf)
    verts = _walk_back(parent, dst)
    # recompute from bond counts so the value does not depend on summation order
    n_strong = sum(cfg.strong[w.flat(w.bond_between(w.vertex_at(a), w.vertex_at(b)))]
                   for a, b in zip(verts, verts[1:]))
    n_weak = len(verts) - 1 - n_strong
    value = n_weak + n_strong * (1.0 if rigid else beta)
    if value == int(value):
        value = int(value)
    path = tuple(w.vertex_at(v) for v in verts) if with_path else None
    return PathResult(value, path)


def snap_to_cluster(cfg: BondConfig, labels: ClusterLabels, x, radius: int,
                    cluster: int | None = None) -> DualPoint | None:
    """Nearest bond midpoint of the designated cluster within l1 ``radius``.

    The designated cluster defaults to the largest one spanning the window
    in both directions.  Ties go to the lexicographically smallest doubled
    coordinates.  ``x`` may be any half-integer point.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if cluster is None:
        cluster = labels.spanning_id
    if cluster is None:
        return None
    p = DualPoint.of(x)
    w = cfg.window
    ox2, oy2 = 2 * w.origin[0], 2 * w.origin[1]
    r2 = 2 * radius
    best = None
    # candidate midpoints live on doubled coordinates with exactly one odd entry
    for dx2 in range(-r2, r2 + 1):
        rest = r2 - abs(dx2)
        for dy2 in range(-rest, rest + 1):
            qx, qy = p.x2 + dx2, p.y2 + dy2
            if (qx + qy) % 2 == 0:
                continue
            lx, ly = qx - ox2, qy - oy2
            if lx < 0 or ly < 0 or lx > 2 * (w.width - 1) or ly > 2 * (w.height - 1):
                continue
            key = (abs(dx2) + abs(dy2), qx, qy)
            if best is not None and key >= best:
                continue
            if labels.ids[w.flat(nearest_bond(w, DualPoint(qx, qy)))] == cluster:
                best = key
    return None if best is None else DualPoint(best[1], best[2])


def path_to_csv(path) -> str:
    """Dual-point path as CSV of doubled integer coordinates."""
    lines = ["x2,y2"]
    lines += [f"{DualPoint.of(q).x2},{DualPoint.of(q).y2}" for q in path]
    return "\n".join(lines) + "\n"
