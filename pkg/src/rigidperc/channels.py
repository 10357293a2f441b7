"""Disjoint channels across rectangles, strong dual channels and strong-link counts.

A channel is a path of bonds joining the two short sides of a rectangle.
Disjoint channels are counted as a maximum flow with unit *bond* capacities
(each bond node is split in two), so the answer is the Menger number of the
bond-adjacency graph.  Every report carries its own certificate: the path
family and a bond cut of the same size.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from . import _kernels
from ._trials import run_trials
from .clusters import BOTTOM_TOP, LEFT_RIGHT, strong_dual_clusters
from .lattice import BondConfig, Window, check_probability, sample_config

_TOL = 1e-9


@dataclass(frozen=True)
class RectangleSpec:
    """Closed rectangle with long side ``N`` along ``nu^perp`` and short side ``delta*N`` along ``nu``.

    ``center`` is in lattice units.  Only rational directions are accepted.
    """

    center: tuple[float, float]
    nu: tuple[float, float]
    delta: float
    N: float

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.N < 4:
            raise ValueError(f"N must be at least 4, got {self.N}")
        nx, ny = float(self.nu[0]), float(self.nu[1])
        norm = math.hypot(nx, ny)
        if norm == 0:
            raise ValueError("nu must be non-zero")
        nx, ny = nx / norm, ny / norm
        if abs(nx) > _TOL and abs(ny) > _TOL:
            ratio = nx / ny
            if abs(float(Fraction(ratio).limit_denominator(1000)) - ratio) > 1e-9 * max(1.0, abs(ratio)):
                raise ValueError(f"direction {self.nu} is not rational")
        object.__setattr__(self, "nu", (nx, ny))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def tau(self) -> tuple[float, float]:
        return (-self.nu[1], self.nu[0])

    def coords(self, pts: np.ndarray):
        """(across, along) coordinates: along ``nu`` and along ``nu^perp`` from the centre."""
        d = pts - np.asarray(self.center)
        return d @ np.asarray(self.nu), d @ np.asarray(self.tau)

    def corners(self) -> np.ndarray:
        c, n, t = np.asarray(self.center), np.asarray(self.nu), np.asarray(self.tau)
        h, l = self.delta * self.N / 2, self.N / 2
        return np.array([c + sa * h * n + sb * l * t for sa in (-1, 1) for sb in (-1, 1)])


@dataclass(frozen=True)
class ChannelReport:
    count: int
    max_length: int
    normalized: float
    length_ratio: float
    paths: tuple[tuple[int, ...], ...]
    cut: tuple[int, ...]


def _check_inside(window: Window, rect: RectangleSpec):
    c = rect.corners()
    lo = np.floor(c.min(axis=0)) - 1
    hi = np.ceil(c.max(axis=0)) + 1
    ox, oy = window.origin
    if lo[0] < ox or lo[1] < oy or hi[0] > ox + window.width - 1 or hi[1] > oy + window.height - 1:
        raise ValueError("rectangle (with margin 1) exceeds the window")


def rectangle_masks(window: Window, rect: RectangleSpec, dual: bool = False):
    """Bonds inside the rectangle and those touching its first/second short side."""
    _check_inside(window, rect)
    mid = window.midpoints2() / 2.0
    across, along = rect.coords(mid)
    inside = (np.abs(across) <= rect.delta * rect.N / 2 + _TOL) & (np.abs(along) <= rect.N / 2 + _TOL)
    a, b = window.junctions(dual)
    shift = np.asarray(window.origin, dtype=float) + (0.5 if dual else 0.0)
    _, sa = rect.coords(a + shift)
    _, sb = rect.coords(b + shift)
    start = inside & (np.minimum(sa, sb) <= -rect.N / 2 + _TOL)
    end = inside & (np.maximum(sa, sb) >= rect.N / 2 - _TOL)
    return inside, start, end


def _disjoint_paths(cfg: BondConfig, selected, start, end, dual):
    """Max bond-disjoint family and min bond cut between ``start`` and ``end`` bonds."""
    w = cfg.window
    bonds = np.flatnonzero(selected)
    n = len(bonds)
    if n == 0 or not start[bonds].any() or not end[bonds].any():
        return [], []
    local = np.full(w.n_bonds, -1, dtype=np.int64)
    local[bonds] = np.arange(n)
    ra, rc = _kernels.bond_adjacency(np.ascontiguousarray(selected), w.width, w.height, dual)
    S, T = 2 * n, 2 * n + 1
    big = n + 1
    st = np.flatnonzero(start[bonds])
    en = np.flatnonzero(end[bonds])
    rows = np.concatenate([2 * np.arange(n), 2 * local[ra] + 1, np.full(len(st), S), 2 * en + 1])
    cols = np.concatenate([2 * np.arange(n) + 1, 2 * local[rc], 2 * st, np.full(len(en), T)])
    caps = np.concatenate([np.ones(n), np.full(len(ra), big), np.full(len(st), big), np.full(len(en), big)])
    cap = coo_matrix((caps.astype(np.int32), (rows, cols)), shape=(2 * n + 2, 2 * n + 2)).tocsr()
    res = maximum_flow(cap, S, T, method="edmonds_karp")
    flow = res.flow.tocsr()

    # decompose the flow into S-T paths
    fc = flow.tocoo()
    pos = fc.data > 0
    out_edges: dict[int, list[int]] = {}
    for u, v in zip(fc.row[pos], fc.col[pos]):
        out_edges.setdefault(int(u), []).append(int(v))
    for lst in out_edges.values():
        lst.sort(reverse=True)
    paths = []
    for _ in range(int(res.flow_value)):
        node, walk = S, [S]
        seen = {S: 0}
        while node != T:
            node = out_edges[node].pop()
            if node in seen:
                walk = walk[: seen[node] + 1]
                seen = {x: k for k, x in enumerate(walk)}
                continue
            seen[node] = len(walk)
            walk.append(node)
        paths.append(tuple(int(bonds[x // 2]) for x in walk[1:-1] if x % 2 == 0))

    # source side of the residual graph gives the minimum bond cut
    resid = (cap - flow).tocsr()
    resid.data = np.where(resid.data > 0, 1, 0)
    resid.eliminate_zeros()
    reach = np.zeros(2 * n + 2, dtype=bool)
    reach[breadth_first_order(resid, S, directed=True, return_predecessors=False)] = True
    k = np.arange(n)
    cut = bonds[reach[2 * k] & ~reach[2 * k + 1]]
    return paths, [int(c) for c in cut]


def _report(paths, cut, rect: RectangleSpec) -> ChannelReport:
    count = len(paths)
    max_len = max((len(p) for p in paths), default=0)
    return ChannelReport(count, max_len, count / (rect.N * rect.delta), max_len / rect.N,
                         tuple(paths), tuple(cut))


def count_disjoint_channels(cfg: BondConfig, rect: RectangleSpec) -> ChannelReport:
    """Bond-disjoint weak channels joining the short sides of ``rect``."""
    inside, start, end = rectangle_masks(cfg.window, rect)
    sel = inside & cfg.weak
    paths, cut = _disjoint_paths(cfg, sel, start, end, False)
    return _report(paths, cut, rect)


def count_strong_dual_channels(cfg: BondConfig, rect: RectangleSpec) -> ChannelReport:
    """Bond-disjoint strong channels, adjacency through shifted-lattice endpoints."""
    inside, start, end = rectangle_masks(cfg.window, rect, dual=True)
    sel = inside & cfg.strong
    paths, cut = _disjoint_paths(cfg, sel, start, end, True)
    return _report(paths, cut, rect)


def verify_menger(cfg: BondConfig, rect: RectangleSpec, report: ChannelReport, dual: bool = False) -> bool:
    """Check the path family and the cut independently of the flow solver."""
    w = cfg.window
    inside, start, end = rectangle_masks(w, rect, dual)
    sel = inside & (cfg.strong if dual else cfg.weak)
    used: set[int] = set()
    a, b = w.junctions(dual)
    for path in report.paths:
        if not path or not start[path[0]] or not end[path[-1]]:
            return False
        for x in path:
            if not sel[x] or x in used:
                return False
            used.add(x)
        for x, y in zip(path, path[1:]):
            if not ({tuple(a[x]), tuple(b[x])} & {tuple(a[y]), tuple(b[y])}):
                return False
    if len(report.cut) != len(report.paths):
        return False
    blocked = sel.copy()
    blocked[list(report.cut)] = False
    labels_ids, _ = _kernels.label_clusters(blocked, w.width, w.height, dual)
    reach_start = set(labels_ids[start & blocked].tolist())
    reach_end = set(labels_ids[end & blocked].tolist())
    return not (reach_start & reach_end)


def strong_link_percentage(cfg: BondConfig, rect: RectangleSpec, budget: int) -> int | None:
    """Fewest strong bonds on any channel of at most ``budget`` bonds, or ``None``.

    Channels may mix weak and strong bonds; adjacency is through Z^2 endpoints.
    """
    inside, start, end = rectangle_masks(cfg.window, rect)
    w = cfg.window
    k = _kernels.min_strong_within_budget(inside, np.ascontiguousarray(cfg.strong), start, end,
                                          w.width, w.height, False, int(budget))
    return None if k < 0 else int(k)


def has_strong_dual_crossing(cfg: BondConfig, direction: str = BOTTOM_TOP) -> bool:
    """Strong cluster on the shifted lattice joining the outer face rows (or columns)."""
    labels = strong_dual_clusters(cfg)
    if direction == BOTTOM_TOP:
        return labels.bottom_top_crossing_id is not None
    if direction == LEFT_RIGHT:
        return labels.left_right_crossing_id is not None
    raise ValueError(f"unknown direction {direction!r}")


def centered_window(rect: RectangleSpec) -> Window:
    """Smallest square window centred on the lattice point nearest the rectangle centre."""
    c = rect.corners()
    cx, cy = round(rect.center[0]), round(rect.center[1])
    r = int(math.ceil(np.abs(c - [cx, cy]).max())) + 2
    return Window(2 * r + 1, 2 * r + 1, (cx - r, cy - r))


def _probe_trial(args):
    p, rect, seed, strong, certify = args
    cfg = sample_config(centered_window(rect), p, seed)
    rep = (count_strong_dual_channels if strong else count_disjoint_channels)(cfg, rect)
    ok = verify_menger(cfg, rect, rep, dual=strong) if certify else None
    return rep, ok


def channel_probe(p, N, delta, nu, seeds, *, strong=False, certify=False, jobs=1):
    """Channel reports for a rectangle centred at the origin, one per seed."""
    p = check_probability(p)
    rect = RectangleSpec((0.0, 0.0), nu, delta, N)
    out = run_trials(_probe_trial, [(p, rect, int(s), strong, certify) for s in seeds], jobs)
    return rect, out


CHANNEL_FIELDS = ("p", "N", "delta", "nu_x", "nu_y", "seed", "count", "normalized", "max_length", "length_ratio")


def channels_to_csv(p, rect: RectangleSpec, seeds, reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CHANNEL_FIELDS)
    for s, r in zip(seeds, reports):
        w.writerow([repr(float(p)), rect.N, repr(float(rect.delta)), repr(rect.nu[0]), repr(rect.nu[1]),
                    s, r.count, repr(r.normalized), r.max_length, repr(r.length_ratio)])
    return buf.getvalue()
