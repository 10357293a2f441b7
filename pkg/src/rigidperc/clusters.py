"""Weak-cluster decomposition, crossing detection and threshold scans."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._trials import run_trials
from .lattice import BondConfig, Window, check_probability, sample_config, trial_seed

LEFT_RIGHT = "left-right"
BOTTOM_TOP = "bottom-top"


@dataclass(frozen=True)
class ClusterLabels:
    """Partition of the selected bonds into clusters.

    ``ids[b]`` is the cluster of flat bond ``b`` (``-1`` if not selected).
    The three optional ids name the largest cluster crossing left-right,
    bottom-top, and in both directions; the last one stands in for the
    infinite cluster inside a finite window.
    """

    ids: np.ndarray
    sizes: np.ndarray
    largest_id: int | None
    left_right_crossing_id: int | None
    bottom_top_crossing_id: int | None
    spanning_id: int | None

    @property
    def n_clusters(self) -> int:
        return len(self.sizes)

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.ids == cluster)


def label(cfg: BondConfig, select: np.ndarray, dual: bool = False) -> ClusterLabels:
    """Cluster the bonds in ``select`` under primal (Z^2) or dual (Z_b) adjacency."""
    w = cfg.window
    ids, sizes = _kernels.label_clusters(np.ascontiguousarray(select), w.width, w.height, dual)
    n = len(sizes)
    if n == 0:
        return ClusterLabels(ids, sizes, None, None, None, None)
    flags = _kernels.cluster_edge_flags(ids, n, w.width, w.height, dual)
    left, right, bottom, top = flags.T
    lr, bt = left & right, bottom & top

    def biggest(mask):
        if not mask.any():
            return None
        cand = np.flatnonzero(mask)
        return int(cand[np.argmax(sizes[cand])])

    return ClusterLabels(ids, sizes, biggest(np.ones(n, bool)), biggest(lr), biggest(bt), biggest(lr & bt))


def weak_clusters(cfg: BondConfig) -> ClusterLabels:
    """Connected components of weak bonds, adjacency = shared Z^2 endpoint."""
    return label(cfg, cfg.weak)


def strong_dual_clusters(cfg: BondConfig) -> ClusterLabels:
    """Connected components of strong bonds on the shifted lattice Z^2 + (1/2, 1/2)."""
    return label(cfg, cfg.strong, dual=True)


def has_weak_crossing(cfg: BondConfig, direction: str = LEFT_RIGHT) -> bool:
    labels = weak_clusters(cfg)
    if direction == LEFT_RIGHT:
        return labels.left_right_crossing_id is not None
    if direction == BOTTOM_TOP:
        return labels.bottom_top_crossing_id is not None
    raise ValueError(f"unknown direction {direction!r}")


def _scan_trial(args):
    window, p, seed, direction = args
    cfg = sample_config(window, p, seed)
    labels = weak_clusters(cfg)
    crossing = (
        labels.left_right_crossing_id if direction == LEFT_RIGHT else labels.bottom_top_crossing_id
    ) is not None
    n_weak = int(labels.sizes.sum())
    frac = float(labels.sizes[labels.largest_id]) / n_weak if n_weak else 0.0
    return crossing, frac


@dataclass(frozen=True)
class ScanRow:
    p: float
    trials: int
    crossing_freq: float
    crossing_se: float
    largest_fraction: float
    largest_fraction_se: float


def crossing_frequency(window: Window, p: float, trials: int, seed: int,
                       direction: str = LEFT_RIGHT, jobs: int = 1) -> ScanRow:
    """Monte Carlo weak-crossing frequency with per-trial seeds ``seed ^ t``."""
    p = check_probability(p)
    if trials < 1:
        raise ValueError("trials must be positive")
    if direction not in (LEFT_RIGHT, BOTTOM_TOP):
        raise ValueError(f"unknown direction {direction!r}")
    out = run_trials(_scan_trial, [(window, p, trial_seed(seed, t), direction) for t in range(trials)], jobs)
    cross = np.array([c for c, _ in out], dtype=float)
    frac = np.array([f for _, f in out], dtype=float)

    def se(x):
        return float(x.std(ddof=1) / np.sqrt(len(x))) if len(x) > 1 else float("nan")

    return ScanRow(p, trials, float(cross.mean()), se(cross), float(frac.mean()), se(frac))


def threshold_scan(window: Window, p_grid, trials: int, seed: int,
                   direction: str = LEFT_RIGHT, jobs: int = 1) -> list[ScanRow]:
    """Crossing frequency and largest-cluster share of weak bonds per ``p``.

    Every ``p`` reuses the same trial seeds, so rows are coupled through the
    shared per-bond uniforms.
    """
    grid = [check_probability(p) for p in p_grid]
    if not grid:
        raise ValueError("empty p grid")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("p grid must be sorted")
    return [crossing_frequency(window, p, trials, seed, direction, jobs) for p in grid]


SCAN_FIELDS = ("p", "trials", "crossing_freq", "crossing_se", "largest_fraction", "largest_fraction_se")


def scan_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCAN_FIELDS)
    for r in rows:
        writer.writerow([repr(getattr(r, f)) if isinstance(getattr(r, f), float) else getattr(r, f)
                         for f in SCAN_FIELDS])
    return buf.getvalue()
