"""Rigid spin energies, min-cut ground states and finite-size probes."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from ._trials import run_trials
from .estimators import Estimate, _summarize, combined_se, estimate_lambda
from .lattice import BondConfig, Window, check_probability, sample_config, trial_seed


@dataclass(frozen=True)
class SpinField:
    """Spins ``values[y, x]`` in {-1, +1} on window vertices (local coordinates).

    ``frozen[y, x]`` marks boundary-conditioned vertices.
    """

    window: Window
    values: np.ndarray
    frozen: np.ndarray
    eps: float = 1.0

    def __post_init__(self):
        shape = (self.window.height, self.window.width)
        values = np.asarray(self.values, dtype=np.int8)
        frozen = np.asarray(self.frozen, dtype=bool)
        if values.shape != shape or frozen.shape != shape:
            raise ValueError(f"spin arrays must have shape {shape}")
        if not np.isin(values, (-1, 1)).all():
            raise ValueError("spins must be -1 or +1")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        values.setflags(write=False)
        frozen.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "frozen", frozen)

    @classmethod
    def uniform(cls, window: Window, value: int = 1, eps: float = 1.0) -> SpinField:
        shape = (window.height, window.width)
        return cls(window, np.full(shape, value), np.zeros(shape, bool), eps)

    def to_text(self) -> str:
        """Grid of ``+``/``-`` characters, top row (largest y) first."""
        rows = ["".join("+" if v > 0 else "-" for v in row) for row in self.values[::-1]]
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class EnergyValue:
    finite: bool
    value: float
    broken_weak: int
    broken_strong: int

    def to_json(self) -> str:
        return json.dumps({"finite": self.finite, "value": self.value if self.finite else None,
                           "broken_weak": self.broken_weak, "broken_strong": self.broken_strong})


def _bond_ends(window: Window):
    a, b = window.junctions()
    return a[:, 1] * window.width + a[:, 0], b[:, 1] * window.width + b[:, 0]


def energy(cfg: BondConfig, u: SpinField) -> EnergyValue:
    """Broken weak bonds cost ``eps`` each; one broken strong bond makes it infinite."""
    if u.window != cfg.window:
        raise ValueError("spin field and configuration live on different windows")
    ia, ib = _bond_ends(cfg.window)
    flat = u.values.ravel()
    broken = flat[ia] != flat[ib]
    strong = int(np.count_nonzero(broken & cfg.strong))
    weak = int(np.count_nonzero(broken & cfg.weak))
    if strong:
        return EnergyValue(False, math.inf, weak, strong)
    return EnergyValue(True, u.eps * weak, weak, 0)


def ring_mask(window: Window) -> np.ndarray:
    m = np.zeros((window.height, window.width), bool)
    m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
    return m


def halves_boundary(window: Window, eps: float = 1.0) -> SpinField:
    """Boundary ring frozen to +1 on the upper half and -1 on the lower half.

    On the left and right columns the sign changes at mid-height.
    """
    values = np.where(np.arange(window.height)[:, None] >= window.height // 2, 1, -1)
    values = np.broadcast_to(values, (window.height, window.width))
    return SpinField(window, values, ring_mask(window), eps)


def ground_state(cfg: BondConfig, bc: SpinField) -> tuple[SpinField, EnergyValue]:
    """Minimum-energy spins agreeing with ``bc`` on its frozen vertices.

    Solved as a minimum s-t cut with the +1 frozen set contracted into the
    source and the -1 frozen set into the sink.  Weak bonds have capacity 1;
    strong bonds capacity ``n_weak + 1``, which exceeds every cut made of weak
    bonds alone, so a finite minimum exists iff the cut value stays below it.
    Among minimizers the +1 region is the smallest one (source side of the
    residual graph).
    """
    w = cfg.window
    if bc.window != w:
        raise ValueError("boundary data and configuration live on different windows")
    frozen = bc.frozen.ravel()
    if not frozen.any():
        raise ValueError("empty frozen set")
    fv = bc.values.ravel()
    plus = frozen & (fv > 0)
    minus = frozen & (fv < 0)
    values = np.where(frozen, fv, 1).astype(np.int8)
    if not minus.any() or not plus.any():
        values[~frozen] = 1 if plus.any() else -1
        u = SpinField(w, values.reshape(bc.values.shape), bc.frozen, bc.eps)
        return u, energy(cfg, u)

    nv = w.n_vertices
    S, T = nv, nv + 1
    node = np.arange(nv)
    node[plus] = S
    node[minus] = T
    ia, ib = _bond_ends(w)
    na, nb = node[ia], node[ib]
    n_weak = int(np.count_nonzero(cfg.weak))
    heavy = n_weak + 1
    caps = np.where(cfg.strong, heavy, 1).astype(np.int64)
    keep = na != nb
    at_source = keep & ((na == S) | (nb == S))
    if caps[at_source].sum() >= 2 ** 31:
        raise ValueError("window too large for 32-bit cut capacities")
    rows = np.concatenate([na[keep], nb[keep]])
    cols = np.concatenate([nb[keep], na[keep]])
    data = np.concatenate([caps[keep], caps[keep]]).astype(np.int32)
    cap = coo_matrix((data, (rows, cols)), shape=(nv + 2, nv + 2)).tocsr()
    cap.sum_duplicates()
    res = maximum_flow(cap, S, T, method="dinic")
    resid = (cap - res.flow).tocsr()
    resid.data = np.where(resid.data > 0, 1, 0)
    resid.eliminate_zeros()
    reach = np.zeros(nv + 2, bool)
    reach[breadth_first_order(resid, S, directed=True, return_predecessors=False)] = True
    free = ~frozen
    values[free] = np.where(reach[:nv][free], 1, -1)
    u = SpinField(w, values.reshape(bc.values.shape), bc.frozen, bc.eps)
    e = energy(cfg, u)
    # the cut value decomposes lexicographically into (strong, weak) broken counts
    if e.broken_strong * heavy + e.broken_weak != int(res.flow_value):
        raise RuntimeError("cut value does not match the extracted spin field")
    return u, e


def brute_force_ground_energy(cfg: BondConfig, bc: SpinField) -> EnergyValue:
    """Exhaustive minimum over all assignments of the free spins (small windows only)."""
    if bc.window != cfg.window:
        raise ValueError("boundary data and configuration live on different windows")
    free = np.flatnonzero(~bc.frozen.ravel())
    if len(free) > 20:
        raise ValueError("too many free spins for enumeration")
    ia, ib = _bond_ends(cfg.window)
    strong = cfg.strong
    best = None
    # all sign patterns in blocks of rows, one row per assignment
    for block in _blocks(2 ** len(free), 4096):
        codes = np.asarray(block)
        v = np.tile(bc.values.ravel(), (len(codes), 1))
        v[:, free] = np.where((codes[:, None] >> np.arange(len(free))) & 1, 1, -1)
        broken = v[:, ia] != v[:, ib]
        ns = (broken & strong).sum(axis=1)
        nw = (broken & ~strong).sum(axis=1)
        k = np.lexsort((nw, ns))[0]
        key = (int(ns[k]), int(nw[k]))
        if best is None or key < best:
            best = key
    s, w = best
    return EnergyValue(s == 0, bc.eps * w if s == 0 else math.inf, w, s)


def _blocks(n, size):
    for start in range(0, n, size):
        yield range(start, min(n, start + size))


def _rigidity_trial(args):
    p, N, seed = args
    window = Window(N, N)
    _, e = ground_state(sample_config(window, p, seed), halves_boundary(window))
    return not e.finite


def rigidity_probe(p, N, trials, seed, jobs=1) -> float:
    """Fraction of trials whose half-plane ground state has infinite energy."""
    p = check_probability(p)
    if N < 8:
        raise ValueError("N must be at least 8")
    out = run_trials(_rigidity_trial, [(p, N, trial_seed(seed, t)) for t in range(trials)], jobs)
    return float(np.mean(out))


def _interface_trial(args):
    p, N, seed = args
    window = Window(N, N)
    _, e = ground_state(sample_config(window, p, seed), halves_boundary(window))
    return e.value / N if e.finite else math.nan


@dataclass(frozen=True)
class InterfaceComparison:
    interface: Estimate
    lam: Estimate
    difference: float
    tolerance: float

    @property
    def consistent(self) -> bool:
        return abs(self.difference) <= self.tolerance


def interface_vs_lambda(p, N, trials, seed, jobs=1) -> InterfaceComparison:
    """Half-plane ground-state energy per unit length against ``lambda_p(e1)`` at ``m = N``.

    Trials whose ground state is infinite (a strong bond pinned across the
    sign change, say) are discarded.  The tolerance is three combined
    standard errors plus ``8/N``.
    """
    p = check_probability(p)
    samples = np.array(run_trials(_interface_trial, [(p, N, trial_seed(seed, t)) for t in range(trials)], jobs))
    mean, se = _summarize(samples)
    iface = Estimate(mean, se, trials, int(np.isnan(samples).sum()), N, p, (0.0, 1.0), int(seed),
                     samples=samples)
    lam = estimate_lambda(p, (1.0, 0.0), N, trials, seed, jobs=jobs)
    tol = 3 * combined_se(iface.std_error, lam.std_error) + 8 / N
    return InterfaceComparison(iface, lam, iface.mean - lam.mean, tol)
