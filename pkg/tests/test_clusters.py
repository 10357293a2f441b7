import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rigidperc.channels import has_strong_dual_crossing
from rigidperc.clusters import (BOTTOM_TOP, LEFT_RIGHT, crossing_frequency, has_weak_crossing,
                                scan_to_csv, threshold_scan, weak_clusters)
from rigidperc.lattice import BondConfig, Window, sample_config, uniforms


def dfs_components(cfg):
    """Weak components by explicit graph search on shared endpoints."""
    w = cfg.window
    at_vertex = {}
    for f in np.flatnonzero(cfg.weak):
        for v in w.endpoints(w.bond(int(f))):
            at_vertex.setdefault(v, []).append(int(f))
    seen, comps = set(), []
    for f in np.flatnonzero(cfg.weak):
        f = int(f)
        if f in seen:
            continue
        comp, stack = set(), [f]
        seen.add(f)
        while stack:
            b = stack.pop()
            comp.add(b)
            for v in w.endpoints(w.bond(b)):
                for nb in at_vertex[v]:
                    if nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
        comps.append(frozenset(comp))
    return set(comps)


def partition(labels):
    out = {}
    for f, c in enumerate(labels.ids):
        if c >= 0:
            out.setdefault(int(c), set()).add(f)
    return {frozenset(s) for s in out.values()}


def test_union_find_matches_dfs():
    rng = np.random.default_rng(0)
    for k in range(100):
        W, H = (int(x) for x in rng.integers(2, 17, size=2))
        cfg = sample_config(Window(W, H), float(rng.uniform(0.2, 0.7)), k)
        labels = weak_clusters(cfg)
        assert partition(labels) == dfs_components(cfg)
        assert labels.sizes.sum() == cfg.weak.sum()
        assert (labels.ids[cfg.strong] == -1).all()


def test_ids_canonical_by_smallest_bond():
    cfg = sample_config(Window(12, 9), 0.45, 4)
    labels = weak_clusters(cfg)
    firsts = [int(np.flatnonzero(labels.ids == c)[0]) for c in range(labels.n_clusters)]
    assert firsts == sorted(firsts)


def crossing_oracle(cfg, direction):
    w = cfg.window
    for comp in dfs_components(cfg):
        verts = {v for f in comp for v in w.endpoints(w.bond(f))}
        xs = {v[0] - w.origin[0] for v in verts}
        ys = {v[1] - w.origin[1] for v in verts}
        if direction == LEFT_RIGHT and 0 in xs and w.width - 1 in xs:
            return True
        if direction == BOTTOM_TOP and 0 in ys and w.height - 1 in ys:
            return True
    return False


def test_crossing_matches_oracle():
    for s in range(60):
        cfg = sample_config(Window(9, 8), 0.5, s)
        for d in (LEFT_RIGHT, BOTTOM_TOP):
            assert has_weak_crossing(cfg, d) == crossing_oracle(cfg, d)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 20), st.integers(0, 2 ** 64 - 1), st.floats(0, 1), st.floats(0, 1))
def test_coupled_crossing_monotone(n, seed, p1, p2):
    p1, p2 = sorted((p1, p2))
    w = Window(n + 1, n)
    c1, c2 = sample_config(w, p1, seed), sample_config(w, p2, seed)
    assert not (c2.weak & ~c1.weak).any()
    if has_weak_crossing(c2):
        assert has_weak_crossing(c1)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 16), st.integers(0, 2 ** 64 - 1), st.floats(0, 1))
def test_duality_exclusive_and_exhaustive(n, seed, p):
    cfg = sample_config(Window(n + 1, n), p, seed)
    assert has_weak_crossing(cfg, LEFT_RIGHT) != has_strong_dual_crossing(cfg, BOTTOM_TOP)


def test_duality_hand_built():
    w = Window(3, 2)
    # all strong: no weak crossing, strong dual crossing
    cfg = BondConfig.from_strong(w, np.ones(w.n_bonds, bool))
    assert not has_weak_crossing(cfg) and has_strong_dual_crossing(cfg)
    cfg = BondConfig.from_strong(w, np.zeros(w.n_bonds, bool))
    assert has_weak_crossing(cfg) and not has_strong_dual_crossing(cfg)


def test_scan_trivial_rows():
    rows = threshold_scan(Window(10, 9), [0.0, 1.0], 5, 3)
    assert (rows[0].crossing_freq, rows[0].largest_fraction) == (1.0, 1.0)
    assert rows[1].crossing_freq == 0.0
    text = scan_to_csv(rows)
    assert text.splitlines()[0] == "p,trials,crossing_freq,crossing_se,largest_fraction,largest_fraction_se"
    assert len(text.splitlines()) == 3


def test_scan_monotone_under_coupling():
    grid = [0.3, 0.4, 0.5, 0.6, 0.7]
    rows = threshold_scan(Window(21, 20), grid, 200, 9)
    f = [r.crossing_freq for r in rows]
    # shared uniforms make the per-sample indicator monotone, hence the mean too
    assert all(a >= b for a, b in zip(f, f[1:]))


def test_scan_validation():
    with pytest.raises(ValueError):
        threshold_scan(Window(5, 5), [], 3, 1)
    with pytest.raises(ValueError):
        threshold_scan(Window(5, 5), [0.5, 0.2], 3, 1)
    with pytest.raises(ValueError):
        threshold_scan(Window(5, 5), [1.5], 3, 1)


def test_scan_independent_of_jobs():
    w = Window(12, 11)
    assert crossing_frequency(w, 0.5, 20, 4, jobs=1) == crossing_frequency(w, 0.5, 20, 4, jobs=2)


def test_trial_seeds_are_xor():
    w = Window(8, 7)
    row = crossing_frequency(w, 0.5, 16, 1000)
    hits = [crossing_oracle(BondConfig.from_strong(w, uniforms(w, 1000 ^ t) < 0.5), LEFT_RIGHT)
            for t in range(16)]
    assert row.crossing_freq == np.mean(hits)
