"""Acceptance suite: one PASS/FAIL line per criterion.

Observed probe values are compared with ``tests/golden.json`` for bitwise
reproducibility.  Run with ``RIGIDPERC_RECORD_GOLDEN=1`` to rewrite that file.
"""

import atexit
import json
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from rigidperc.channels import channel_probe, has_strong_dual_crossing, strong_link_percentage
from rigidperc.channels import RectangleSpec, centered_window
from rigidperc.clusters import crossing_frequency, has_weak_crossing
from rigidperc.distance import passage_time
from rigidperc.estimators import (combined_se, continuity_sweep, coupled_lambda_samples,
                                  estimate_lambda)
from rigidperc.lattice import BondConfig, Window, sample_config
from rigidperc.spin import (SpinField, brute_force_ground_energy, ground_state, interface_vs_lambda,
                            rigidity_probe, ring_mask)

GOLDEN_PATH = Path(__file__).with_name("golden.json")
RECORD = os.environ.get("RIGIDPERC_RECORD_GOLDEN") == "1"
_golden = json.loads(GOLDEN_PATH.read_text()) if GOLDEN_PATH.exists() and not RECORD else {}
_recorded = {}


def _dump():
    if RECORD and _recorded:
        merged = json.loads(GOLDEN_PATH.read_text()) if GOLDEN_PATH.exists() else {}
        merged.update(_recorded)
        GOLDEN_PATH.write_text(json.dumps(merged, indent=2, sort_keys=True) + "\n")


atexit.register(_dump)


def golden(key, value):
    """Record or compare an observed value (floats compared exactly)."""
    if RECORD:
        _recorded[key] = value
        return
    assert key in _golden, f"golden value {key!r} missing; rerun with RIGIDPERC_RECORD_GOLDEN=1"
    assert _golden[key] == value, f"{key}: observed {value!r}, golden {_golden[key]!r}"


@pytest.fixture
def report(capsys):
    def emit(tag, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {tag}: {detail}")
        return ok
    return emit


def test_c01_ferromagnetic_oracle(report):
    t0 = time.perf_counter()
    e1 = estimate_lambda(0.0, (1, 0), 200, 10, 7)
    diag = estimate_lambda(0.0, (1, 1), 200, 10, 7)
    elapsed = time.perf_counter() - t0
    ok = (e1.mean == 201 / 200 and e1.std_error == 0.0 and abs(diag.mean - 2) <= 2 / 200
          and elapsed < 5)
    report("C1 ferromagnetic oracle", ok,
           f"lambda(e1)={e1.mean!r} se={e1.std_error} lambda(1,1)={diag.mean!r} time={elapsed:.2f}s")
    assert ok


def test_c02_critical_crossing(report):
    t0 = time.perf_counter()
    row = crossing_frequency(Window(33, 32), 0.5, 10_000, 2)
    elapsed = time.perf_counter() - t0
    ok = abs(row.crossing_freq - 0.5) <= 3 * row.crossing_se and elapsed < 60
    report("C2 critical crossing", ok,
           f"freq={row.crossing_freq} se={row.crossing_se:.5f} time={elapsed:.2f}s")
    golden("c02_crossing_freq", row.crossing_freq)
    assert ok


def test_c02b_duality_per_sample(report):
    w = Window(33, 32)
    bad = 0
    for s in range(10_000):
        cfg = sample_config(w, 0.5, s)
        bad += has_weak_crossing(cfg) == has_strong_dual_crossing(cfg)
    ok = bad == 0
    report("C2b self-duality per sample", ok, f"violations={bad} of 10000")
    assert ok


def test_c03_threshold_separation(report):
    w = Window(128, 127)
    lo = crossing_frequency(w, 0.4, 400, 3)
    hi = crossing_frequency(w, 0.6, 400, 3)
    ok = lo.crossing_freq >= 0.9 and hi.crossing_freq <= 0.1
    report("C3 threshold separation", ok, f"freq(0.4)={lo.crossing_freq} freq(0.6)={hi.crossing_freq}")
    golden("c03_freq_p04", lo.crossing_freq)
    golden("c03_freq_p06", hi.crossing_freq)
    assert ok


@pytest.mark.parametrize("p", [0.1, 0.2, 0.3])
def test_c04_norm_properties(report, p):
    m, n, seed = 200, 200, 4
    tol = 4 / m
    e1 = estimate_lambda(p, (1, 0), m, n, seed)
    e2 = estimate_lambda(p, (0, 1), m, n, seed)
    twice = estimate_lambda(p, (2, 0), m, n, seed)
    diag = estimate_lambda(p, (1, 1), m, n, seed)
    sym = abs(e1.mean - e2.mean) <= 3 * combined_se(e1.std_error, e2.std_error) + tol
    hom = abs(twice.mean - 2 * e1.mean) <= 3 * combined_se(twice.std_error, 2 * e1.std_error) + tol
    sub = diag.mean <= e1.mean + e2.mean + 3 * combined_se(diag.std_error, e1.std_error, e2.std_error) + tol
    ok = sym and hom and sub and all(e.valid for e in (e1, e2, twice, diag))
    report(f"C4 norm properties p={p}", ok,
           f"e1={e1.mean:.4f} e2={e2.mean:.4f} 2e1={twice.mean:.4f} (1,1)={diag.mean:.4f} "
           f"sym={sym} hom={hom} sub={sub}")
    golden(f"c04_p{p}", [e1.mean, e2.mean, twice.mean, diag.mean])
    assert ok


def test_c04_coupled_monotone(report):
    out = coupled_lambda_samples([0.1, 0.2, 0.3], (1, 0), 200, 200, 4)
    keep = np.isfinite(out[0.3])
    ok = bool((out[0.1][keep] <= out[0.2][keep]).all() and (out[0.2][keep] <= out[0.3][keep]).all())
    report("C4 coupled monotonicity in p", ok, f"compared {int(keep.sum())} samples, exact")
    assert ok


def _random_rings(w, rng):
    ring = ring_mask(w)
    return SpinField(w, np.where(ring, rng.choice([-1, 1], size=ring.shape), 1), ring)


def test_c05_ground_state_oracle(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    w = Window(4, 4)
    mismatches, total = 0, 0
    for p in (0.2, 0.5, 0.8):
        for k in range(100):
            cfg = sample_config(w, p, k)
            bc = _random_rings(w, rng)
            _, e = ground_state(cfg, bc)
            bf = brute_force_ground_energy(cfg, bc)
            total += 1
            mismatches += (e.finite, e.broken_weak, e.broken_strong) != (bf.finite, bf.broken_weak,
                                                                         bf.broken_strong)
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 120
    report("C5 ground-state oracle", ok, f"mismatches={mismatches} of {total} time={elapsed:.2f}s")
    assert ok


BETAS = [2.0 ** k for k in range(11)]


def test_c06_continuity_subcritical(report):
    sw = continuity_sweep(0.2, (0, 1), 200, BETAS, 100, 6)
    phis = np.array([r.estimate.samples for r in sw.rows])
    mono = bool((np.diff(phis, axis=0) >= 0).all())
    below = all(r.estimate.mean <= sw.lam.mean + 3 * combined_se(r.estimate.std_error, sw.lam.std_error)
                for r in sw.rows)
    gaps = sw.gaps
    shrink = gaps[-1] <= gaps[0] / 4
    # per-sample phi <= lambda is observed, not asserted: lambda uses snapped endpoints
    lam = sw.lam.samples
    seen = np.isfinite(lam)
    order_breaks = int((phis[:, seen] > lam[seen]).any(axis=0).sum())
    ok = mono and below and shrink
    report("C6 continuity p=0.2", ok,
           f"phi(1)={sw.rows[0].estimate.mean:.4f} phi(1024)={sw.rows[-1].estimate.mean:.4f} "
           f"lambda={sw.lam.mean:.4f} gap(1)={gaps[0]:.4f} gap(1024)={gaps[-1]:.4f} "
           f"per-sample phi>lambda in {order_breaks}/{int(seen.sum())}")
    golden("c06_phi_p02", [r.estimate.mean for r in sw.rows])
    golden("c06_lambda_p02", sw.lam.mean)
    assert ok


def test_c06_divergence_supercritical(report):
    sw = continuity_sweep(0.7, (0, 1), 200, [1.0, 1024.0], 20, 6)
    lo, hi = sw.rows[0].estimate.mean, sw.rows[-1].estimate.mean
    ok = hi >= 10 * lo
    report("C6 divergence p=0.7", ok, f"phi(1)={lo:.4f} phi(1024)={hi:.4f} ratio={hi / lo:.1f}")
    golden("c06_phi_p07", [lo, hi])
    assert ok


def test_c07_discontinuity_witness(report):
    m = 50
    w = Window(2 * m + 1, 2 * m + 1, (-m, -m))
    strong = np.zeros(w.n_bonds, bool)
    for y in range(-m, m):
        strong[w.flat(w.bond_between((0, y), (0, y + 1)))] = True
    cfg = BondConfig.from_strong(w, strong)
    times = [passage_time(cfg, b, (-m, 0), (m, 0), with_path=False).value
             for b in (1.0, 2.0, 10.0, 1e3, 1e9)]
    xs = np.arange(w.width) + w.origin[0]
    values = np.ones((w.height, w.width), int)
    values[-1] = np.where(xs <= 0, 1, -1)
    values[0] = np.where(xs < 0, 1, -1)
    frozen = np.zeros_like(values, bool)
    frozen[0] = frozen[-1] = True
    _, e = ground_state(cfg, SpinField(w, values, frozen))
    ok = all(t == 2 * m for t in times) and not e.finite
    report("C7 discontinuity witness", ok, f"passage times={times} rigid energy finite={e.finite}")
    assert ok


def test_c08_channel_property(report):
    means, certified = {}, True
    for N in (32, 64, 128):
        _, out = channel_probe(0.2, N, 1.0, (0, 1), range(50), certify=N <= 32)
        means[N] = float(np.mean([r.normalized for r, _ in out]))
        if N <= 32:
            certified = certified and all(ok for _, ok in out)
    ratio = max(means.values()) / min(means.values())
    ok = all(v > 0 for v in means.values()) and ratio < 1.5 and certified
    report("C8 channel property", ok,
           f"normalized means={ {k: round(v, 4) for k, v in means.items()} } ratio={ratio:.3f} "
           f"menger certified={certified}")
    golden("c08_means", [means[32], means[64], means[128]])
    assert ok


def test_c09_rigidity(report):
    frac = rigidity_probe(0.7, 64, 200, 9)
    ok = frac >= 0.99
    report("C9 rigidity probe", ok, f"infinite fraction={frac}")
    golden("c09_fraction", frac)
    assert ok


def test_c10_interface_density(report):
    cmp_ = interface_vs_lambda(0.2, 128, 100, 10)
    ok = cmp_.consistent
    report("C10 interface density", ok,
           f"interface={cmp_.interface.mean:.4f} (discarded {cmp_.interface.discarded}) "
           f"lambda={cmp_.lam.mean:.4f} |diff|={abs(cmp_.difference):.4f} tol={cmp_.tolerance:.4f}")
    golden("c10_interface_lambda", [cmp_.interface.mean, cmp_.lam.mean])
    assert ok


def test_probe_strong_link_percentage(report):
    # supplementary: channels shorter than (lambda - 0.1) N must use strong links
    lam = estimate_lambda(0.2, (1, 0), 128, 50, 11).mean
    rect = RectangleSpec((0, 0), (0, 1), 1.0, 128)
    budget = math.floor((lam - 0.1) * 128)
    counts = [strong_link_percentage(sample_config(centered_window(rect), 0.2, s), rect, budget)
              for s in range(50)]
    positive = sum(1 for c in counts if c is not None and c > 0)
    absent = sum(1 for c in counts if c is None)
    rate = (positive + absent) / len(counts)
    ok = rate >= 0.95
    report("P strong-link percentage", ok,
           f"budget={budget} positive={positive} no-channel={absent} zero={len(counts) - positive - absent} "
           f"rate={rate:.2f}")
    golden("probe_percentage_counts", counts)
    assert ok
