"""Monte Carlo time constants, elliptic surface tensions and the limit functional.

Trial ``t`` of every estimator samples its configuration with seed
``seed ^ t``.  Because labels depend only on the seed and the global bond
position, estimators called with the same seed see coupled configurations:
across ``beta`` the configuration is identical, across ``p`` the strong sets
are nested.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._trials import run_trials
from .clusters import weak_clusters
from .distance import chemical_distance, passage_time, snap_to_cluster
from .lattice import Window, check_probability, sample_config, trial_seed, uniforms, BondConfig


class AllTrialsDiscarded(RuntimeError):
    """No trial produced a usable sample."""


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    trials: int
    discarded: int
    m: int
    p: float
    direction: tuple[float, float]
    seed: int
    beta: float | None = None
    extrapolated: float | None = None
    margin_shift: float | None = None
    samples: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def used(self) -> int:
        return self.trials - self.discarded

    @property
    def valid(self) -> bool:
        return self.used >= 2 and self.discarded <= 0.5 * self.trials


def _summarize(samples: np.ndarray):
    ok = samples[np.isfinite(samples)]
    if len(ok) == 0:
        return math.nan, math.nan
    mean = math.fsum(ok) / len(ok)
    if len(ok) < 2:
        return mean, math.nan
    se = math.sqrt(math.fsum((ok - mean) ** 2) / (len(ok) - 1) / len(ok))
    return mean, se


def combined_se(*ses) -> float:
    return math.sqrt(sum(s * s for s in ses))


def _direction(tau) -> tuple[float, float]:
    t = (float(tau[0]), float(tau[1]))
    if t == (0.0, 0.0) or not all(math.isfinite(c) for c in t):
        raise ValueError(f"invalid direction {tau}")
    return t


def target(tau, m: int) -> tuple[int, int]:
    """The lattice point ``floor(m * tau)`` componentwise."""
    return (math.floor(m * tau[0]), math.floor(m * tau[1]))


def segment_window(end, margin: int) -> Window:
    """Window around the segment from the origin to ``end`` with ``margin`` on all sides."""
    x0, x1 = min(0, end[0]) - margin, max(0, end[0]) + margin
    y0, y1 = min(0, end[1]) - margin, max(0, end[1]) + margin
    return Window(x1 - x0 + 1, y1 - y0 + 1, (x0, y0))


def perp(nu) -> tuple[float, float]:
    """Rotation ``(-nu_2, nu_1)``."""
    return (-nu[1], nu[0])


def _lambda_value(cfg: BondConfig, end, m: int, radius: int, snap_cfg: BondConfig | None = None):
    """``D / m`` between the cluster points snapped near 0 and ``end``, NaN if none."""
    labels = weak_clusters(snap_cfg if snap_cfg is not None else cfg)
    ref = snap_cfg if snap_cfg is not None else cfg
    x = snap_to_cluster(ref, labels, (0, 0), radius)
    y = snap_to_cluster(ref, labels, end, radius) if x is not None else None
    if x is None or y is None:
        return math.nan
    d = chemical_distance(cfg, x, y, with_path=False).value
    return d / m if math.isfinite(d) else math.nan


def _lambda_trial(args):
    p, end, m, margin, radius, seed, check = args
    cfg = sample_config(segment_window(end, margin), p, seed)
    value = _lambda_value(cfg, end, m, radius)
    shift = math.nan
    if check and math.isfinite(value):
        wide = sample_config(segment_window(end, 2 * margin), p, seed)
        shift = _lambda_value(wide, end, m, radius) - value
    return value, shift


def _check_m(m):
    if int(m) != m or m < 1:
        raise ValueError(f"scale m must be a positive integer, got {m}")
    return int(m)


def lambda_samples(p, tau, m, trials, seed, margin=None, jobs=1, margin_check=False):
    """Per-trial ``D/m`` (NaN for discarded trials) and margin shifts."""
    tau = _direction(tau)
    m = _check_m(m)
    end = target(tau, m)
    margin = math.ceil(m / 2) if margin is None else int(margin)
    radius = math.ceil(math.sqrt(m))
    args = [(p, end, m, margin, radius, trial_seed(seed, t), margin_check and t % 10 == 0)
            for t in range(trials)]
    out = run_trials(_lambda_trial, args, jobs)
    return np.array([v for v, _ in out]), np.array([s for _, s in out])


def estimate_lambda(p, tau, m, trials, seed, *, extrapolate=False, margin_check=False,
                    jobs=1, raise_if_empty=True) -> Estimate:
    """Time constant of the chemical distance in direction ``tau`` at scale ``m``.

    Each trial samples a window with margin ``m/2`` around the segment from 0
    to ``floor(m tau)``, snaps both ends to the spanning weak cluster within
    radius ``ceil(sqrt m)`` and records ``D/m``.  Trials without a snap
    target are discarded, never resampled.

    With ``extrapolate`` the same seeds are rerun at ``2m`` and the
    first-order ``1/m`` Richardson value ``2 mean(2m) - mean(m)`` is attached.
    """
    p = check_probability(p)
    if trials < 2:
        raise ValueError("need at least two trials")
    tau = _direction(tau)
    samples, shifts = lambda_samples(p, tau, m, trials, seed, jobs=jobs, margin_check=margin_check)
    mean, se = _summarize(samples)
    discarded = int(np.isnan(samples).sum())
    if discarded == trials and raise_if_empty:
        raise AllTrialsDiscarded(f"every trial discarded at p={p}, tau={tau}, m={m}")
    extra = None
    if extrapolate and discarded < trials:
        s2, _ = lambda_samples(p, tau, 2 * m, trials, seed, jobs=jobs)
        m2, _ = _summarize(s2)
        extra = 2 * m2 - mean
    shift = None
    if margin_check:
        ok = shifts[np.isfinite(shifts)]
        shift = float(ok.mean()) if len(ok) else math.nan
    return Estimate(mean, se, trials, discarded, int(m), p, tau, int(seed),
                    extrapolated=extra, margin_shift=shift, samples=samples)


def _coupled_trial(args):
    ps, end, m, margin, radius, seed = args
    window = segment_window(end, margin)
    u = uniforms(window, seed)
    cfgs = [BondConfig.from_strong(window, u < p, p=p, seed=seed) for p in ps]
    top = cfgs[int(np.argmax(ps))]
    return [_lambda_value(c, end, m, radius, snap_cfg=top) for c in cfgs]


def coupled_lambda_samples(p_values, tau, m, trials, seed, jobs=1) -> dict[float, np.ndarray]:
    """Per-trial ``D/m`` at several ``p`` on shared uniforms and shared endpoints.

    Endpoints are snapped on the configuration with the largest ``p``; its
    weak set is contained in every other one, so per-trial values are
    non-decreasing in ``p`` exactly.
    """
    ps = [check_probability(p) for p in p_values]
    tau = _direction(tau)
    m = _check_m(m)
    end = target(tau, m)
    args = [(ps, end, m, math.ceil(m / 2), math.ceil(math.sqrt(m)), trial_seed(seed, t))
            for t in range(trials)]
    out = np.array(run_trials(_coupled_trial, args, jobs), dtype=float).reshape(trials, len(ps))
    return {p: out[:, k] for k, p in enumerate(ps)}


def _phi_trial(args):
    p, betas, end, margin, seed, m = args
    cfg = sample_config(segment_window(end, margin), p, seed)
    return [passage_time(cfg, b, (0, 0), end, with_path=False).value / m for b in betas]


def phi_samples(p, betas, nu, m, trials, seed, margin=None, jobs=1) -> np.ndarray:
    """Per-trial ``psi(0, floor(m nu^perp)) / m``, shape ``(trials, len(betas))``."""
    m = _check_m(m)
    end = target(perp(_direction(nu)), m)
    margin = math.ceil(m / 2) if margin is None else int(margin)
    for b in betas:
        if not (1.0 <= float(b) < math.inf):
            raise ValueError(f"beta must be finite and >= 1, got {b}")
    args = [(p, [float(b) for b in betas], end, margin, trial_seed(seed, t), m) for t in range(trials)]
    return np.array(run_trials(_phi_trial, args, jobs), dtype=float).reshape(trials, len(betas))


def estimate_phi(p, beta, nu, m, trials, seed, *, jobs=1) -> Estimate:
    """Surface tension of the elliptic model with weights 1 and ``beta``.

    The passage time runs between the vertices 0 and ``floor(m nu^perp)``;
    finite weights connect every pair, so nothing is snapped or discarded.
    """
    p = check_probability(p)
    if trials < 2:
        raise ValueError("need at least two trials")
    nu = _direction(nu)
    samples = phi_samples(p, [beta], nu, m, trials, seed, jobs=jobs)[:, 0]
    mean, se = _summarize(samples)
    return Estimate(mean, se, trials, 0, int(m), p, nu, int(seed), beta=float(beta), samples=samples)


@dataclass(frozen=True)
class SweepRow:
    beta: float
    estimate: Estimate
    gap: float


@dataclass(frozen=True)
class Sweep:
    rows: list[SweepRow]
    lam: Estimate

    @property
    def gaps(self) -> np.ndarray:
        return np.array([r.gap for r in self.rows])


def continuity_sweep(p, nu, m, beta_grid, trials, seed, *, jobs=1) -> Sweep:
    """``phi_{p,beta}(nu)`` along ``beta_grid`` on coupled configurations, plus ``lambda_p``.

    The reference is ``lambda_p(nu^perp)`` (equal to ``lambda_p(nu)`` by
    lattice symmetry) measured on the same windows and seeds, and
    ``gap(beta) = lambda - phi_beta``.  A supercritical ``p`` usually leaves
    the reference with every trial discarded; its mean is then NaN.
    """
    p = check_probability(p)
    betas = [float(b) for b in beta_grid]
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise ValueError("beta grid must be ascending")
    nu = _direction(nu)
    phis = phi_samples(p, betas, nu, m, trials, seed, jobs=jobs)
    lam = estimate_lambda(p, perp(nu), m, trials, seed, jobs=jobs, raise_if_empty=False)
    rows = []
    for k, b in enumerate(betas):
        mean, se = _summarize(phis[:, k])
        est = Estimate(mean, se, trials, 0, int(m), p, nu, int(seed), beta=b, samples=phis[:, k])
        rows.append(SweepRow(b, est, lam.mean - mean))
    return Sweep(rows, lam)


ESTIMATE_FIELDS = ("p", "beta", "tau_x", "tau_y", "m", "trials", "discarded", "mean", "std_error",
                   "extrapolated")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def estimate_row(est: Estimate) -> list[str]:
    return [_fmt(v) for v in (est.p, est.beta, est.direction[0], est.direction[1], est.m,
                              est.trials, est.discarded, est.mean, est.std_error, est.extrapolated)]


def estimates_to_csv(estimates) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ESTIMATE_FIELDS)
    for e in estimates:
        w.writerow(estimate_row(e))
    return buf.getvalue()


def sweep_to_csv(sweep: Sweep) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ESTIMATE_FIELDS + ("gap",))
    for r in sweep.rows:
        w.writerow(estimate_row(r.estimate) + [_fmt(r.gap)])
    w.writerow(estimate_row(sweep.lam) + [""])
    return buf.getvalue()


# limit functional -----------------------------------------------------------

@dataclass(frozen=True)
class PolygonalPhase:
    """Closed polygon bounding ``{u = 1}``, optionally clipped to a rectangle.

    ``domain`` is ``(xmin, ymin, xmax, ymax)`` of the open rectangle Omega;
    boundary pieces on or outside its edges carry no energy.
    """

    vertices: tuple[tuple[float, float], ...]
    domain: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if 0 < len(verts) < 3:
            raise ValueError("a polygon needs at least three vertices")
        if len(set(verts)) != len(verts):
            raise ValueError("polygon vertices must be distinct")
        object.__setattr__(self, "vertices", verts)

    def edges(self):
        v = self.vertices
        return [(v[k], v[(k + 1) % len(v)]) for k in range(len(v))]


def _clip(a, b, box):
    """Part of segment ``ab`` strictly inside the open box (Liang-Barsky)."""
    x0, y0 = a
    dx, dy = b[0] - x0, b[1] - y0
    lo, hi = 0.0, 1.0
    xmin, ymin, xmax, ymax = box
    for p, q in ((-dx, x0 - xmin), (dx, xmax - x0), (-dy, y0 - ymin), (dy, ymax - y0)):
        if p == 0:
            if q <= 0:
                return 0.0
            continue
        t = q / p
        if p < 0:
            lo = max(lo, t)
        else:
            hi = min(hi, t)
    return max(0.0, hi - lo)


class LambdaTable:
    """``lambda_p`` sampled on a direction grid over one quadrant.

    Invariance under ``nu -> nu^perp`` makes the table periodic in angle with
    period pi/2; lookups interpolate linearly in angle.
    """

    def __init__(self, angles, values):
        self.angles = np.asarray(angles, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if np.any(np.diff(self.angles) <= 0) or self.angles[0] < 0 or self.angles[-1] >= math.pi / 2:
            raise ValueError("angles must be ascending within [0, pi/2)")

    @staticmethod
    def grid(per_quadrant: int = 16) -> np.ndarray:
        return np.arange(per_quadrant) * (math.pi / 2) / per_quadrant

    @classmethod
    def from_function(cls, f, per_quadrant: int = 16) -> LambdaTable:
        a = cls.grid(per_quadrant)
        return cls(a, [f((math.cos(t), math.sin(t))) for t in a])

    @classmethod
    def estimate(cls, p, m, trials, seed, per_quadrant: int = 16, jobs=1) -> LambdaTable:
        return cls.from_function(lambda t: estimate_lambda(p, t, m, trials, seed, jobs=jobs).mean,
                                 per_quadrant)

    def __call__(self, nu) -> float:
        t = math.atan2(nu[1], nu[0]) % (math.pi / 2)
        a = np.append(self.angles, math.pi / 2)
        v = np.append(self.values, self.values[0])
        return float(np.interp(t, a, v))


def _unit(v):
    n = math.hypot(v[0], v[1])
    return (v[0] / n, v[1] / n)


def _lookup(table, nu):
    if callable(table):
        return table(nu)
    for cand in (nu, perp(nu), (-nu[0], -nu[1]), (nu[1], -nu[0])):
        key = (round(cand[0], 12) + 0.0, round(cand[1], 12) + 0.0)
        if key in table:
            return table[key]
    raise KeyError(f"no lambda value for direction {nu}")


def limit_functional(phase: PolygonalPhase, lambda_table) -> float:
    """Sum over polygon edges of (length inside Omega) * lambda(edge normal).

    ``lambda_table`` is a callable of a unit vector (e.g. a ``LambdaTable``)
    or a mapping from unit vectors to values, looked up exactly with
    ``nu^perp`` and sign symmetry.
    """
    if isinstance(lambda_table, dict):
        lambda_table = {(round(k[0], 12) + 0.0, round(k[1], 12) + 0.0): v for k, v in lambda_table.items()}
    total = 0.0
    for a, b in phase.edges():
        length = math.hypot(b[0] - a[0], b[1] - a[1])
        if phase.domain is not None:
            length *= _clip(a, b, phase.domain)
        if length == 0.0:
            continue
        nu = _unit((b[1] - a[1], a[0] - b[0]))
        total += length * _lookup(lambda_table, nu)
    return total
