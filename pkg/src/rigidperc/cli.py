"""Command-line experiment runner.

Every subcommand validates its parameters before sampling, writes its
artifact (CSV or JSON) to ``--output`` or stdout, and prints a one-line
summary.  Exit status: 0 success, 2 invalid input, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

import numpy as np

from . import channels, clusters, distance, estimators, lattice, spin

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3


class ValidationError(ValueError):
    pass


def _pair(text):
    try:
        a, b = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return (a, b)


def _ipair(text):
    a, b = _pair(text)
    if a != int(a) or b != int(b):
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
    return (int(a), int(b))


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _seed(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _require(cond, msg):
    if not cond:
        raise ValidationError(msg)


def _prob(p):
    _require(0.0 <= p <= 1.0, f"probability must lie in [0, 1], got {p}")


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if f.name != "samples"}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _records_csv(records: list[dict]) -> str:
    keys = list(records[0])
    lines = [",".join(keys)]
    for r in records:
        lines.append(",".join("" if r[k] is None else repr(r[k]) if isinstance(r[k], float) else str(r[k])
                              for k in keys))
    return "\n".join(lines) + "\n"


# subcommands: each returns (artifact text, summary line)

def cmd_sample(a):
    _prob(a.p)
    cfg = lattice.sample_config(lattice.Window(a.width, a.height, a.origin), a.p, a.seed)
    frac = float(cfg.strong.mean())
    return cfg.to_text(), f"sample: {cfg.window.n_bonds} bonds, strong fraction {frac:.6f}"


def cmd_clusters(a):
    _prob(a.p)
    cfg = lattice.sample_config(lattice.Window(a.width, a.height, a.origin), a.p, a.seed)
    lab = clusters.weak_clusters(cfg)
    rec = {"p": a.p, "seed": a.seed, "weak_bonds": int(lab.sizes.sum()), "clusters": lab.n_clusters,
           "largest_size": int(lab.sizes[lab.largest_id]) if lab.largest_id is not None else 0,
           "left_right_crossing": lab.left_right_crossing_id is not None,
           "bottom_top_crossing": lab.bottom_top_crossing_id is not None}
    return _emit(a, [rec]), f"clusters: {rec['clusters']} weak clusters, largest {rec['largest_size']} bonds"


def cmd_crossing(a):
    _prob(a.p)
    _require(a.trials >= 1, "trials must be positive")
    row = clusters.crossing_frequency(lattice.Window(a.width, a.height), a.p, a.trials, a.seed,
                                      a.direction, a.jobs)
    return _emit(a, [_jsonable(row)], clusters.scan_to_csv([row])), \
        f"crossing: frequency {row.crossing_freq} +- {row.crossing_se} over {row.trials} trials"


def cmd_scan(a):
    for p in a.p_grid:
        _prob(p)
    _require(a.p_grid and a.p_grid == sorted(a.p_grid), "p grid must be non-empty and sorted")
    rows = clusters.threshold_scan(lattice.Window(a.width, a.height), a.p_grid, a.trials, a.seed,
                                   a.direction, a.jobs)
    return _emit(a, [_jsonable(r) for r in rows], clusters.scan_to_csv(rows)), \
        f"scan: {len(rows)} rows, frequencies {[round(r.crossing_freq, 4) for r in rows]}"


def cmd_distance(a):
    _prob(a.p)
    cfg = lattice.sample_config(lattice.Window(a.width, a.height, a.origin), a.p, a.seed)
    if a.beta is None:
        res = distance.chemical_distance(cfg, a.x, a.y)
        kind = "chemical"
    else:
        _require(a.beta >= 1, "beta must be >= 1")
        res = distance.passage_time(cfg, a.beta, _ipair_of(a.x), _ipair_of(a.y))
        kind = "passage"
    rec = {"kind": kind, "reachable": res.reachable, "value": res.value if res.reachable else None}
    if a.path_output and res.path is not None and kind == "chemical":
        with open(a.path_output, "w") as fh:
            fh.write(distance.path_to_csv(res.path))
    return _emit(a, [rec]), f"distance: {kind} {rec['value'] if res.reachable else 'unreachable'}"


def _ipair_of(pt):
    _require(pt[0] == int(pt[0]) and pt[1] == int(pt[1]), f"{pt} is not a lattice vertex")
    return (int(pt[0]), int(pt[1]))


def _check_mc(a):
    _prob(a.p)
    _require(a.m >= 1, "m must be positive")
    _require(a.trials >= 2, "need at least two trials")


def cmd_lambda(a):
    _check_mc(a)
    _require(a.tau != (0.0, 0.0), "direction must be non-zero")
    est = estimators.estimate_lambda(a.p, a.tau, a.m, a.trials, a.seed, extrapolate=a.extrapolate,
                                     margin_check=a.margin_check, jobs=a.jobs)
    return _emit(a, [_jsonable(est)], estimators.estimates_to_csv([est])), \
        f"lambda: mean {est.mean} +- {est.std_error} ({est.discarded}/{est.trials} discarded)"


def cmd_phi(a):
    _check_mc(a)
    _require(a.nu != (0.0, 0.0), "direction must be non-zero")
    _require(1 <= a.beta < math.inf, "beta must be finite and >= 1")
    est = estimators.estimate_phi(a.p, a.beta, a.nu, a.m, a.trials, a.seed, jobs=a.jobs)
    return _emit(a, [_jsonable(est)], estimators.estimates_to_csv([est])), \
        f"phi: mean {est.mean} +- {est.std_error}"


def cmd_sweep(a):
    _check_mc(a)
    _require(a.nu != (0.0, 0.0), "direction must be non-zero")
    _require(a.betas == sorted(a.betas) and all(1 <= b < math.inf for b in a.betas),
             "beta grid must be ascending, finite and >= 1")
    sw = estimators.continuity_sweep(a.p, a.nu, a.m, a.betas, a.trials, a.seed, jobs=a.jobs)
    recs = [dict(_jsonable(r.estimate), gap=_jsonable(r.gap)) for r in sw.rows]
    recs.append(dict(_jsonable(sw.lam), gap=None))
    return _emit(a, recs, estimators.sweep_to_csv(sw)), \
        f"sweep: phi {[round(r.estimate.mean, 4) for r in sw.rows]}, lambda {sw.lam.mean}"


def _rect_args(a):
    _prob(a.p)
    _require(0 < a.delta <= 1, "delta must lie in (0, 1]")
    _require(a.N >= 4, "N must be at least 4")
    _require(a.trials >= 1, "trials must be positive")


def _channels(a, strong):
    _rect_args(a)
    seeds = [lattice.trial_seed(a.seed, t) for t in range(a.trials)]
    rect, out = channels.channel_probe(a.p, a.N, a.delta, a.nu, seeds, strong=strong,
                                       certify=a.certify, jobs=a.jobs)
    reports = [r for r, _ in out]
    if a.certify and not all(ok for _, ok in out):
        raise RuntimeError("Menger certificate failed")
    norm = float(np.mean([r.normalized for r in reports]))
    recs = [dict(seed=s, **{k: v for k, v in _jsonable(r).items() if k not in ("paths", "cut")})
            for s, r in zip(seeds, reports)]
    name = "strongchannels" if strong else "channels"
    return _emit(a, recs, channels.channels_to_csv(a.p, rect, seeds, reports)), \
        f"{name}: mean normalized count {norm} over {len(reports)} seeds"


def cmd_channels(a):
    return _channels(a, False)


def cmd_strongchannels(a):
    return _channels(a, True)


def cmd_percentage(a):
    _rect_args(a)
    _require(a.budget >= 1, "budget must be positive")
    rect = channels.RectangleSpec((0.0, 0.0), a.nu, a.delta, a.N)
    recs = []
    for t in range(a.trials):
        s = lattice.trial_seed(a.seed, t)
        cfg = lattice.sample_config(channels.centered_window(rect), a.p, s)
        recs.append({"seed": s, "min_strong": channels.strong_link_percentage(cfg, rect, a.budget)})
    found = [r["min_strong"] for r in recs if r["min_strong"] is not None]
    return _emit(a, recs), f"percentage: {len(found)}/{len(recs)} rectangles have a channel within budget"


def _bc(window, kind, eps):
    if kind == "halves":
        return spin.halves_boundary(window, eps)
    values = np.where(np.arange(window.height)[:, None] >= window.height // 2, 1, -1)
    values = np.broadcast_to(values, (window.height, window.width))
    frozen = np.zeros((window.height, window.width), bool)
    frozen[0, :] = frozen[-1, :] = True
    return spin.SpinField(window, values, frozen, eps)


def cmd_energy(a):
    _prob(a.p)
    _require(a.eps > 0, "eps must be positive")
    window = lattice.Window(a.width, a.height)
    cfg = lattice.sample_config(window, a.p, a.seed)
    shape = (window.height, window.width)
    if a.field == "uniform":
        values = np.ones(shape)
    elif a.field == "halves":
        values = spin.halves_boundary(window).values
    else:
        values = np.random.default_rng(a.field_seed).choice([-1, 1], size=shape)
    e = spin.energy(cfg, spin.SpinField(window, values, np.zeros(shape, bool), a.eps))
    return _json_or_csv(a, e), f"energy: {e.value if e.finite else 'infinite'}"


def _json_or_csv(a, e):
    rec = json.loads(e.to_json())
    if a.format == "json":
        return e.to_json() + "\n"
    return _records_csv([rec])


def cmd_groundstate(a):
    _prob(a.p)
    _require(a.n >= 2, "n must be at least 2")
    _require(a.eps > 0, "eps must be positive")
    window = lattice.Window(a.n, a.n)
    cfg = lattice.sample_config(window, a.p, a.seed)
    u, e = spin.ground_state(cfg, _bc(window, a.bc, a.eps))
    if a.spins_output:
        with open(a.spins_output, "w") as fh:
            fh.write(u.to_text())
    return _json_or_csv(a, e), f"groundstate: energy {e.value if e.finite else 'infinite'}"


def cmd_rigidity(a):
    _prob(a.p)
    _require(a.n >= 8, "n must be at least 8")
    frac = spin.rigidity_probe(a.p, a.n, a.trials, a.seed, a.jobs)
    rec = {"p": a.p, "N": a.n, "trials": a.trials, "infinite_fraction": frac}
    return _emit(a, [rec]), f"rigidity: infinite-energy fraction {frac}"


def cmd_interface(a):
    _prob(a.p)
    _require(a.n >= 8, "n must be at least 8")
    _require(a.trials >= 2, "need at least two trials")
    cmp_ = spin.interface_vs_lambda(a.p, a.n, a.trials, a.seed, a.jobs)
    rec = {"p": a.p, "N": a.n, "trials": a.trials, "interface_mean": cmp_.interface.mean,
           "interface_se": cmp_.interface.std_error, "interface_discarded": cmp_.interface.discarded,
           "lambda_mean": cmp_.lam.mean, "lambda_se": cmp_.lam.std_error,
           "difference": cmp_.difference, "tolerance": cmp_.tolerance, "consistent": cmp_.consistent}
    return _emit(a, [rec]), f"interface: density {cmp_.interface.mean} vs lambda {cmp_.lam.mean}"


def _emit(a, records, csv_text=None):
    if a.format == "json":
        return json.dumps(records if len(records) != 1 else records[0], indent=2) + "\n"
    if csv_text is not None:
        return csv_text
    return _records_csv([{k: v for k, v in r.items()} for r in records])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rigidperc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        sp.add_argument("--seed", type=_seed, default=0)
        sp.add_argument("--output", default=None, help="artifact path (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--jobs", type=int, default=1)
        return sp

    def window_args(sp, p=True):
        if p:
            sp.add_argument("--p", type=float, required=True)
        sp.add_argument("--width", type=int, required=True)
        sp.add_argument("--height", type=int, required=True)

    sp = add("sample", cmd_sample, "sample a bond configuration")
    window_args(sp)
    sp.add_argument("--origin", type=_ipair, default=(0, 0))

    sp = add("clusters", cmd_clusters, "weak-cluster summary of one configuration")
    window_args(sp)
    sp.add_argument("--origin", type=_ipair, default=(0, 0))

    for name, fn, hlp in (("crossing", cmd_crossing, "weak crossing frequency"),
                          ("scan", cmd_scan, "crossing frequency over a p grid")):
        sp = add(name, fn, hlp)
        if name == "crossing":
            window_args(sp)
        else:
            sp.add_argument("--p-grid", type=_floats, required=True)
            window_args(sp, p=False)
        sp.add_argument("--trials", type=int, required=True)
        sp.add_argument("--direction", choices=(clusters.LEFT_RIGHT, clusters.BOTTOM_TOP),
                        default=clusters.LEFT_RIGHT)

    sp = add("distance", cmd_distance, "chemical distance or passage time in one configuration")
    window_args(sp)
    sp.add_argument("--origin", type=_ipair, default=(0, 0))
    sp.add_argument("--x", type=_pair, required=True)
    sp.add_argument("--y", type=_pair, required=True)
    sp.add_argument("--beta", type=float, default=None, help="passage time with strong weight beta")
    sp.add_argument("--path-output", default=None)

    sp = add("lambda", cmd_lambda, "time constant of the chemical distance")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--tau", type=_pair, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--extrapolate", action="store_true")
    sp.add_argument("--margin-check", action="store_true")

    sp = add("phi", cmd_phi, "surface tension of the elliptic model")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--nu", type=_pair, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--trials", type=int, required=True)

    sp = add("sweep", cmd_sweep, "phi along a beta grid against lambda")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--nu", type=_pair, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--betas", type=_floats, required=True)
    sp.add_argument("--trials", type=int, required=True)

    for name, fn, hlp in (("channels", cmd_channels, "disjoint weak channels"),
                          ("strongchannels", cmd_strongchannels, "disjoint strong dual channels"),
                          ("percentage", cmd_percentage, "fewest strong links within a length budget")):
        sp = add(name, fn, hlp)
        sp.add_argument("--p", type=float, required=True)
        sp.add_argument("--N", type=int, required=True)
        sp.add_argument("--delta", type=float, default=1.0)
        sp.add_argument("--nu", type=_pair, default=(0.0, 1.0))
        sp.add_argument("--trials", type=int, default=1, help="number of seeds")
        if name == "percentage":
            sp.add_argument("--budget", type=int, required=True)
        else:
            sp.add_argument("--certify", action="store_true")

    sp = add("energy", cmd_energy, "rigid spin energy of a simple field")
    window_args(sp)
    sp.add_argument("--field", choices=("uniform", "halves", "random"), default="uniform")
    sp.add_argument("--field-seed", type=int, default=0)
    sp.add_argument("--eps", type=float, default=1.0)

    sp = add("groundstate", cmd_groundstate, "min-cut ground state of an n x n window")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--bc", choices=("halves", "topbottom"), default="halves")
    sp.add_argument("--eps", type=float, default=1.0)
    sp.add_argument("--spins-output", default=None)

    for name, fn, hlp in (("rigidity", cmd_rigidity, "infinite-energy frequency of half-plane data"),
                          ("interface", cmd_interface, "ground-state interface density against lambda")):
        sp = add(name, fn, hlp)
        sp.add_argument("--p", type=float, required=True)
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--trials", type=int, required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.output:
            parent = os.path.dirname(os.path.abspath(args.output))
            _require(os.path.isdir(parent) and os.access(parent, os.W_OK),
                     f"cannot write to {args.output}")
        _require(args.jobs >= 1, "jobs must be positive")
        artifact, summary = args.fn(args)
    except (ValidationError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except (RuntimeError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(artifact)
    else:
        sys.stdout.write(artifact)
    print(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
