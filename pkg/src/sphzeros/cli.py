"""Command-line interface: ``sphzeros <subcommand> [flags]``.

Precedence for experiment settings is flags > ``--config`` file > defaults.
On failure a single line ``error: <ErrorClass>: <message>`` goes to stderr
and the exit status is 1.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import theory
from .energy import energy_report
from .ensemble import RandomSeed, sample_su2
from .errors import ParseError, SphZerosError
from .experiment import (WORKERS_ENV, ExperimentConfig, config_from_mapping, default_workers,
                         load_config, run_trials, sweep)
from .minimizer import EnergyKind, MinimizeOptions, best_of
from .paircorr import (PairHistogram, accumulate_pairs, compare_to_H, normalized_g,
                       write_curve_csv)
from .rootfind import find_roots
from .sphere import SphereConfiguration, roots_to_sphere, uniform_points
from .svg import scatter_svg


def _r(x):
    return repr(float(x))


def _dump(obj, fh=None):
    json.dump(obj, fh or sys.stdout, indent=2, sort_keys=True)
    (fh or sys.stdout).write("\n")


def _ensure_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path!r}: {exc}") from exc


def cmd_sample(args):
    poly = sample_su2(args.degree, RandomSeed(args.seed, args.stream))
    roots = find_roots(poly)
    pts = roots_to_sphere(roots.finite, roots.n_infinite)
    _ensure_dir(args.out)
    with open(os.path.join(args.out, "zeros.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "re", "im", "is_infinite", "x", "y", "z", "residual"])
        for i, (z, r) in enumerate(zip(roots.finite, roots.residuals)):
            w.writerow([i, _r(z.real), _r(z.imag), 0, *map(_r, pts[i]), _r(r)])
        for k in range(roots.n_infinite):
            i = roots.finite.size + k
            w.writerow([i, "", "", 1, *map(_r, pts[i]), ""])
    with open(os.path.join(args.out, "zeros.svg"), "w") as fh:
        fh.write(scatter_svg(roots.finite, pts, args.view, args.half_width))
    print(f"degree={args.degree} zeros={len(roots)} converged={roots.converged} "
          f"out={args.out}")
    return 0 if roots.converged else 1


def _read_points(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return np.array([[float(r["x"]), float(r["y"]), float(r["z"])] for r in rows])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: expected numeric x, y, z columns ({exc})") from exc


def cmd_energy(args):
    if args.input:
        pts = _read_points(args.input)
        n = len(pts)
    else:
        if args.degree is None:
            raise ParseError("energy needs --input or --degree")
        roots = find_roots(sample_su2(args.degree, RandomSeed(args.seed, args.stream)))
        pts = roots_to_sphere(roots.finite, roots.n_infinite)
        n = args.degree
    rep = energy_report(SphereConfiguration.normalized(pts), args.s or (), workers=args.workers)
    _dump({"n_points": n, "green_energy": rep.green_energy, "log_energy": rep.log_energy,
           "s_energies": {f"{k:g}": v for k, v in rep.s_energies.items()},
           "min_pair_chordal": rep.min_pair_chordal, "degenerate": rep.degenerate})
    return 0


def cmd_predict(args):
    n = args.N
    out = {"N": n, "green": theory.predict_green_energy(n).as_dict(),
           "log": theory.predict_log_energy(n).as_dict(),
           "minimum_reference": {"green_elkies": theory.minimum_reference(n, "green_elkies").as_dict(),
                                 "log_BBP": theory.minimum_reference(n, "log_BBP").as_dict(),
                                 "riesz2_KS": theory.minimum_reference(n, "riesz2_KS").as_dict()},
           "s": {}}
    for s in args.s or ():
        entry = theory.predict_s_energy(n, s).as_dict()
        if s < 2:
            entry["mean_field"] = theory.mean_field(s)
        if s > 2:
            entry["minimum_reference"] = theory.minimum_reference(n, "rieszS_KS_bounds", s).as_dict()
        out["s"][f"{s:g}"] = entry
    _dump(out)
    return 0


def _experiment_config(args, require_three=False):
    flags = {"degrees": args.degrees, "trials": args.trials, "root_seed": args.seed,
             "s_values": args.s, "output_dir": args.out, "worker_count": args.workers}
    if getattr(args, "max_u", None) is not None or getattr(args, "bins", None) is not None:
        flags["paircorr"] = {k: v for k, v in (("max_u", args.max_u), ("bins", args.bins))
                             if v is not None}
    if args.config:
        return load_config(args.config, flags)
    defaults = {"trials": 100, "root_seed": 0}
    data = {**defaults, **{k: v for k, v in flags.items() if v is not None}}
    return config_from_mapping(data)


def cmd_sweep(args):
    cfg = _experiment_config(args)
    if len(cfg.degrees) >= 3:
        fits, result = sweep(cfg)
    else:
        result, fits = run_trials(cfg), {}
    if cfg.output_dir:
        with open(os.path.join(cfg.output_dir, "fits.json"), "w") as fh:
            _dump(fits, fh)
    print(format_report([("<run>", result.summary)]), end="")
    for kind, fit in fits.items():
        lead = fit["basis"][0]
        lo, hi = fit["intervals"][lead]
        print(f"fit {kind}: {lead} coefficient {fit['coefficients'][lead]:.6g} "
              f"[{lo:.6g}, {hi:.6g}]")
    return 0 if result.summary["healthy"] else 1


def cmd_paircorr(args):
    cfg = _experiment_config(args)
    if cfg.paircorr is None:
        cfg.paircorr = {"max_u": 4.0, "bins": 40}
    cfg.include_green = cfg.include_log = False
    cfg.s_values = []
    result = run_trials(cfg)
    for n in cfg.degrees:
        curve = normalized_g(result.histograms[n])
        line = (f"N={n} trials={result.histograms[n].n_trials} l2_to_H={compare_to_H(curve):.6f} "
                f"nn_median_u={float(np.median(result.nearest_neighbor_u[n])):.6f}")
        if args.control:
            hist = PairHistogram.empty(n, cfg.paircorr["max_u"], cfg.paircorr["bins"])
            rng = np.random.default_rng(np.random.SeedSequence(cfg.root_seed, spawn_key=(2**32 + n,)))
            for _ in range(cfg.trials):
                hist = hist + accumulate_pairs(uniform_points(n, rng), n, cfg.paircorr["max_u"],
                                               cfg.paircorr["bins"])
            ctrl = normalized_g(hist)
            z = np.abs(ctrl.g - 1.0) / np.where(ctrl.stderr > 0, ctrl.stderr, np.inf)
            line += f" control_max_z={float(np.max(z)):.3f}"
            if cfg.output_dir:
                write_curve_csv(ctrl, os.path.join(cfg.output_dir, f"paircorr_control_N{n}.csv"))
        print(line)
    return 0


def cmd_minimize(args):
    opts = MinimizeOptions(EnergyKind.parse(args.kind), restarts=args.restarts,
                           max_iterations=args.max_iterations,
                           gradient_tolerance=args.tolerance, seed=RandomSeed(args.seed),
                           workers=args.workers)
    out = best_of(args.N, opts)
    if args.out:
        _ensure_dir(os.path.dirname(os.path.abspath(args.out)))
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y", "z"])
            for p in out.configuration.points:
                w.writerow([_r(v) for v in p])
    print(f"N={args.N} kind={opts.energy_kind} energy={out.energy!r} converged={out.converged} "
          f"restart={out.restart_index_of_best} iterations={out.iterations}")
    return 0


def hcurve_rows(t_max, samples):
    t = np.linspace(0.0, t_max, samples)
    return t, theory.scaling_H(t) - 1.0


def cmd_hcurve(args):
    if args.t_max <= 0 or args.samples < 2:
        raise ParseError("hcurve needs --t-max > 0 and --samples >= 2")
    t, h = hcurve_rows(args.t_max, args.samples)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "H_minus_1"])
        for a, b in zip(t, h):
            w.writerow([_r(a), _r(b)])
    finally:
        if args.out:
            fh.close()
    return 0


def _need(obj, key, path, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{path}: missing field {where}{key}")
    return obj[key]


def _fmt(x, spec=".6g"):
    return "n/a" if x is None else format(x, spec)


def format_report(summaries):
    """Plain-text comparison table for ``(label, summary_dict)`` pairs."""
    lines = []
    for path, summ in summaries:
        degrees = _need(summ, "degrees", path, "")
        lines.append(f"== {path}")
        for n in sorted(degrees, key=int):
            d = degrees[n]
            kinds = _need(d, "kinds", path, f"degrees.{n}.")
            lines.append(f"N={n} trials={_need(d, 'trials', path, f'degrees.{n}.')} "
                         f"discarded={d.get('discarded', 0)} healthy={d.get('healthy', True)}")
            for kind in sorted(kinds):
                st = kinds[kind]
                where = f"degrees.{n}.kinds.{kind}."
                pred = _need(st, "predictor", path, where)
                mean = _need(st, "mean", path, where)
                se = st.get("standard_error")
                row = (f"  {kind:<8} mean={_fmt(mean)} +- {_fmt(se)} "
                       f"predictor={_fmt(_need(pred, 'total', path, where + 'predictor.'))} "
                       f"residual={_fmt(st.get('residual'))}")
                ref = st.get("minimum_reference")
                if ref:
                    row += f" min_ref={_fmt(ref.get('total'))}"
                if st.get("tail_fractions"):
                    row += " tail=" + ",".join(f"eps{k}:{v:.3f}"
                                               for k, v in sorted(st["tail_fractions"].items()))
                unresolved = list(pred.get("unresolved", []))
                if ref:
                    unresolved += ref.get("unresolved", [])
                if unresolved:
                    row += " unresolved: " + "; ".join(unresolved)
                lines.append(row)
            if "paircorr" in d:
                pc = d["paircorr"]
                lines.append(f"  paircorr l2_to_H={_fmt(pc.get('l2_to_H'))} "
                             f"nn_median_u={_fmt(pc.get('nearest_neighbor_u_median'))}")
    return "\n".join(lines) + "\n"


def cmd_report(args):
    summaries = []
    for path in args.summaries:
        try:
            with open(path) as fh:
                summaries.append((path, json.load(fh)))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    print(format_report(summaries), end="")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="sphzeros", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, out_help="output path"):
        sp.add_argument("--seed", type=int, default=None if sp.prog.endswith(("sweep", "paircorr")) else 0,
                        help="root seed (64-bit unsigned)")
        sp.add_argument("--config", default=None, help="TOML experiment config")
        sp.add_argument("--out", default=None, help=out_help)
        sp.add_argument("--workers", type=int, default=None,
                        help=f"worker count (default ${WORKERS_ENV} or 1)")

    sp = sub.add_parser("sample", help="zeros of one random SU(2) polynomial")
    common(sp, "output directory (zeros.csv, zeros.svg)")
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--stream", type=int, default=0)
    sp.add_argument("--view", choices=("plane", "sphere", "both"), default="both")
    sp.add_argument("--half-width", type=float, default=3.0)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("energy", help="energies of a point set or one random sample")
    common(sp)
    sp.add_argument("--input", help="CSV with x, y, z columns")
    sp.add_argument("--degree", type=int)
    sp.add_argument("--stream", type=int, default=0)
    sp.add_argument("--s", type=float, action="append")
    sp.set_defaults(func=cmd_energy)

    sp = sub.add_parser("predict", help="asymptotic predictors and minimum references")
    common(sp)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--s", type=float, action="append")
    sp.set_defaults(func=cmd_predict)

    for name, func, helptext in (("sweep", cmd_sweep, "Monte Carlo energies (+ fits for >= 3 degrees)"),
                                 ("paircorr", cmd_paircorr, "pair correlation against H(u^2/2)")):
        sp = sub.add_parser(name, help=helptext)
        common(sp, "output directory")
        sp.add_argument("--degrees", type=int, nargs="+")
        sp.add_argument("--trials", type=int)
        sp.add_argument("--s", type=float, action="append")
        sp.add_argument("--max-u", type=float, dest="max_u")
        sp.add_argument("--bins", type=int)
        if name == "paircorr":
            sp.add_argument("--control", action="store_true", help="also run a Poisson control")
        sp.set_defaults(func=func)

    sp = sub.add_parser("minimize", help="near-minimal configuration by projected descent")
    common(sp, "CSV of unit vectors")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--kind", default="log", help="log | green | riesz:<s>")
    sp.add_argument("--restarts", type=int, default=5)
    sp.add_argument("--max-iterations", type=int, default=20000)
    sp.add_argument("--tolerance", type=float, default=1e-9)
    sp.set_defaults(func=cmd_minimize)

    sp = sub.add_parser("hcurve", help="samples of H(t) - 1 on a uniform grid")
    common(sp, "CSV path (default stdout)")
    sp.add_argument("--t-max", type=float, default=10.0)
    sp.add_argument("--samples", type=int, default=201)
    sp.set_defaults(func=cmd_hcurve)

    sp = sub.add_parser("report", help="comparison table from summary.json files")
    sp.add_argument("summaries", nargs="+")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", None) is None and hasattr(args, "workers"):
        args.workers = None if args.subcommand in ("sweep", "paircorr") else default_workers()
    try:
        return args.func(args)
    except (SphZerosError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {str(exc).splitlines()[0]}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
