"""Monte Carlo estimates of expected energies of SU(2) zeros.

Every trial is a pure function of ``(root_seed, stream_index)``; stream
indices are assigned degree-major (``degree_position * trials + trial``)
before any work is dispatched, and results are folded in that order, so the
output does not depend on ``worker_count``.

Config file (TOML)
------------------
::

    degrees = [100, 200]          # required
    trials = 200                  # required, >= 1
    root_seed = 12345             # required, 0 <= seed < 2**64
    s_values = [1.0, 2.0]         # Riesz exponents in (0, 4)
    include_green = true
    include_log = true
    output_dir = "runs/demo"      # omitted -> nothing written
    worker_count = 4              # default: $SPHZEROS_WORKERS or 1
    tail_epsilons = [0.5]
    record_timing = false         # true fills wall_ms (breaks byte-stability)

    [paircorr]                    # optional
    max_u = 4.0
    bins = 40

    [roots]                       # optional
    tolerance = 1e-13
    max_iterations = 200

Unknown keys are rejected.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
import csv
import json
import math
import os
import time

import numpy as np
from scipy import stats

from . import theory
from .energy import EnergyReport, energy_report, green_log_linkage
from .ensemble import RandomSeed, sample_su2
from .errors import ConfigError, DomainError
from .paircorr import (PairHistogram, accumulate_pairs, compare_to_H, nearest_neighbor_u,
                       normalized_g, write_curve_csv)
from .rootfind import RootOptions, find_roots
from .sphere import roots_to_sphere

__all__ = ["ExperimentConfig", "TrialRecord", "TrialTable", "ExperimentResult",
           "load_config", "run_trial", "run_trials", "tail_fraction", "fit_leading",
           "sweep", "summarize", "DISCARD_CHORDAL", "UNHEALTHY_FRACTION", "WORKERS_ENV"]

DISCARD_CHORDAL = 1e-9
UNHEALTHY_FRACTION = 0.10
LINKAGE_RTOL = 1e-9
WORKERS_ENV = "SPHZEROS_WORKERS"


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class ExperimentConfig:
    degrees: list
    trials: int
    root_seed: int
    s_values: list = field(default_factory=list)
    include_green: bool = True
    include_log: bool = True
    paircorr: dict | None = None
    output_dir: str | None = None
    worker_count: int | None = None
    tail_epsilons: list = field(default_factory=lambda: [0.5])
    record_timing: bool = False
    roots: dict = field(default_factory=dict)

    def __post_init__(self):
        self.degrees = [int(d) for d in self.degrees]
        self.s_values = [float(s) for s in self.s_values]
        if not self.degrees:
            raise ConfigError("degrees must be non-empty")
        if any(d < 1 for d in self.degrees):
            raise ConfigError("every degree must be >= 1")
        if len(set(self.degrees)) != len(self.degrees):
            raise ConfigError("degrees must be distinct")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.root_seed < 2**64:
            raise ConfigError("root_seed must fit in 64 unsigned bits")
        if any(not 0.0 < s < 4.0 for s in self.s_values):
            raise ConfigError("s_values must lie in (0, 4)")
        if self.paircorr is not None:
            unknown = set(self.paircorr) - {"max_u", "bins"}
            if unknown:
                raise ConfigError(f"unknown paircorr keys: {sorted(unknown)}")
            self.paircorr = {"max_u": float(self.paircorr.get("max_u", 4.0)),
                             "bins": int(self.paircorr.get("bins", 40))}
        unknown = set(self.roots) - {"tolerance", "max_iterations"}
        if unknown:
            raise ConfigError(f"unknown roots keys: {sorted(unknown)}")

    @property
    def workers(self):
        return self.worker_count or default_workers()

    def root_options(self):
        return RootOptions(**self.roots)

    def to_dict(self):
        return asdict(self)


_CONFIG_KEYS = {f for f in ExperimentConfig.__dataclass_fields__}


def config_from_mapping(data):
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = {"degrees", "trials", "root_seed"} - set(data)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    try:
        return ExperimentConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, overrides=None):
    """Read a TOML config; ``overrides`` (e.g. CLI flags) take precedence."""
    import tomli

    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_mapping(data)


@dataclass
class TrialRecord:
    degree: int
    trial_index: int
    stream_index: int
    root_seed: int
    converged: bool
    discarded: bool
    reason: str
    energies: EnergyReport | None
    n_finite: int
    n_infinite: int
    wall_ms: float | None = None
    linkage_ok: bool = True

    @property
    def seed_derivation(self):
        return f"SeedSequence({self.root_seed}, spawn_key=({self.stream_index},))"

    def value(self, kind):
        e = self.energies
        if e is None or e.degenerate:
            return math.nan
        if kind == "green":
            return e.green_energy
        if kind == "log":
            return e.log_energy
        return e.s_energies[_s_of(kind)]


def _s_of(kind):
    if not str(kind).startswith("s_"):
        raise DomainError(f"unknown energy kind {kind!r}")
    return float(str(kind)[2:])


def kind_name(s):
    return f"s_{s:g}"


@dataclass
class _TrialTask:
    degree: int
    trial_index: int
    stream_index: int
    root_seed: int
    s_values: tuple
    include_green: bool
    include_log: bool
    paircorr: dict | None
    record_timing: bool
    roots: dict


def run_trial(task):
    """Sample, solve, map to the sphere and measure one trial.

    Returns ``(TrialRecord, PairHistogram | None, nearest-neighbour u array | None)``.
    """
    t0 = time.perf_counter()
    seed = RandomSeed(task.root_seed, task.stream_index)
    poly = sample_su2(task.degree, seed)
    roots = find_roots(poly, RootOptions(**task.roots))
    pts = roots_to_sphere(roots.finite, roots.n_infinite)
    hist = nn = None
    rec = TrialRecord(task.degree, task.trial_index, task.stream_index, task.root_seed,
                      roots.converged, False, "", None, roots.finite.size, roots.n_infinite)
    if not roots.converged:
        rec.discarded, rec.reason = True, "root-nonconvergence"
    elif len(roots) != task.degree:
        rec.discarded, rec.reason = True, "zero-count"
    else:
        rep = energy_report(pts, task.s_values, task.include_green, task.include_log,
                            floor=DISCARD_CHORDAL)
        rec.energies = rep
        if rep.degenerate:
            rec.discarded, rec.reason = True, "degenerate"
        else:
            if rep.log_energy is not None and rep.green_energy is not None:
                implied = green_log_linkage(rep.log_energy, task.degree)
                rec.linkage_ok = abs(implied - rep.green_energy) <= LINKAGE_RTOL * max(
                    1.0, abs(rep.green_energy))
            if task.paircorr is not None and task.degree >= 2:
                hist = accumulate_pairs(pts, task.degree, task.paircorr["max_u"],
                                        task.paircorr["bins"])
                nn = nearest_neighbor_u(pts, task.degree)
    if task.record_timing:
        rec.wall_ms = 1000.0 * (time.perf_counter() - t0)
    return rec, hist, nn


@dataclass
class TrialTable:
    records: list
    s_values: list

    def kinds(self, include_green=True, include_log=True):
        out = (["green"] if include_green else []) + (["log"] if include_log else [])
        return out + [kind_name(s) for s in self.s_values]

    def degrees(self):
        return sorted({r.degree for r in self.records})

    def at(self, degree):
        return [r for r in self.records if r.degree == degree]

    def values(self, degree, kind):
        """Energies of the non-discarded trials at ``degree``."""
        return np.array([r.value(kind) for r in self.at(degree) if not r.discarded])

    def columns(self):
        return (["degree", "trial_index", "converged", "discarded", "reason", "E_green", "E_log"]
                + [f"E_s_{s:g}" for s in self.s_values] + ["min_pair_chordal", "wall_ms"])

    @staticmethod
    def _fmt(x):
        return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))

    def row(self, r):
        e = r.energies
        ok = e is not None and not e.degenerate
        return ([r.degree, r.trial_index, int(r.converged), int(r.discarded), r.reason,
                 self._fmt(e.green_energy if ok else None), self._fmt(e.log_energy if ok else None)]
                + [self._fmt(e.s_energies.get(s) if ok else None) for s in self.s_values]
                + [self._fmt(e.min_pair_chordal if e is not None else None),
                   "" if r.wall_ms is None else f"{r.wall_ms:.3f}"])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns())
            for r in self.records:
                w.writerow(self.row(r))

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        s_values = []
        if rows:
            s_values = [float(k[4:]) for k in rows[0] if k.startswith("E_s_")]
        num = lambda v: float(v) if v != "" else None
        recs = []
        for row in rows:
            discarded = row["discarded"] == "1"
            rep = EnergyReport(int(row["degree"]), num(row["min_pair_chordal"]) or math.nan,
                               row["reason"] == "degenerate", num(row["E_green"]), num(row["E_log"]),
                               {s: num(row[f"E_s_{s:g}"]) for s in s_values})
            recs.append(TrialRecord(int(row["degree"]), int(row["trial_index"]), -1, -1,
                                    row["converged"] == "1", discarded, row["reason"],
                                    rep, -1, -1, num(row["wall_ms"])))
        return cls(recs, s_values)


def tail_fraction(table, degree, kind, threshold):
    """Fraction of kept trials at ``degree`` whose energy is >= ``threshold``."""
    vals = table.values(degree, kind)
    if vals.size == 0:
        raise DomainError(f"no usable trials at degree {degree}")
    return float(np.count_nonzero(vals >= threshold)) / vals.size


def _predictor(kind, n):
    if kind == "green":
        return theory.predict_green_energy(n), theory.minimum_reference(n, "green_elkies"), n * math.log(n)
    if kind == "log":
        return theory.predict_log_energy(n), theory.minimum_reference(n, "log_BBP"), n * n
    s = _s_of(kind)
    pred = theory.predict_s_energy(n, s)
    if s == 2:
        return pred, theory.minimum_reference(n, "riesz2_KS"), n * n * math.log(n)
    if s > 2:
        return pred, theory.minimum_reference(n, "rieszS_KS_bounds", s), n ** (1 + s / 2)
    return pred, None, n * n


def _stats(vals):
    n = vals.size
    if n == 0:
        return {"n_used": 0, "mean": None, "standard_error": None, "min": None, "max": None}
    sd = float(np.std(vals, ddof=1)) if n > 1 else math.nan
    return {"n_used": n, "mean": math.fsum(vals) / n,
            "standard_error": sd / math.sqrt(n) if n > 1 else None,
            "min": float(vals.min()), "max": float(vals.max())}


def summarize(table, config, extras=None):
    """Per-degree, per-kind statistics with predictor and baseline comparisons."""
    out = {"config": config.to_dict(), "degrees": {}}
    for n in config.degrees:
        recs = table.at(n)
        n_disc = sum(r.discarded for r in recs)
        reasons = {}
        for r in recs:
            if r.discarded:
                reasons[r.reason] = reasons.get(r.reason, 0) + 1
        frac = n_disc / len(recs) if recs else 0.0
        entry = {"trials": len(recs), "discarded": n_disc, "discarded_fraction": frac,
                 "discard_reasons": reasons, "healthy": frac <= UNHEALTHY_FRACTION,
                 "linkage_failures": sum(not r.linkage_ok for r in recs),
                 "zero_count_failures": sum(r.n_finite + r.n_infinite != n for r in recs
                                            if r.n_finite >= 0),
                 "kinds": {}}
        if n >= 2:
            for kind in table.kinds(config.include_green, config.include_log):
                st = _stats(table.values(n, kind))
                pred, ref, scale = _predictor(kind, n)
                st["predictor"] = pred.as_dict()
                st["scale"] = scale
                if st["mean"] is not None:
                    st["residual"] = st["mean"] - pred.total
                    st["scaled_residual"] = st["residual"] / scale
                    st["mean_over_scale"] = st["mean"] / scale
                if ref is not None:
                    st["minimum_reference"] = ref.as_dict()
                if kind == "green" and st["mean"] is not None:
                    elkies = theory.minimum_reference(n, "green_elkies").total
                    st["tail_fractions"] = {
                        f"{eps:g}": tail_fraction(table, n, kind, elkies + eps * n * math.log(n))
                        for eps in config.tail_epsilons}
                entry["kinds"][kind] = st
        if extras and n in extras:
            entry.update(extras[n])
        out["degrees"][str(n)] = entry
    out["healthy"] = all(d["healthy"] for d in out["degrees"].values())
    return out


@dataclass
class ExperimentResult:
    table: TrialTable
    summary: dict
    histograms: dict
    nearest_neighbor_u: dict


def _check_writable(path):
    try:
        os.makedirs(path, exist_ok=True)
        probe = os.path.join(path, ".write-probe")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        raise OSError(f"output directory {path!r} is not writable: {exc}") from exc


def _tasks(config):
    stream = 0
    for n in config.degrees:
        for t in range(config.trials):
            yield _TrialTask(n, t, stream, config.root_seed, tuple(config.s_values),
                             config.include_green, config.include_log, config.paircorr,
                             config.record_timing, dict(config.roots))
            stream += 1


def run_trials(config):
    """Run every trial of ``config`` and aggregate; writes files when ``output_dir`` is set."""
    if config.output_dir:
        _check_writable(config.output_dir)
    tasks = list(_tasks(config))
    records, hists, nns = [], {}, {}
    csv_fh = writer = None
    table = TrialTable(records, list(config.s_values))
    if config.output_dir:
        csv_fh = open(os.path.join(config.output_dir, "trials.csv"), "w", newline="")
        writer = csv.writer(csv_fh, lineterminator="\n")
        writer.writerow(table.columns())
    try:
        if config.workers > 1:
            pool = ProcessPoolExecutor(max_workers=config.workers)
            results = pool.map(run_trial, tasks, chunksize=max(1, len(tasks) // (8 * config.workers)))
        else:
            pool = None
            results = map(run_trial, tasks)
        for rec, hist, nn in results:
            records.append(rec)
            if writer is not None:
                writer.writerow(table.row(rec))
            if hist is not None:
                hists[rec.degree] = hist if rec.degree not in hists else hists[rec.degree] + hist
            if nn is not None:
                nns.setdefault(rec.degree, []).append(nn)
        if pool is not None:
            pool.shutdown()
    finally:
        if csv_fh is not None:
            csv_fh.close()
    nn_arrays = {n: np.concatenate(v) for n, v in nns.items()}
    extras = {}
    for n, hist in hists.items():
        curve = normalized_g(hist)
        extras[n] = {"paircorr": {"l2_to_H": compare_to_H(curve),
                                  "nearest_neighbor_u_median": float(np.median(nn_arrays[n])),
                                  "n_trials": hist.n_trials}}
    summary = summarize(table, config, extras)
    if config.output_dir:
        with open(os.path.join(config.output_dir, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True, allow_nan=False, default=_json_default)
            fh.write("\n")
        for n, hist in hists.items():
            write_curve_csv(normalized_g(hist), os.path.join(config.output_dir, f"paircorr_N{n}.csv"))
    return ExperimentResult(table, summary, hists, nn_arrays)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# regression ---------------------------------------------------------------

def _basis(kind, basis="leading"):
    """Named basis functions of N for the least-squares fit."""
    L = math.log
    if kind == "green":
        return [("N log N", lambda n: n * L(n)), ("N", lambda n: float(n))]
    if kind == "log":
        if basis == "full":
            return [("N^2", lambda n: float(n * n)), ("N log^2 N", lambda n: n * L(n) ** 2),
                    ("N log log N log N", lambda n: n * L(L(n)) * L(n)),
                    ("N log N", lambda n: n * L(n)), ("N", lambda n: float(n))]
        return [("N^2", lambda n: float(n * n)), ("N log^2 N", lambda n: n * L(n) ** 2)]
    s = _s_of(kind)
    if s == 2:
        return [("N^2 log N", lambda n: n * n * L(n)), ("N^2", lambda n: float(n * n))]
    sub = ("N^(1+s/2) (log N)^(1-s/2)", lambda n: n ** (1 + s / 2) * L(n) ** (1 - s / 2))
    if s < 2:
        return [("N^2", lambda n: float(n * n)), sub]
    return [("N^(1+s/2)", lambda n: n ** (1 + s / 2)), sub]


def fit_leading(degrees, means, kind, standard_errors=None, basis="leading", confidence=0.95):
    """Least-squares fit of mean energies on the kind's basis functions.

    With standard errors the fit is weighted and the interval uses the normal
    quantile; otherwise ordinary least squares with a t interval (when the
    fit has residual degrees of freedom).
    """
    funcs = _basis(kind, basis)
    degrees = [int(d) for d in degrees]
    y = np.asarray(means, dtype=np.float64)
    if len(degrees) < len(funcs) or len(degrees) < 3 and basis != "full":
        raise DomainError(f"need at least {max(3, len(funcs))} degrees, got {len(degrees)}")
    X = np.array([[f(n) for _, f in funcs] for n in degrees])
    colscale = np.max(np.abs(X), axis=0)
    Xs = X / colscale
    w = None
    if standard_errors is not None:
        se = np.asarray(standard_errors, dtype=np.float64)
        if np.all(se > 0):
            w = 1.0 / se
    A = Xs * w[:, None] if w is not None else Xs
    b = y * w if w is not None else y
    if np.linalg.matrix_rank(A) < len(funcs) or np.linalg.cond(A) > 1e12:
        raise DomainError("singular design matrix for the requested degrees")
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    dof = len(degrees) - len(funcs)
    gram_inv = np.linalg.inv(A.T @ A)
    if w is not None:
        cov = gram_inv
        q = stats.norm.ppf(0.5 + confidence / 2)
    else:
        rss = float(np.sum((A @ coef - b) ** 2))
        cov = gram_inv * (rss / dof if dof > 0 else math.nan)
        q = stats.t.ppf(0.5 + confidence / 2, dof) if dof > 0 else math.nan
    coef = coef / colscale
    err = np.sqrt(np.diag(cov)) / colscale
    return {"kind": kind, "basis": [name for name, _ in funcs], "degrees": degrees,
            "coefficients": dict(zip([name for name, _ in funcs], coef.tolist())),
            "standard_errors": dict(zip([name for name, _ in funcs], err.tolist())),
            "confidence": confidence,
            "intervals": {name: [c - q * e, c + q * e]
                          for (name, _), c, e in zip(funcs, coef.tolist(), err.tolist())}}


def sweep(config, result=None):
    """Run (or reuse) a multi-degree experiment and fit each energy kind."""
    if len(config.degrees) < 3:
        raise DomainError("a sweep needs at least 3 degrees")
    result = result or run_trials(config)
    fits = {}
    for kind in result.table.kinds(config.include_green, config.include_log):
        means, ses = [], []
        for n in config.degrees:
            st = result.summary["degrees"][str(n)]["kinds"][kind]
            means.append(st["mean"])
            ses.append(st["standard_error"])
        fits[kind] = fit_leading(config.degrees, means, kind,
                                 ses if all(s for s in ses) else None)
    return fits, result
