"""Two-point statistics of zeros at the 1/sqrt(N) scale.

Scaled distance
---------------
The zeros live on CP^1 with the Fubini-Study metric of total area pi (the
metric whose Kahler form integrates to c_1(L) = 1).  Its geodesic distance is
half the round distance on the unit sphere, so the scaled separation used
here is::

    u = sqrt(N) * r_FS = sqrt(N) * round_distance / 2

and the limiting pair correlation is ``H(u^2 / 2)``.

Baseline
--------
For N independent uniform points the number of ordered pairs whose round
distance falls in ``[r_a, r_b]`` has mean ``N (N - 1) (cos r_a - cos r_b) / 2``
(a spherical annulus has area ``2 pi (cos r_a - cos r_b)`` out of ``4 pi``).
``g`` is the observed count divided by that, so a Poisson control is flat at
1 up to sampling noise.  For small r the annulus count is ``~ 2 N u du``.
"""

from dataclasses import dataclass, field
import csv
import math

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError
from .sphere import SphereConfiguration
from .theory import scaling_H

__all__ = ["PairHistogram", "PairCurve", "accumulate_pairs", "accumulate_pairs_bruteforce",
           "normalized_g", "compare_to_H", "nearest_neighbor_u", "write_curve_csv",
           "DEFAULT_MAX_U", "DEFAULT_BINS"]

DEFAULT_MAX_U = 4.0
DEFAULT_BINS = 40


@dataclass
class PairHistogram:
    """Ordered-pair counts per bin of scaled distance, summed over trials.

    ``counts_sq`` holds the per-trial squared counts so the across-trial
    standard error survives merging.
    """

    bin_edges: np.ndarray
    degree: int
    n_points: int
    counts: np.ndarray = None
    counts_sq: np.ndarray = None
    n_trials: int = 0

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=np.float64)
        nb = self.bin_edges.size - 1
        if self.counts is None:
            self.counts = np.zeros(nb, dtype=np.int64)
        if self.counts_sq is None:
            self.counts_sq = np.zeros(nb, dtype=np.int64)

    @classmethod
    def empty(cls, degree, max_u=DEFAULT_MAX_U, bins=DEFAULT_BINS, n_points=None):
        if max_u <= 0:
            raise DomainError(f"max_u must be positive, got {max_u}")
        if bins < 4:
            raise DomainError(f"need at least 4 bins, got {bins}")
        return cls(np.linspace(0.0, max_u, bins + 1), degree,
                   degree if n_points is None else n_points)

    def merge(self, other):
        if (other.degree != self.degree or other.n_points != self.n_points
                or not np.array_equal(other.bin_edges, self.bin_edges)):
            raise DomainError("cannot merge histograms with different degree, size or bins")
        return PairHistogram(self.bin_edges, self.degree, self.n_points,
                             self.counts + other.counts, self.counts_sq + other.counts_sq,
                             self.n_trials + other.n_trials)

    def __add__(self, other):
        return self.merge(other)


def _scaled_pairs_kdtree(pts, degree, max_u):
    """``u`` for every unordered pair with ``u <= max_u``."""
    r_max = 2.0 * max_u / math.sqrt(degree)
    if r_max >= math.pi:
        i, j = np.triu_indices(pts.shape[0], k=1)
    else:
        chord_max = 2.0 * math.sin(0.5 * r_max)
        # pad the chord radius; the exact cut is applied on u below
        pairs = cKDTree(pts).query_pairs(chord_max * (1 + 1e-9) + 1e-15, output_type="ndarray")
        i, j = pairs[:, 0], pairs[:, 1]
    a, b = pts[i], pts[j]
    r = np.arctan2(np.linalg.norm(np.cross(a, b), axis=1), np.sum(a * b, axis=1))
    u = 0.5 * math.sqrt(degree) * r
    return u[u <= max_u]


def _to_hist(u, degree, n_points, max_u, bins):
    hist = PairHistogram.empty(degree, max_u, bins, n_points)
    c, _ = np.histogram(u, bins=hist.bin_edges)
    c = 2 * c.astype(np.int64)  # ordered pairs
    hist.counts = c
    hist.counts_sq = c * c
    hist.n_trials = 1
    return hist


def accumulate_pairs(config, degree, max_u=DEFAULT_MAX_U, bins=DEFAULT_BINS):
    """One-trial histogram of ordered pairs with scaled distance ``u <= max_u``."""
    pts = config.points if isinstance(config, SphereConfiguration) else np.asarray(config, float)
    PairHistogram.empty(degree, max_u, bins)  # argument validation
    return _to_hist(_scaled_pairs_kdtree(pts, degree, max_u), degree, pts.shape[0], max_u, bins)


def accumulate_pairs_bruteforce(config, degree, max_u=DEFAULT_MAX_U, bins=DEFAULT_BINS):
    """O(N^2) reference for ``accumulate_pairs``."""
    pts = config.points if isinstance(config, SphereConfiguration) else np.asarray(config, float)
    i, j = np.triu_indices(pts.shape[0], k=1)
    a, b = pts[i], pts[j]
    r = np.arctan2(np.linalg.norm(np.cross(a, b), axis=1), np.sum(a * b, axis=1))
    u = 0.5 * math.sqrt(degree) * r
    return _to_hist(u[u <= max_u], degree, pts.shape[0], max_u, bins)


@dataclass
class PairCurve:
    u_mid: np.ndarray
    g: np.ndarray
    stderr: np.ndarray
    bin_edges: np.ndarray = field(repr=False)

    @property
    def h_reference(self):
        return scaling_H(0.5 * self.u_mid ** 2)


def normalized_g(hist):
    """Pair correlation ``g(u)`` relative to independent uniform points."""
    if hist.n_trials < 1 or not np.any(hist.counts):
        raise DomainError("pair histogram is empty")
    n = hist.n_points
    edges = hist.bin_edges
    r = 2.0 * edges / math.sqrt(hist.degree)
    cos_r = np.cos(np.minimum(r, math.pi))
    per_trial = n * (n - 1) * (cos_r[:-1] - cos_r[1:]) / 2.0
    t = hist.n_trials
    mean = hist.counts / t
    g = mean / per_trial
    if t > 1:
        var = np.maximum(hist.counts_sq / t - mean ** 2, 0.0) * t / (t - 1)
        stderr = np.sqrt(var / t) / per_trial
    else:
        stderr = np.sqrt(hist.counts) / per_trial
    return PairCurve(0.5 * (edges[:-1] + edges[1:]), g, stderr, edges)


def compare_to_H(curve, lo=0.2, hi=3.0):
    """Weighted L2 distance ``sqrt(sum (g - H(u^2/2))^2 du / (hi - lo))`` over bins in [lo, hi]."""
    edges = curve.bin_edges
    if edges[0] > lo or edges[-1] < hi:
        raise DomainError(f"curve covers [{edges[0]}, {edges[-1]}], need [{lo}, {hi}]")
    sel = (curve.u_mid >= lo) & (curve.u_mid <= hi)
    if not np.any(sel):
        raise DomainError("no bins inside the comparison window")
    du = np.diff(edges)[sel]
    diff = curve.g[sel] - curve.h_reference[sel]
    return float(math.sqrt(np.sum(diff * diff * du) / (hi - lo)))


def nearest_neighbor_u(config, degree):
    """Scaled nearest-neighbour distance ``sqrt(N) r_FS`` of every point."""
    pts = config.points if isinstance(config, SphereConfiguration) else np.asarray(config, float)
    _, idx = cKDTree(pts).query(pts, k=2)
    a, b = pts, pts[idx[:, 1]]
    r = np.arctan2(np.linalg.norm(np.cross(a, b), axis=1), np.sum(a * b, axis=1))
    return 0.5 * math.sqrt(degree) * r


def write_curve_csv(curve, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u_mid", "g", "H", "stderr"])
        for row in zip(curve.u_mid, curve.g, curve.h_reference, curve.stderr):
            w.writerow([repr(float(x)) for x in row])
