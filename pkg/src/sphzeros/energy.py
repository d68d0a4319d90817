"""Pair energies of a configuration, summed over ordered pairs i != j.

Pair terms are produced in fixed row chunks (optionally on a thread pool)
and reduced with ``math.fsum``, which is correctly rounded and therefore
independent of chunk order, thread count and point order.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DegenerateConfigurationError, DomainError
from .sphere import GREEN_CONSTANT, SINGULARITY_FLOOR, SphereConfiguration

__all__ = ["EnergyReport", "s_energy", "log_energy", "green_energy",
           "min_pair_chordal", "energy_report", "pair_chords",
           "green_log_linkage"]

CHUNK_ROWS = 256
_LOG2 = math.log(2.0)
_GREEN_OFFSET = _LOG2 / (4.0 * math.pi) + GREEN_CONSTANT  # (2 log 2 - 1)/(4 pi)


@dataclass
class EnergyReport:
    n_points: int
    min_pair_chordal: float
    degenerate: bool
    green_energy: float | None = None
    log_energy: float | None = None
    s_energies: dict = field(default_factory=dict)


def _points(config):
    if isinstance(config, SphereConfiguration):
        return config.points
    return SphereConfiguration(config).points


def _chunk_chords(pts, start, stop):
    """Chordal distances from rows ``start:stop`` to all points, diagonal removed."""
    diff = pts[start:stop, None, :] - pts[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    keep = np.ones(d.shape, dtype=bool)
    rows = np.arange(stop - start)
    keep[rows, rows + start] = False
    return d[keep]


def pair_chords(config, workers=None):
    """Chordal distances of all ordered pairs as one flat array (fixed order)."""
    pts = _points(config)
    n = pts.shape[0]
    bounds = [(i, min(i + CHUNK_ROWS, n)) for i in range(0, n, CHUNK_ROWS)]
    if workers and workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _chunk_chords(pts, *b), bounds))
    else:
        parts = [_chunk_chords(pts, *b) for b in bounds]
    return np.concatenate(parts) if parts else np.zeros(0)


def min_pair_chordal(config):
    pts = _points(config)
    if pts.shape[0] < 2:
        raise DomainError("min_pair_chordal needs at least two points")
    return float(np.min(pair_chords(pts)))


def _checked_chords(config, floor, workers):
    pts = _points(config)
    if pts.shape[0] < 2:
        return np.zeros(0)
    d = pair_chords(pts, workers)
    m = float(np.min(d))
    if m < floor:
        raise DegenerateConfigurationError(m, floor)
    return d


def _s_sum(d, s):
    return math.fsum(d ** (-s))


def _log_sum(d):
    return math.fsum(-np.log(d))


def _green_sum(d):
    return math.fsum(-np.log(d) / (2.0 * math.pi) + _GREEN_OFFSET)


def s_energy(config, s, floor=SINGULARITY_FLOOR, workers=None):
    """Riesz s-energy ``sum_{i != j} chord_ij**(-s)`` for 0 < s < 4."""
    if not 0.0 < s < 4.0:
        raise DomainError(f"s-energy is defined here for 0 < s < 4, got s={s}")
    return _s_sum(_checked_chords(config, floor, workers), s)


def log_energy(config, floor=SINGULARITY_FLOOR, workers=None):
    """Logarithmic energy ``sum_{i != j} -log chord_ij``."""
    return _log_sum(_checked_chords(config, floor, workers))


def green_energy(config, floor=SINGULARITY_FLOOR, workers=None):
    """Green's energy ``sum_{i != j} G(x_i, x_j)`` with the zero-mean kernel."""
    return _green_sum(_checked_chords(config, floor, workers))


def green_log_linkage(log_value, n):
    """Green's energy implied by a log energy: ``E_0/(2pi) + (n^2-n)(2 log 2-1)/(4pi)``."""
    return log_value / (2.0 * math.pi) + (n * n - n) * (2.0 * _LOG2 - 1.0) / (4.0 * math.pi)


def energy_report(config, s_values=(), include_green=True, include_log=True,
                  floor=SINGULARITY_FLOOR, workers=None):
    """All requested energies from one pass over the pair distances.

    A configuration with a pair below ``floor`` yields ``degenerate=True``
    and no energy values instead of raising.
    """
    pts = _points(config)
    n = pts.shape[0]
    if n < 2:
        return EnergyReport(n, math.inf, False,
                            0.0 if include_green else None,
                            0.0 if include_log else None,
                            {float(s): 0.0 for s in s_values})
    d = pair_chords(pts, workers)
    m = float(np.min(d))
    if m < floor:
        return EnergyReport(n, m, True)
    report = EnergyReport(n, m, False)
    if include_log or include_green:
        neglog = -np.log(d)
        if include_log:
            report.log_energy = math.fsum(neglog)
        if include_green:
            report.green_energy = math.fsum(neglog / (2.0 * math.pi) + _GREEN_OFFSET)
    for s in s_values:
        if not 0.0 < s < 4.0:
            raise DomainError(f"s-energy is defined here for 0 < s < 4, got s={s}")
        report.s_energies[float(s)] = _s_sum(d, s)
    return report
