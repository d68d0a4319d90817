"""Zeros of a polynomial on the Riemann sphere.

``find_roots`` runs Aberth-Ehrlich simultaneous iteration.  Roots inside
the unit disk are corrected with Horner on ``p``; roots outside with Horner
on the reversed polynomial ``z**N p(1/z)``, so no power of ``|z| > 1`` is
ever formed.  ``companion_roots`` is an independent dense-eigenvalue oracle.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError, UnsupportedSizeError

__all__ = ["RootOptions", "ProjectiveRoot", "RootSet", "find_roots",
           "companion_roots", "residual", "newton_polygon_radii"]

EPS = np.finfo(np.float64).eps
COMPANION_MAX_DEGREE = 256


@dataclass(frozen=True)
class RootOptions:
    """Stopping rule for ``find_roots``.

    A root counts as converged once its scaled residual (see ``residual``)
    is at most ``max(tolerance, floor_factor * (N + 1) * eps)``; the second
    term is the Horner rounding floor, which exceeds 1e-13 once N > ~100.
    """

    tolerance: float = 1e-13
    max_iterations: int = 200
    deflation_threshold: float = 1e-13
    floor_factor: float = 4.0
    angle_offset: float = 0.5 * (math.sqrt(5.0) - 1.0)


@dataclass(frozen=True)
class ProjectiveRoot:
    value: complex | None          # None marks the point at infinity
    residual: float = 0.0

    @property
    def is_infinite(self):
        return self.value is None


@dataclass
class RootSet:
    """``degree`` zeros counted with multiplicity: finite ones plus ``n_infinite``."""

    finite: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    n_infinite: int
    degree: int
    converged: bool
    iterations: int

    @property
    def roots(self):
        out = [ProjectiveRoot(complex(z), float(r)) for z, r in zip(self.finite, self.residuals)]
        out.extend(ProjectiveRoot(None) for _ in range(self.n_infinite))
        return out

    def __len__(self):
        return self.finite.size + self.n_infinite


def _coefficients(poly):
    return np.asarray(getattr(poly, "coefficients", poly), dtype=np.complex128)


def _split_trivial(a, deflation_threshold):
    """Strip infinite roots (deflation) and exact zero roots.

    Deflation fires when the top coefficient is zero or when the Newton
    polygon puts a root of the reversed polynomial below the threshold,
    i.e. a root of ``p`` beyond ``1/threshold``.
    """
    a = a.copy()
    n_inf = 0
    while a.size > 1:
        top = abs(a[-1])
        if top == 0.0:
            a = a[:-1]
            n_inf += 1
            continue
        mods = np.abs(a[:-1])
        k = a.size - 1 - np.nonzero(mods)[0]  # distance from the top
        if k.size and np.min((top / mods[mods > 0]) ** (1.0 / k)) < deflation_threshold:
            a = a[:-1]
            n_inf += 1
            continue
        break
    n_zero = 0
    while a.size > 1 and a[0] == 0:
        a = a[1:]
        n_zero += 1
    return a, n_inf, n_zero


def _center_scale(a):
    """Rescale so the nonzero log-moduli are centred on 0.

    SU(2) coefficients span ``C(N, N/2)**0.5`` (about 1e308 at N = 2048);
    centring keeps both ends out of the subnormal range.
    """
    mods = np.abs(a[a != 0])
    lo, hi = math.log(mods.min()), math.log(mods.max())
    return a * math.exp(-0.5 * (lo + hi))


def newton_polygon_radii(a):
    """Root-modulus estimates from the upper convex hull of ``(j, log|a_j|)``.

    Returns one radius per root (length ``len(a) - 1``).
    """
    n = a.size - 1
    with np.errstate(divide="ignore"):
        la = np.log(np.abs(a))
    hull = []
    for j in range(n + 1):
        if not np.isfinite(la[j]):
            continue
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            # drop i1 when it lies on or below the chord i0 -> j
            if (la[i1] - la[i0]) * (j - i0) <= (la[j] - la[i0]) * (i1 - i0):
                hull.pop()
            else:
                break
        hull.append(j)
    radii = np.empty(n)
    pos = 0
    for i0, i1 in zip(hull[:-1], hull[1:]):
        m = i1 - i0
        radii[pos:pos + m] = math.exp((la[i0] - la[i1]) / m)
        pos += m
    return radii


def _initial_guess(a, offset):
    n = a.size - 1
    radii = newton_polygon_radii(a)
    out = np.empty(n, dtype=np.complex128)
    start = 0
    # place each hull segment's roots evenly on its circle
    while start < n:
        stop = start
        while stop < n and radii[stop] == radii[start]:
            stop += 1
        m = stop - start
        ang = 2.0 * np.pi * (np.arange(m) / m + start / n) + offset
        out[start:stop] = radii[start] * np.exp(1j * ang)
        start = stop
    return out


def _horner_ratio(c, x):
    """Return ``p(x)``, ``p'(x)`` and ``sum |c_j||x|^j`` for coefficients ``c`` (ascending)."""
    p = np.full(x.shape, c[-1], dtype=np.complex128)
    dp = np.zeros(x.shape, dtype=np.complex128)
    ax = np.abs(x)
    bound = np.full(x.shape, abs(c[-1]))
    ac = np.abs(c)
    for j in range(c.size - 2, -1, -1):
        dp = dp * x + p
        p = p * x + c[j]
        bound = bound * ax + ac[j]
    return p, dp, bound


def _newton_corrections(a, rev, z):
    """Newton ratios ``p/p'`` and scaled residuals, stable for any ``|z|``."""
    n = a.size - 1
    ratio = np.empty_like(z)
    res = np.empty(z.shape)
    inner = np.abs(z) <= 1.0
    if inner.any():
        p, dp, bound = _horner_ratio(a, z[inner])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio[inner] = p / dp
        res[inner] = np.abs(p) / bound
    outer = ~inner
    if outer.any():
        zo = z[outer]
        w = 1.0 / zo
        q, dq, bound = _horner_ratio(rev, w)
        # p'/p = N w - w**2 q'/q
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio[outer] = q / (n * w * q - w * w * dq)
        res[outer] = np.abs(q) / bound
    return ratio, res


def residual(poly, z):
    """Scaled residual ``|p(z)| / sum_j |a_j| |z|**j``.

    The normalizer is the Horner running-error scale, so the value is a
    backward error: 0 at an exact root, 1 where one term dominates with
    nothing to cancel it (e.g. ``z**2 - 1`` at ``z = 0`` gives 1).
    """
    a = _coefficients(poly)
    if not np.any(a):
        raise DomainError("residual of the zero polynomial is undefined")
    z = complex(z)
    if abs(z) <= 1.0:
        p, _, bound = _horner_ratio(a, np.array([z]))
    else:
        p, _, bound = _horner_ratio(a[::-1], np.array([1.0 / z]))
    return float(abs(p[0]) / bound[0])


def find_roots(poly, opts=None):
    """All zeros of ``poly`` in the extended plane by Aberth-Ehrlich iteration.

    Non-convergence is reported through ``RootSet.converged`` rather than
    raised; the caller decides whether to discard the sample.
    """
    opts = opts or RootOptions()
    a = _coefficients(poly)
    degree = a.size - 1
    if degree < 1:
        raise DomainError("find_roots needs degree >= 1")
    if not np.any(a):
        raise DomainError("the zero polynomial has no isolated roots")
    a, n_inf, n_zero = _split_trivial(a, opts.deflation_threshold)
    n = a.size - 1
    if n == 0:
        zeros = np.zeros(n_zero, dtype=np.complex128)
        return RootSet(zeros, np.zeros(n_zero), n_inf, degree, True, 0)
    a = _center_scale(a)
    rev = a[::-1]
    target = max(opts.tolerance, opts.floor_factor * (n + 1) * EPS)

    with np.errstate(all="ignore"):
        return _aberth(a, rev, degree, n_inf, n_zero, target, opts)


def _aberth(a, rev, degree, n_inf, n_zero, target, opts):
    n = a.size - 1
    z = _initial_guess(a, opts.angle_offset)
    active = np.ones(n, dtype=bool)
    res = np.full(n, np.inf)
    iterations = 0
    for iterations in range(1, opts.max_iterations + 1):
        idx = np.nonzero(active)[0]
        ratio, r = _newton_corrections(a, rev, z[idx])
        res[idx] = r
        done = (r <= target) | (ratio == 0)
        work = idx[~done]
        active[idx[done]] = False
        if work.size == 0:
            break
        diff = z[work, None] - z[None, :]
        diff[np.arange(work.size), work] = 1.0  # self term, cancelled below
        s = np.sum(1.0 / diff, axis=1) - 1.0
        rw = ratio[~done]
        step = rw / (1.0 - rw * s)
        bad = ~np.isfinite(step)
        step[bad] = rw[bad]
        z[work] -= step
        # a step below rounding of z cannot improve the residual further
        stuck = np.abs(step) <= 2.0 * EPS * np.abs(z[work])
        active[work[stuck]] = False
        if not active.any():
            break
    _, res = _newton_corrections(a, rev, z)
    converged = bool(np.all(np.isfinite(z)) and np.all(res <= target))
    finite = np.concatenate([np.zeros(n_zero, dtype=np.complex128), z])
    residuals = np.concatenate([np.zeros(n_zero), res])
    return RootSet(finite, residuals, n_inf, degree, converged, iterations)


def companion_roots(poly):
    """Eigenvalues of the companion matrix of the monic normalization.

    LAPACK ``geev`` balances the matrix before the QR iteration.
    """
    a = _coefficients(poly)
    degree = a.size - 1
    if degree < 1:
        raise DomainError("companion_roots needs degree >= 1")
    if degree > COMPANION_MAX_DEGREE:
        raise UnsupportedSizeError(
            f"companion oracle supports degree <= {COMPANION_MAX_DEGREE}, got {degree}")
    if not np.any(a):
        raise DomainError("the zero polynomial has no isolated roots")
    n_inf = 0
    while a[-1] == 0:
        a = a[:-1]
        n_inf += 1
    n = a.size - 1
    if n == 0:
        roots = np.zeros(0, dtype=np.complex128)
    elif n == 1:
        roots = np.array([-a[0] / a[1]])
    else:
        comp = np.zeros((n, n), dtype=np.complex128)
        comp[1:, :-1] = np.eye(n - 1)
        comp[:, -1] = -a[:-1] / a[-1]
        roots = np.linalg.eigvals(comp)
    res = np.array([residual(a, z) for z in roots]) if roots.size else np.zeros(0)
    return RootSet(roots, res, n_inf, degree, True, 0)
