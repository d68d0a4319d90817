"""Universal kernel, mean-field constants and asymptotic energy predictors.

All logarithms are natural.  Predictors return a ``PredictorResult`` that
keeps every term separate; terms whose size the source expansion leaves
undetermined (cutoff ratios, unknown constants, error orders) are listed in
``unresolved`` and never summed into ``total``.

Pair sums follow the ordered-pair convention (``i != j``), twice the
``i < j`` sums used by the minimal-energy literature; the factor 2 is
applied inside ``minimum_reference``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import integrate

from .errors import DivergenceError, DomainError

__all__ = ["PredictorResult", "scaling_H", "h_tail_integral", "h_tail_integral_simpson",
           "mean_field", "predict_green_energy", "predict_s_energy",
           "predict_log_energy", "minimum_reference", "MINIMUM_KINDS"]

LOG2 = math.log(2.0)
# below this the closed form loses digits to cancellation; both branches
# agree with a 50-digit evaluation to ~1e-15 relative at the crossover
_SERIES_CUT = 0.4
# Taylor coefficients of H at 0 (odd powers t, t^3, ..., t^19)
_H_SERIES = (1.0, -2.0 / 9.0, 2.0 / 45.0, -4.0 / 525.0, 2.0 / 1701.0,
             -2764.0 / 16372125.0, 4.0 / 173745.0, -28936.0 / 9577693125.0,
             87734.0 / 227949096375.0, -698444.0 / 14584090145625.0)


@dataclass
class PredictorResult:
    terms: dict
    unresolved: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def total(self):
        return math.fsum(self.terms.values())

    @property
    def leading(self):
        return next(iter(self.terms.values()))

    def as_dict(self):
        return {"total": self.total, "terms": dict(self.terms),
                "unresolved": list(self.unresolved), "notes": dict(self.notes)}


def scaling_H(t):
    """``H(t) = ((sinh^2 t + t^2) cosh t - 2 t sinh t) / sinh^3 t``; scalar or array.

    Evaluated as ``coth t (1 + (t/sinh t)^2) - 2 t / sinh^2 t`` with the
    exponentials written in ``exp(-t)`` (no overflow), and by its odd Taylor
    series below t = 0.4 where the closed form cancels.
    """
    arr = np.asarray(t, dtype=np.float64)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("scaling_H is defined for t >= 0")
    out = np.empty_like(arr)
    small = arr < _SERIES_CUT
    ts = arr[small]
    t2 = ts * ts
    acc = np.zeros_like(ts)
    for c in reversed(_H_SERIES):
        acc = acc * t2 + c
    out[small] = ts * acc
    tl = arr[~small]
    e = np.exp(-tl)
    e2 = e * e
    one_minus = -np.expm1(-2.0 * tl)            # 1 - e^{-2t}
    coth = (1.0 + e2) / one_minus
    t_over_sinh = 2.0 * tl * e / one_minus
    out[~small] = coth * (1.0 + t_over_sinh ** 2) - t_over_sinh * (4.0 * e / one_minus)
    return out[()] if out.ndim == 0 else out


def _tail_integrand(r):
    return (scaling_H(0.5 * r * r) - 1.0) * r


def h_tail_integral(upper):
    """``2 * int_0^upper (H(r^2/2) - 1) r dr`` by adaptive quadrature (tends to -1)."""
    if not math.isfinite(upper):
        raise DomainError(f"upper limit must be finite, got {upper}")
    if upper <= 0:
        raise DomainError(f"upper limit must be positive, got {upper}")
    # breakpoints where the integrand changes shape
    pts = [p for p in (1.0, 2.0, 3.0, 5.0) if p < upper]
    val, _ = integrate.quad(_tail_integrand, 0.0, upper, points=pts or None,
                            limit=200, epsabs=1e-13, epsrel=1e-12)
    return 2.0 * val


def h_tail_integral_simpson(upper, intervals=20000):
    """Composite Simpson rule for the same integral (independent check)."""
    if intervals % 2:
        intervals += 1
    r = np.linspace(0.0, upper, intervals + 1)
    f = _tail_integrand(r)
    h = upper / intervals
    return 2.0 * h / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum())


def mean_field(s):
    """Expected pair kernel for two independent uniform points on the unit sphere.

    With ``u = chord**2 = 2(1 - cos phi)`` uniform on [0, 4] (density 1/4):
    ``E[chord^-s] = (1/4) int_0^4 u^(-s/2) du = 2^(1-s)/(2-s)`` for 0 < s < 2 and
    ``E[-log chord] = -(1/8) int_0^4 log u du = 1/2 - log 2`` for the
    logarithmic kernel (requested as ``s = 0``).
    """
    if s < 0:
        raise DomainError(f"mean_field needs s >= 0, got {s}")
    if s >= 2:
        raise DivergenceError(f"E[chord^-s] diverges for s >= 2 (got s={s})")
    if s == 0:
        return 0.5 - LOG2
    return 2.0 ** (1.0 - s) / (2.0 - s)


def _check_n(n):
    if n < 2:
        raise DomainError(f"predictors need N >= 2, got {n}")


def predict_green_energy(n):
    _check_n(n)
    return PredictorResult({"-(1/4pi) N log N": -n * math.log(n) / (4.0 * math.pi)},
                           ["O(N)"])


def predict_s_energy(n, s):
    _check_n(n)
    if not 0.0 < s < 4.0:
        raise DomainError(f"s must lie in (0, 4), got {s}")
    logn = math.log(n)
    if s == 2:
        return PredictorResult(
            {"(1/4) N^2 log N": 0.25 * n * n * logn,
             "(3/4) N^2 log log N": 0.75 * n * n * math.log(logn),
             "(1/2) N^2 log 2": 0.5 * n * n * LOG2},
            ["(M/L) cutoff terms: (1/2) N^2 (M/L)^2 - 2 N^2 log(M/L)", "o(N^2)"])
    if s < 2:
        second = n ** (1.0 + s / 2.0) * logn ** (1.0 - s / 2.0) / (2.0 * (2.0 - s))
        return PredictorResult(
            {"mean_field(s) N^2": mean_field(s) * n * n,
             "N^(1+s/2) (log N)^(1-s/2) / (2(2-s))": second},
            ["o(N^(1+s/2) (log N)^(1-s/2))"],
            {"second_term_sign_candidates": {"plus": +second,
                                             "minus": -second}})
    return PredictorResult(
        {"C N^(1+s/2) / (4-s) [C=1]": n ** (1.0 + s / 2.0) / (4.0 - s)},
        ["C (the constant cannot be determined: the cutoff ratio M/L is unknown)",
         "O(N^(1+s/2) (log N)^(1-s/2))"])


def predict_log_energy(n):
    """Five-term expansion of the expected logarithmic energy, as printed."""
    _check_n(n)
    logn = math.log(n)
    return PredictorResult(
        {"-(log 2 - 1/2) N^2": -(LOG2 - 0.5) * n * n,
         "(N/2) log^2 N": 0.5 * n * logn * logn,
         "-(1/2) N log log N log N": -0.5 * n * math.log(logn) * logn,
         "(1/2) N log N": 0.5 * n * logn,
         "(1/2)(log 2 + 1) N": 0.5 * (LOG2 + 1.0) * n},
        ["o(N)"])


MINIMUM_KINDS = ("green_elkies", "riesz2_KS", "rieszS_KS_bounds", "log_BBP")


def minimum_reference(n, kind, s=None):
    """Minimal-energy baselines, converted to ordered-pair sums where needed."""
    _check_n(n)
    logn = math.log(n)
    if kind == "green_elkies":
        return PredictorResult(
            {"-(1/4pi) N log N": -n * logn / (4.0 * math.pi),
             "-(11/(6pi)) N": -11.0 * n / (6.0 * math.pi)},
            ["o(N)"], {"form": "lower bound on the Green's energy"})
    if kind == "riesz2_KS":
        return PredictorResult({"2 * (1/8) N^2 log N": 0.25 * n * n * logn},
                               ["lower-order terms (asymptotic equivalence only)"],
                               {"unordered_coefficient": 0.125})
    if kind == "rieszS_KS_bounds":
        if s is None or not 2.0 < s < 4.0:
            raise DomainError(f"rieszS_KS_bounds needs 2 < s < 4, got s={s}")
        return PredictorResult({"N^(1+s/2)": n ** (1.0 + s / 2.0)}, ["C1", "C2"],
                               {"form": "C1 N^(1+s/2) <= E_s(N) <= C2 N^(1+s/2)"})
    if kind == "log_BBP":
        return PredictorResult(
            {"2 * -(log2/2 - 1/4) N^2": -2.0 * (0.5 * LOG2 - 0.25) * n * n,
             "2 * -(N/4) log N": -0.5 * n * logn},
            ["higher-order terms"])
    raise DomainError(f"unknown minimum reference kind {kind!r}; expected one of {MINIMUM_KINDS}")
