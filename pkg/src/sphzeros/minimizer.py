"""Near-minimal energy configurations by projected gradient descent.

Each iteration takes the Euclidean gradient of the pair energy, projects it
onto the tangent planes, steps along the negative projection and retracts
by renormalizing every point.  The step length starts from a
Barzilai-Borwein estimate (doubling the last accepted step when that is
unavailable) and is halved until the Armijo condition holds.  Near a minimum, where the
Armijo decrease is smaller than the rounding noise of the energy, a step is
also accepted if it shrinks the gradient while raising the energy by at most
16 ulps; accepted energies are therefore non-increasing up to that noise.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from . import energy as _energy
from .ensemble import RandomSeed, generator_for
from .errors import DomainError, OptimizationFailure
from .sphere import SINGULARITY_FLOOR, SphereConfiguration, uniform_points

__all__ = ["EnergyKind", "MinimizeOptions", "MinimizeOutcome", "energy_and_gradient",
           "evaluate_energy", "riemannian_descent", "best_of", "MAX_POINTS"]

MAX_POINTS = 500
ARMIJO_C = 1e-4
NOISE_ULPS = 16


@dataclass(frozen=True)
class EnergyKind:
    name: str               # "log", "riesz" or "green"
    s: float | None = None

    def __post_init__(self):
        if self.name not in ("log", "riesz", "green"):
            raise DomainError(f"unknown energy kind {self.name!r}")
        if self.name == "riesz" and (self.s is None or not 0.0 < self.s < 4.0):
            raise DomainError(f"riesz energy needs 0 < s < 4, got {self.s}")

    @classmethod
    def parse(cls, text):
        """``"log"``, ``"green"`` or ``"riesz:<s>"``."""
        if isinstance(text, cls):
            return text
        name, _, s = str(text).partition(":")
        return cls(name, float(s)) if s else cls(name)

    def __str__(self):
        return f"riesz:{self.s:g}" if self.name == "riesz" else self.name


@dataclass
class MinimizeOptions:
    energy_kind: EnergyKind = field(default_factory=lambda: EnergyKind("log"))
    restarts: int = 1
    max_iterations: int = 20000
    gradient_tolerance: float = 1e-9
    step_rule: str = "armijo-halving/bb-initial"
    seed: RandomSeed = field(default_factory=lambda: RandomSeed(0))
    workers: int | None = None

    def __post_init__(self):
        self.energy_kind = EnergyKind.parse(self.energy_kind)
        if self.restarts < 1:
            raise DomainError("restarts must be >= 1")
        if not self.gradient_tolerance > 0:
            raise DomainError("gradient_tolerance must be positive")


@dataclass
class MinimizeOutcome:
    configuration: SphereConfiguration
    energy: float
    converged: bool
    restart_index_of_best: int = 0
    iterations: int = 0
    gradient_norm: float = math.inf
    reinitializations: int = 0
    energy_trace: list = field(default_factory=list, repr=False)


def evaluate_energy(points, kind):
    """Energy from the energy module (the value reported to callers)."""
    if kind.name == "log":
        return _energy.log_energy(points)
    if kind.name == "green":
        return _energy.green_energy(points)
    return _energy.s_energy(points, kind.s)


def energy_and_gradient(points, kind):
    """Fast energy and Euclidean gradient ``dE/dx_i`` over ordered pairs.

    For ``E = sum_{i != j} f(d_ij)`` the gradient is
    ``2 sum_j f'(d_ij) (x_i - x_j) / d_ij``.  Returns ``(energy, grad, d_min)``.
    """
    diff = points[:, None, :] - points[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    n = points.shape[0]
    np.fill_diagonal(d2, 1.0)
    d_min = math.sqrt(float(np.min(d2))) if n > 1 else math.inf
    if d_min < SINGULARITY_FLOOR:
        return math.inf, None, d_min
    if kind.name == "riesz":
        s = kind.s
        pw = d2 ** (-0.5 * s)
        np.fill_diagonal(pw, 0.0)
        e = float(pw.sum())
        w = -s * pw / d2                      # f'(d)/d
    else:
        ld = -0.5 * np.log(d2)
        np.fill_diagonal(ld, 0.0)
        e = float(ld.sum())
        w = -1.0 / d2
        np.fill_diagonal(w, 0.0)
        if kind.name == "green":
            scale = 1.0 / (2.0 * math.pi)
            e = scale * e + (n * n - n) * (2.0 * math.log(2.0) - 1.0) / (4.0 * math.pi)
            w = scale * w
    np.fill_diagonal(w, 0.0)
    grad = 2.0 * np.einsum("ij,ijk->ik", w, diff)
    return e, grad, d_min


def _tangent(points, grad):
    return grad - np.sum(grad * points, axis=1, keepdims=True) * points


def _retract(points):
    return points / np.linalg.norm(points, axis=1, keepdims=True)


def riemannian_descent(initial, opts, rng=None):
    """Descend from ``initial``; restarts from fresh uniform points if it degenerates."""
    pts = initial.points if isinstance(initial, SphereConfiguration) else np.asarray(initial, float)
    pts = _retract(pts.copy())
    n = pts.shape[0]
    if n < 2:
        raise DomainError("need at least two points")
    if n > MAX_POINTS:
        raise DomainError(f"minimizer supports N <= {MAX_POINTS}, got {n}")
    kind = opts.energy_kind
    rng = rng if rng is not None else generator_for(opts.seed)
    reinit = 0
    e, grad, _ = energy_and_gradient(pts, kind)
    while grad is None:
        reinit += 1
        pts = uniform_points(n, rng)
        e, grad, _ = energy_and_gradient(pts, kind)
    g = _tangent(pts, grad)
    gnorm = float(np.max(np.linalg.norm(g, axis=1)))
    step = 1.0 / (1.0 + float(np.max(np.linalg.norm(grad, axis=1))))
    prev = None
    it = 0
    trace = [e]
    converged = gnorm <= opts.gradient_tolerance
    while not converged and it < opts.max_iterations:
        it += 1
        if prev is not None:
            s_vec = pts - prev[0]
            y_vec = g - prev[1]
            sy = float(np.sum(s_vec * y_vec))
            if sy > 0:
                step = float(np.sum(s_vec * s_vec)) / sy
        gg = float(np.sum(g * g))
        t = step
        accepted = False
        # once the predicted decrease drops under the rounding noise of e,
        # accept steps that keep e within that noise and shrink the gradient
        noise = NOISE_ULPS * np.finfo(float).eps * abs(e)
        for _ in range(80):
            trial = _retract(pts - t * g)
            e_new, grad_new, d_min = energy_and_gradient(trial, kind)
            if grad_new is not None:
                if e_new <= e - ARMIJO_C * t * gg:
                    accepted = True
                    break
                if (ARMIJO_C * t * gg < noise and e_new <= e + noise
                        and np.max(np.linalg.norm(_tangent(trial, grad_new), axis=1)) < gnorm):
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            if grad_new is None and d_min < SINGULARITY_FLOOR:
                reinit += 1
                pts = uniform_points(n, rng)
                e, grad, _ = energy_and_gradient(pts, kind)
                g = _tangent(pts, grad)
                prev = None
                trace.append(e)
                continue
            break  # no representable decrease left
        prev = (pts, g)
        pts, e = trial, e_new
        trace.append(e)
        g = _tangent(pts, grad_new)
        gnorm = float(np.max(np.linalg.norm(g, axis=1)))
        step = 2.0 * t
        converged = gnorm <= opts.gradient_tolerance
    config = SphereConfiguration(pts)
    return MinimizeOutcome(config, evaluate_energy(config, kind), bool(converged),
                           0, it, gnorm, reinit, trace)


def _one_restart(n, opts, r):
    rng = generator_for(opts.seed, r)
    out = riemannian_descent(uniform_points(n, rng), opts, rng)
    out.restart_index_of_best = r
    return out


def run_restarts(n, opts):
    """All restart outcomes in restart order."""
    if n < 2:
        raise DomainError("need at least two points")
    if opts.workers and opts.workers > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            return list(pool.map(lambda r: _one_restart(n, opts, r), range(opts.restarts)))
    return [_one_restart(n, opts, r) for r in range(opts.restarts)]


def best_of(n, opts):
    """Lowest-energy converged outcome over ``opts.restarts`` seeded restarts."""
    outs = [o for o in run_restarts(n, opts) if o.converged]
    if not outs:
        raise OptimizationFailure(f"none of {opts.restarts} restarts converged for N={n}")
    return min(outs, key=lambda o: (o.energy, o.restart_index_of_best))
