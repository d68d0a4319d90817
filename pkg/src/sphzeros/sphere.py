"""Round unit sphere: stereographic map, distances, Green's function.

Points are unit 3-vectors.  Arrays of points have shape ``(n, 3)``; every
pairwise function also broadcasts over leading axes.

Green's function
----------------
On the unit sphere ``-Lap G(a, .) = delta_a - 1/(4 pi)``.  For a zonal
function of the polar angle t, ``Lap f = (sin t f')' / sin t``, and
``f = log(1 - cos t)`` gives ``(sin t f')' = (1 + cos t)' = -sin t``, so
``Lap f = -1`` off the pole.  Hence ``-(1/4pi) log(1 - cos t)`` solves the
equation with the right point mass: near t = 0, ``1 - cos t ~ t**2 / 2`` and
the singular part is ``-(1/2pi) log t``.  The additive constant comes from
the zero-mean condition::

    int_{S^2} log(1 - cos t) dA = 2 pi int_0^2 log u du = 4 pi (log 2 - 1)

so ``G = -(1/4pi) log(1 - cos t) + (log 2 - 1)/(4pi)``.  Since
``1 - cos t = chord**2 / 2`` this is also
``G = -(1/2pi) log chord + (2 log 2 - 1)/(4pi)``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError, SingularityError

__all__ = ["SphereConfiguration", "to_sphere", "roots_to_sphere", "chordal",
           "round_distance", "greens_fs", "affine_chordal", "GREEN_CONSTANT",
           "SINGULARITY_FLOOR", "uniform_points", "random_rotation"]

GREEN_CONSTANT = (math.log(2.0) - 1.0) / (4.0 * math.pi)
SINGULARITY_FLOOR = 1e-12
NORTH_POLE = np.array([0.0, 0.0, 1.0])


@dataclass
class SphereConfiguration:
    points: np.ndarray = field(repr=False)
    source: dict | None = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] == 0:
            raise DomainError(f"expected a non-empty (n, 3) array, got shape {pts.shape}")
        norms = np.linalg.norm(pts, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise DomainError("configuration points must be unit vectors (|x| = 1 within 1e-12)")
        self.points = pts

    def __len__(self):
        return self.points.shape[0]

    @classmethod
    def normalized(cls, points, source=None):
        pts = np.asarray(points, dtype=np.float64)
        return cls(pts / np.linalg.norm(pts, axis=-1, keepdims=True), source)


def to_sphere(root):
    """Inverse stereographic projection from the north pole.

    Accepts a complex number, ``None``/``inf`` (the point at infinity) or a
    ``ProjectiveRoot``.
    """
    value = getattr(root, "value", root)
    if value is None or np.isinf(value):
        return NORTH_POLE.copy()
    z = complex(value)
    m = abs(z) ** 2
    d = m + 1.0
    return np.array([2.0 * z.real / d, 2.0 * z.imag / d, (m - 1.0) / d])


def roots_to_sphere(finite, n_infinite=0):
    """Vectorized ``to_sphere`` for an array of finite roots plus poles at infinity.

    For ``|z| > 1`` the formula is evaluated in ``w = 1/z`` so huge roots
    do not overflow ``|z|**2``.
    """
    z = np.asarray(finite, dtype=np.complex128)
    out = np.empty((z.size + n_infinite, 3))
    big = np.abs(z) > 1.0
    zi = z[~big]
    m = np.abs(zi) ** 2
    d = 1.0 + m
    out[:z.size][~big] = np.column_stack([2 * zi.real / d, 2 * zi.imag / d, (m - 1) / d])
    w = 1.0 / z[big]
    m = np.abs(w) ** 2
    d = 1.0 + m
    # z = 1/w:  2z/(1+|z|^2) = 2 conj(w)/(1+|w|^2),  (|z|^2-1)/(|z|^2+1) = (1-|w|^2)/(1+|w|^2)
    out[:z.size][big] = np.column_stack([2 * w.real / d, -2 * w.imag / d, (1 - m) / d])
    out[z.size:] = NORTH_POLE
    return out


def affine_chordal(z, w):
    """Chordal distance of two extended-plane points (``None`` or inf for infinity)."""
    zinf = z is None or np.isinf(z)
    winf = w is None or np.isinf(w)
    if zinf and winf:
        return 0.0
    if zinf or winf:
        finite = w if zinf else z
        return 2.0 / math.sqrt(1.0 + abs(finite) ** 2)
    return 2.0 * abs(z - w) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


def chordal(a, b):
    """Straight-line distance in R^3 (at most 2 on the unit sphere)."""
    return np.linalg.norm(np.asarray(a) - np.asarray(b), axis=-1)


def round_distance(a, b):
    """Geodesic angle ``atan2(|a x b|, a . b)``; accurate near 0 and near pi."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    return np.arctan2(cross, np.sum(a * b, axis=-1))


def greens_fs(a, b, floor=SINGULARITY_FLOOR):
    """Zero-mean Green's function of ``-Lap`` on the unit sphere (see module docstring)."""
    c = chordal(a, b)
    if np.any(c < floor):
        raise SingularityError(
            f"Green's function evaluated at chordal distance {np.min(c):.3e} < {floor:.1e}")
    # -(1/4pi) log(1 - cos t) with 1 - cos t = c**2 / 2, written through c for accuracy
    return -np.log(c) / (2.0 * math.pi) + math.log(2.0) / (4.0 * math.pi) + GREEN_CONSTANT


def uniform_points(n, rng):
    """``n`` i.i.d. uniform points (normalized Gaussian vectors)."""
    x = rng.standard_normal((n, 3))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def random_rotation(rng):
    """Haar-random element of SO(3) via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
