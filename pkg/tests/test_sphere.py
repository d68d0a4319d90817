import math

import numpy as np
import pytest
from scipy import integrate

from sphzeros.errors import DomainError, SingularityError
from sphzeros.rootfind import ProjectiveRoot
from sphzeros.sphere import (GREEN_CONSTANT, SphereConfiguration, affine_chordal, chordal,
                             greens_fs, random_rotation, round_distance, roots_to_sphere,
                             to_sphere, uniform_points)

NORTH = np.array([0.0, 0.0, 1.0])
SOUTH = -NORTH


def test_to_sphere_examples():
    assert np.allclose(to_sphere(0), [0, 0, -1])
    assert np.allclose(to_sphere(None), [0, 0, 1])
    assert np.allclose(to_sphere(ProjectiveRoot(None)), [0, 0, 1])
    assert np.allclose(to_sphere(1), [1, 0, 0])
    assert np.allclose(to_sphere(ProjectiveRoot(1j, 0.0)), [0, 1, 0])


def test_vectorized_projection_matches_scalar(rng):
    z = (rng.standard_normal(50) + 1j * rng.standard_normal(50)) * np.exp(3 * rng.standard_normal(50))
    pts = roots_to_sphere(z, 2)
    for zi, p in zip(z, pts):
        assert np.allclose(p, to_sphere(zi), atol=1e-14)
    assert np.allclose(pts[-2:], NORTH)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-14)


def test_huge_roots_do_not_overflow():
    p = roots_to_sphere(np.array([1e250 + 1e250j]))
    assert np.all(np.isfinite(p)) and p[0, 2] == pytest.approx(1.0)


def test_affine_chordal_agrees_with_embedding(rng):
    z = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    for a, b in zip(z[:-1], z[1:]):
        assert affine_chordal(a, b) == pytest.approx(chordal(to_sphere(a), to_sphere(b)), rel=1e-12)
    assert affine_chordal(z[0], None) == pytest.approx(chordal(to_sphere(z[0]), NORTH), rel=1e-12)
    assert affine_chordal(None, None) == 0.0


def test_chordal_examples():
    assert chordal(NORTH, NORTH) == 0.0
    assert chordal(NORTH, SOUTH) == 2.0
    # cos r = 0  ->  sqrt(2)
    assert chordal(NORTH, [1.0, 0.0, 0.0]) == pytest.approx(math.sqrt(2.0), abs=1e-15)


def test_round_distance_examples():
    assert round_distance(NORTH, NORTH) == 0.0
    assert round_distance(NORTH, SOUTH) == pytest.approx(math.pi, abs=1e-15)
    assert round_distance(NORTH, [0.0, 1.0, 0.0]) == pytest.approx(math.pi / 2, abs=1e-15)


def test_round_distance_stable_near_coincidence():
    eps = 1e-9
    b = np.array([math.sin(eps), 0.0, math.cos(eps)])
    assert round_distance(NORTH, b) == pytest.approx(eps, rel=1e-6)


def test_chordal_round_relation(rng):
    a = uniform_points(100_000, rng)
    b = uniform_points(100_000, rng)
    c = chordal(a, b)
    r = round_distance(a, b)
    assert np.max(np.abs(c ** 2 - 2 * (1 - np.cos(r)))) <= 1e-12


def test_rotation_invariance(rng, rotation):
    a = uniform_points(1000, rng)
    b = uniform_points(1000, rng)
    ra, rb = a @ rotation.T, b @ rotation.T
    assert np.max(np.abs(chordal(a, b) - chordal(ra, rb))) <= 1e-12
    assert np.max(np.abs(round_distance(a, b) - round_distance(ra, rb))) <= 1e-12
    assert np.max(np.abs(greens_fs(a, b) - greens_fs(ra, rb))) <= 1e-12


def test_exact_symmetry(rng):
    a = uniform_points(500, rng)
    b = uniform_points(500, rng)
    assert np.array_equal(chordal(a, b), chordal(b, a))
    assert np.array_equal(round_distance(a, b), round_distance(b, a))
    assert np.array_equal(greens_fs(a, b), greens_fs(b, a))


def test_random_rotation_is_proper(rng):
    q = random_rotation(rng)
    assert np.allclose(q @ q.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(q) == pytest.approx(1.0)


# Green's function -----------------------------------------------------------

def test_green_antipodal_value():
    assert greens_fs(NORTH, SOUTH) == pytest.approx(-1.0 / (4.0 * math.pi), abs=1e-15)


def _zonal_green(t):
    return greens_fs(NORTH, np.array([math.sin(t), 0.0, math.cos(t)]))


@pytest.mark.parametrize("t", [0.3, 1.0, 2.0, 2.8])
def test_green_solves_radial_equation(t):
    # (sin t G')' / sin t = 1/(4 pi) off the pole, by central differences
    h = 1e-4
    def flux(x):
        return math.sin(x) * (_zonal_green(x + h / 2) - _zonal_green(x - h / 2)) / h
    lap = (flux(t + h / 2) - flux(t - h / 2)) / h / math.sin(t)
    assert lap == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-5)


def test_green_log_pole_normalization():
    def regular_part(r):
        return _zonal_green(r) + math.log(r) / (2.0 * math.pi)
    assert abs(regular_part(1e-3) - regular_part(1e-6)) <= 1e-3
    # limit value: (2 log 2 - 1)/(4 pi) ... the regular part converges to it
    assert regular_part(1e-6) == pytest.approx((2 * math.log(2) - 1) / (4 * math.pi), abs=1e-9)


def test_green_zero_mean_by_adaptive_quadrature():
    # zonal: int G dA = 2 pi int_{-1}^{1} g(x) dx with x = cos t
    def g(x):
        return -math.log1p(-x) / (4 * math.pi) + GREEN_CONSTANT
    val, _ = integrate.quad(g, -1.0, 1.0, limit=200)
    assert abs(2 * math.pi * val) <= 1e-8


def test_green_zero_mean_on_million_point_equal_area_grid():
    # 10^6 equal-area latitude bands around the pole a; midpoint in x = cos t
    n = 1_000_000
    x = -1.0 + (np.arange(n) + 0.5) * (2.0 / n)
    g = -np.log1p(-x) / (4 * math.pi) + GREEN_CONSTANT
    total = 4 * math.pi * g.mean()
    assert abs(total) <= 1e-6


def test_green_singularity_error():
    with pytest.raises(SingularityError):
        greens_fs(NORTH, NORTH)


def test_configuration_validation():
    with pytest.raises(DomainError):
        SphereConfiguration(np.array([[1.0, 1.0, 0.0]]))
    with pytest.raises(DomainError):
        SphereConfiguration(np.zeros((0, 3)))
    cfg = SphereConfiguration.normalized([[3.0, 0, 4.0]])
    assert np.allclose(cfg.points, [[0.6, 0, 0.8]])
