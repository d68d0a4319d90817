import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linear_sum_assignment

from sphzeros.ensemble import PolynomialSample, RandomSeed, sample_su2
from sphzeros.errors import DomainError, UnsupportedSizeError
from sphzeros.rootfind import RootOptions, companion_roots, find_roots, residual


def poly(*coeffs_ascending):
    return PolynomialSample.from_coefficients(coeffs_ascending)


def matched_distance(a, b):
    d = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    i, j = linear_sum_assignment(d)
    return d[i, j].max()


def test_square_roots_of_one():
    rs = find_roots(poly(-1, 0, 1))
    assert rs.converged and len(rs) == 2
    assert matched_distance(rs.finite, [1, -1]) <= 1e-12
    assert np.all(rs.residuals <= 1e-12)


def test_cube_roots_of_unity():
    rs = find_roots(poly(-1, 0, 0, 1))
    expected = np.exp(2j * np.pi * np.arange(3) / 3)
    assert matched_distance(rs.finite, expected) <= 1e-12


def test_roots_property_lists_projective_roots():
    rs = find_roots(poly(0, 0, 1, 0))   # z^2 with a vanished leading term
    roots = rs.roots
    assert len(roots) == 3
    assert sum(r.is_infinite for r in roots) == 1
    assert all(r.value == 0 for r in roots if not r.is_infinite)


def test_deflation_produces_infinity_roots():
    rs = find_roots(poly(2, -3, 1, 0, 0))
    assert rs.n_infinite == 2 and len(rs) == 4
    assert matched_distance(rs.finite, [1, 2]) <= 1e-12


def test_near_zero_leading_coefficient_deflates():
    rs = find_roots(poly(1, 1, 1e-20))
    assert rs.n_infinite == 1
    assert rs.finite.size == 1


def test_zero_polynomial_rejected():
    with pytest.raises(DomainError):
        find_roots(poly(0, 0, 0))


def test_non_convergence_is_reported_not_raised():
    p = sample_su2(80, RandomSeed(3))
    rs = find_roots(p, RootOptions(max_iterations=1))
    assert rs.converged is False
    assert len(rs) == 80


def test_companion_examples():
    c = companion_roots(poly(2, -3, 1))
    assert matched_distance(c.finite, [1, 2]) <= 1e-12
    c = companion_roots(poly(3 + 1j, 2))
    assert c.finite[0] == pytest.approx(-(3 + 1j) / 2)
    coeffs = [-6.5, 2.25, 1.75, 1.0]
    c = companion_roots(poly(*coeffs))
    assert abs(np.sum(c.finite) - (-1.75)) <= 1e-10


def test_companion_size_limit():
    with pytest.raises(UnsupportedSizeError):
        companion_roots(sample_su2(300, RandomSeed(1)))


def test_residual_examples():
    p = poly(-1, 0, 1)
    assert residual(p, 1.0) <= 1e-16
    # |p(0)| = 1 and the normalizer sum_j |a_j||0|^j = |a_0| = 1
    assert residual(p, 0.0) == 1.0
    assert residual(p, 2.0) == pytest.approx(3.0 / 5.0)


def test_residual_at_oracle_roots():
    p = sample_su2(40, RandomSeed(8))
    for z in companion_roots(p).finite:
        assert residual(p, z) <= 1e-10


def test_residual_symmetric_under_reversal_branch():
    p = poly(1, 2, 3, 4)
    z = 1.0000001 + 0.5j
    direct = abs(np.polyval([4, 3, 2, 1], z)) / np.polyval([4, 3, 2, 1], abs(z))
    assert residual(p, z) == pytest.approx(direct, rel=1e-9)


@pytest.mark.parametrize("stream", range(100))
def test_aberth_matches_companion_oracle(stream):
    p = sample_su2(64, RandomSeed(777, stream))
    rs = find_roots(p)
    assert rs.converged and len(rs) == 64
    assert matched_distance(rs.finite, companion_roots(p).finite) <= 1e-8


@pytest.mark.parametrize("n", [1, 2, 7, 200, 1000, 2048])
def test_root_count_and_convergence_across_degrees(n):
    rs = find_roots(sample_su2(n, RandomSeed(11, n)))
    assert rs.converged
    assert rs.finite.size + rs.n_infinite == n


def _elementary_symmetric(roots):
    e = np.array([1.0 + 0j])
    for r in roots:
        e = np.convolve(e, [1.0, -r])
    return e  # descending: z^n - e1 z^{n-1} + ...


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=64), st.integers(min_value=0, max_value=2**32))
def test_vieta_full_set_for_monic_inputs(n, seed):
    rng = np.random.default_rng(seed)
    coeffs = np.append(rng.standard_normal(n) + 1j * rng.standard_normal(n), 1.0)
    rs = find_roots(PolynomialSample.from_coefficients(coeffs))
    assert rs.converged and rs.n_infinite == 0
    rebuilt = _elementary_symmetric(rs.finite)[::-1]
    # relative to e_k(|r_1|, ..., |r_n|), the magnitude scale of each symmetric function
    scale = np.abs(_elementary_symmetric(-np.abs(rs.finite))[::-1])
    assert np.all(np.abs(rebuilt - coeffs) <= 1e-8 * scale)


def test_huge_and_tiny_roots_are_resolved():
    # roots at 1e-8, 1, 1e8
    roots = np.array([1e-8, 1.0, 1e8])
    coeffs = _elementary_symmetric(roots)[::-1]
    rs = find_roots(PolynomialSample.from_coefficients(coeffs))
    got = np.sort(np.abs(rs.finite))
    assert np.allclose(got, roots, rtol=1e-10)
