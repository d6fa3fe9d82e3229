"""Kernels: root finding, Moebius maps, divisors, finite differences."""

import numpy as np
import pytest

from dualcx.errors import RootFindingError, ValidationError
from dualcx.numerics import (
    INF,
    Divisor,
    Mobius,
    Poly,
    aberth_roots,
    chordal,
    finite_diff_jacobian,
    is_inf,
    mobius_from_triple,
    numerical_rank,
    poly_from_roots,
    poly_roots,
    rational_divisor,
)


def sorted_roots(pairs):
    return sorted(((round(z.real, 6), round(z.imag, 6)), m) for z, m in pairs)


def test_cube_roots_of_unity():
    roots = poly_roots(Poly([-1, 0, 0, 1]))
    assert sorted_roots(roots) == [((-0.5, -0.866025), 1), ((-0.5, 0.866025), 1), ((1.0, -0.0), 1)]


def test_double_root_multiplicity():
    roots = poly_roots(poly_from_roots([2, 2, -1]))
    assert sorted(m for _, m in roots) == [1, 2]
    double = next(z for z, m in roots if m == 2)
    assert abs(double - 2) < 1e-6


def test_random_degree_nine_against_factors():
    rng = np.random.default_rng(11)
    for _ in range(4):
        want = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        p = poly_from_roots(want, leading=complex(rng.standard_normal(), rng.standard_normal()))
        got = sorted(aberth_roots(p), key=lambda z: (z.real, z.imag))
        ref = sorted(map(complex, want), key=lambda z: (z.real, z.imag))
        assert max(abs(a - b) for a, b in zip(got, ref)) < 1e-10


def test_roots_against_companion_matrix():
    # independent oracle: eigenvalues of the companion matrix
    rng = np.random.default_rng(5)
    coef = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    p = Poly(coef)
    mine = sorted(aberth_roots(p), key=lambda z: (z.real, z.imag))
    numpy_roots = sorted(np.roots(coef[::-1]).tolist(), key=lambda z: (z.real, z.imag))
    assert max(abs(a - b) for a, b in zip(mine, numpy_roots)) < 1e-9


def test_product_roots_are_union():
    rng = np.random.default_rng(3)
    for _ in range(5):
        ra = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        rb = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        roots = poly_roots(poly_from_roots(ra) * poly_from_roots(rb))
        assert sum(m for _, m in roots) == 5
        for want in list(ra) + list(rb):
            assert min(abs(z - want) for z, _ in roots) < 1e-8


def test_nonconvergence_is_loud():
    with pytest.raises(ValidationError):
        aberth_roots(Poly([1.0]))
    with pytest.raises(RootFindingError):
        aberth_roots(Poly([1, 1]), max_iter=0)


def test_mobius_triple_and_inverse():
    m = mobius_from_triple(1, 2, 3)
    assert abs(m(1)) < 1e-12 and is_inf(m(2)) and abs(m(3) - 1) < 1e-12
    ident = mobius_from_triple(0, INF, 1)
    assert abs(ident(0.5) - 0.5) < 1e-12 and is_inf(ident(INF))
    rng = np.random.default_rng(7)
    for _ in range(100):
        z = complex(rng.standard_normal(), rng.standard_normal())
        assert abs(m.inverse()(m(z)) - z) <= 1e-12 * max(1.0, abs(z))


def test_mobius_group_laws():
    rng = np.random.default_rng(9)
    a = Mobius(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    b = Mobius(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    for _ in range(20):
        z = complex(rng.standard_normal(), rng.standard_normal())
        assert abs(a.compose(b)(z) - a(b(z))) < 1e-12 * max(1.0, abs(a(b(z))))


def test_mobius_rejects_coincident_points():
    with pytest.raises(ValidationError):
        mobius_from_triple(1.0, 1.0 + 1e-15, 2.0)


def test_divisor_of_scale_function():
    # n^2 (t - n) / (t - 2n)^3 at n = 2: zeros {2, inf x2}, poles {4 x3}
    n = 2.0
    num = (n**2) * Poly([-n, 1])
    den = Poly([-2 * n, 1]) ** 3
    div = rational_divisor(num, den)
    # a triple root is only locatable to about eps**(1/3)
    entries = {("inf" if is_inf(z) else round(z.real, 4)): m for z, m in div.points}
    assert entries == {2.0: 1, 4.0: -3, "inf": 2}
    assert div.degree() == 0


def test_divisor_of_auxiliary_function():
    # (t - n)/(t - 1)^2 at n = 2: [inf] + [2] - 2[1]
    div = rational_divisor(Poly([-2, 1]), Poly([-1, 1]) ** 2)
    entries = {("inf" if is_inf(z) else round(z.real, 6)): m for z, m in div.points}
    assert entries == {2.0: 1, 1.0: -2, "inf": 1}


def test_divisor_constant_is_empty():
    assert rational_divisor(Poly([3.0]), Poly([1.5])).points == []


def test_divisor_degree_zero_randomized():
    rng = np.random.default_rng(21)
    for _ in range(10):
        num = poly_from_roots(rng.standard_normal(int(rng.integers(1, 6))))
        den = poly_from_roots(rng.standard_normal(int(rng.integers(1, 6))) + 0.5)
        assert rational_divisor(num, den).degree() == 0


def test_divisor_split_and_merge():
    d = Divisor([(1.0, 2), (1.0 + 1e-12, -1), (3.0, 1), (INF, 1)])
    merged = d.merged()
    assert merged.degree() == 3
    mults, off = merged.split_at([1.0, 3.0])
    assert mults == [1, 1]
    assert len(off.points) == 1 and is_inf(off.points[0][0])


def test_chordal_metric():
    assert chordal(INF, INF) == 0.0
    assert abs(chordal(0, INF) - 1.0) < 1e-12
    assert chordal(1e9, INF) < 1e-8


def test_jacobian_identity_map():
    fd = finite_diff_jacobian(lambda x: x.copy(), np.array([0.3, -0.2]))
    assert fd.rank == 2
    assert np.allclose(fd.singular_values, [1.0, 1.0], atol=1e-9)


def test_jacobian_analytic_oracle():
    fd = finite_diff_jacobian(lambda x: np.array([x[0] ** 2, x[0] * x[1]]), np.array([1.0, 1.0]))
    assert np.allclose(fd.matrix, [[2.0, 0.0], [1.0, 1.0]], atol=1e-9)
    assert fd.rank == 2
    assert fd.richardson_disagreement < 1e-8


def test_jacobian_rank_deficiency_and_invariance():
    fd = finite_diff_jacobian(lambda x: np.array([x[0], x[0]]), np.array([0.5, 0.5]))
    assert fd.rank == 1
    # rank is invariant under orthogonal recombination of the outputs
    theta = 0.7
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    fd2 = finite_diff_jacobian(lambda x: rot @ np.array([x[0], x[0]]), np.array([0.5, 0.5]))
    assert fd2.rank == 1
    rank, _ = numerical_rank(rot @ fd.matrix)
    assert rank == 1
