import math
from fractions import Fraction

import numpy as np
import pytest

from spherelok.ultraspherical import (
    UltrasphericalFamily,
    chebyshev_connection,
    christoffel_darboux_closed,
    christoffel_darboux_sum,
    recurrence_coefficient,
)


def test_recurrence_coefficient_examples():
    assert recurrence_coefficient(0, 0) == pytest.approx(1.0, abs=1e-15)
    assert recurrence_coefficient(0, 1) == pytest.approx(1 / math.sqrt(3), abs=1e-15)
    # alpha=16, l=1: exact rational under the square root
    exact = Fraction(1 * (1 + 32), (2 + 33) * (2 + 31))
    assert exact == Fraction(1, 35)
    assert recurrence_coefficient(16, 1) == pytest.approx(
        math.sqrt(float(exact)), rel=1e-15
    )


def test_start_coefficient_matches_gamma_ratio():
    # closed product form against lgamma-based high-precision evaluation
    for alpha in range(0, 40):
        ref = math.sqrt(
            math.sqrt(math.pi)
            / 2
            * math.exp(math.lgamma(alpha + 1) - math.lgamma(alpha + 1.5))
        )
        assert recurrence_coefficient(alpha, 0) == pytest.approx(ref, rel=1e-13)


def test_coefficient_limit_is_one_half():
    for alpha in (0, 3, 11, 100):
        assert abs(recurrence_coefficient(alpha, 10**6) - 0.5) < 1e-6


def test_family_table_matches_scalar():
    fam = UltrasphericalFamily.build(5, 30)
    for l in (0, 1, 7, 31):
        assert fam.recurrence_coeff(l) == recurrence_coefficient(5, l)
    with pytest.raises(IndexError):
        fam.recurrence_coeff(32)
    assert np.all(fam.b > 0)


def test_eval_examples():
    fam0 = UltrasphericalFamily.build(0, 8)
    assert fam0.eval(0, 0.3) == pytest.approx(1.0, abs=1e-15)
    assert fam0.eval(1, 0.5) == pytest.approx(math.sqrt(3) * 0.5, rel=1e-15)
    assert fam0.eval(2, 1 / math.sqrt(3)) == pytest.approx(0.0, abs=1e-14)


def test_degree_two_root_found_by_bisection():
    # brute-force root search brackets the known zero of the degree-2 polynomial
    fam = UltrasphericalFamily.build(0, 4)
    lo, hi = 0.4, 0.7
    assert fam.eval(2, lo) * fam.eval(2, hi) < 0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if fam.eval(2, lo) * fam.eval(2, mid) <= 0:
            hi = mid
        else:
            lo = mid
    assert 0.5 * (lo + hi) == pytest.approx(1 / math.sqrt(3), abs=1e-12)


def test_eval_rejects_bad_input():
    fam = UltrasphericalFamily.build(0, 4)
    with pytest.raises(ValueError):
        fam.eval(2, 1.5)
    with pytest.raises(IndexError):
        fam.eval(5, 0.0)
    with pytest.raises(IndexError):
        fam.eval_associated(3, 0.0, 2)


def test_orthonormality_under_quadrature():
    # weighted Gram of degrees <= 16 is the identity for every alpha <= 8
    max_deg = 16
    for alpha in range(9):
        nodes = (2 * max_deg + 2 * alpha) // 2 + 2
        x, w = np.polynomial.legendre.leggauss(nodes)
        fam = UltrasphericalFamily.build(alpha, max_deg)
        table = np.stack([fam.eval(l, x) for l in range(max_deg + 1)])
        weight = 0.5 * w * (1.0 - x**2) ** alpha
        gram = (table * weight) @ table.T
        assert np.abs(gram - np.eye(max_deg + 1)).max() < 1e-12


def test_recurrence_consistency(rng):
    xs = rng.uniform(-1.0, 1.0, size=100)
    for alpha in (0, 1, 5):
        fam = UltrasphericalFamily.build(alpha, 34)
        vals = np.stack([fam.eval(l, xs) for l in range(34)])
        # 1e-12 at the scale of the neighbouring values (they grow toward
        # the endpoints for larger weight exponents)
        scale = np.maximum(1.0, np.abs(vals).max(axis=0))
        for l in range(1, 33):
            resid = (
                fam.b[l + 1] * vals[l + 1] + fam.b[l] * vals[l - 1] - xs * vals[l]
            )
            assert np.abs(resid / scale).max() < 1e-12


def test_eval_against_high_precision_oracle():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40

    def reference(alpha, l, x):
        lam = mp.mpf(alpha) + mp.mpf(1) / 2
        val = mp.gegenbauer(l, lam, mp.mpf(x))
        sq_norm = (
            mp.pi
            * mp.power(2, 1 - 2 * lam)
            * mp.gamma(l + 2 * lam)
            / (mp.factorial(l) * (l + lam) * mp.gamma(lam) ** 2)
            / 2
        )
        return float(val / mp.sqrt(sq_norm))

    for alpha, l in ((0, 5), (1, 4), (3, 7), (6, 2)):
        fam = UltrasphericalFamily.build(alpha, l + 1)
        for x in (-0.8, 0.1, 0.63):
            ref = reference(alpha, l, x)
            assert fam.eval(l, x) == pytest.approx(ref, rel=1e-13)


def test_associated_reduces_to_plain():
    fam = UltrasphericalFamily.build(0, 8)
    assert fam.eval_associated(3, 0.7, 0) == fam.eval(3, 0.7)


def test_associated_base_case():
    fam = UltrasphericalFamily.build(2, 8)
    assert fam.eval_associated(0, 0.0, 5) == pytest.approx(
        1.0 / recurrence_coefficient(2, 5), rel=1e-15
    )


@pytest.mark.parametrize("alpha,shift", [(0, 1), (1, 3), (2, 2)])
def test_associated_determinant_identity(alpha, shift, rng):
    # degree-l associated value equals the scaled characteristic determinant
    fam = UltrasphericalFamily.build(alpha, 16)
    for l in range(1, 13):
        x = rng.uniform(-1.0, 1.0)
        mat = np.zeros((l, l))
        for i in range(l - 1):
            mat[i, i + 1] = mat[i + 1, i] = fam.b[shift + 1 + i]
        det = np.linalg.det(x * np.eye(l) - mat)
        scale = np.prod(fam.b[shift : shift + l + 1])
        ref = det / scale
        got = fam.eval_associated(l, x, shift)
        assert got == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_cd_sum_single_term():
    fam = UltrasphericalFamily.build(0, 4)
    assert christoffel_darboux_sum(fam, 0, 0, 0.5, -0.5) == pytest.approx(
        1.0, rel=1e-14
    )
    assert christoffel_darboux_closed(fam, 0, 0, 0.5, -0.5) == pytest.approx(
        1.0, rel=1e-12
    )


def test_cd_direct_vs_closed(rng):
    for alpha in range(4):
        fam = UltrasphericalFamily.build(alpha, 24)
        for m in (alpha, alpha + 1, alpha + 3):
            for n in (m, m + 2, m + 6):
                x, y = rng.uniform(-1.0, 1.0, size=2)
                while abs(x - y) < 1e-3:
                    x, y = rng.uniform(-1.0, 1.0, size=2)
                direct = christoffel_darboux_sum(fam, m, n, x, y)
                closed = christoffel_darboux_closed(fam, m, n, x, y)
                assert closed == pytest.approx(direct, rel=1e-10, abs=1e-10)


def test_cd_reduces_to_classical():
    # alpha == m: the closed form collapses to the classical kernel
    fam = UltrasphericalFamily.build(2, 20)
    m, n, x, y = 2, 9, 0.2, 0.8
    classical = (
        fam.b[n - 2 + 1]
        * (
            fam.eval(n - 2 + 1, x) * fam.eval(n - 2, y)
            - fam.eval(n - 2, x) * fam.eval(n - 2 + 1, y)
        )
        / (x - y)
    )
    assert christoffel_darboux_closed(fam, m, n, x, y) == pytest.approx(
        classical, rel=1e-12
    )
    assert christoffel_darboux_sum(fam, m, n, x, y) == pytest.approx(
        classical, rel=1e-10
    )


def test_cd_refuses_confluent_point():
    fam = UltrasphericalFamily.build(0, 8)
    with pytest.raises(ValueError):
        christoffel_darboux_sum(fam, 0, 4, 0.3, 0.3 + 1e-13)
    with pytest.raises(ValueError):
        christoffel_darboux_closed(fam, 0, 4, 0.3, 0.3)


def test_connection_smallest_cases():
    fam = UltrasphericalFamily.build(0, 4)
    assert chebyshev_connection(fam, 1) == pytest.approx(np.array([[1.0]]))
    B = chebyshev_connection(fam, 2)
    assert B[:, 1] == pytest.approx(np.array([0.0, math.sqrt(3)]))


def test_connection_against_clenshaw():
    fam = UltrasphericalFamily.build(0, 8)
    B = chebyshev_connection(fam, 6)
    x = 0.37
    val = np.polynomial.chebyshev.chebval(x, B[:, 5])
    assert val == pytest.approx(fam.eval(5, x), abs=1e-12)


@pytest.mark.parametrize("alpha", range(9))
def test_connection_correctness_all_alpha(alpha):
    size = 64
    fam = UltrasphericalFamily.build(alpha, size + 1)
    B = chebyshev_connection(fam, size)
    assert np.abs(np.tril(B, -1)).max() == 0.0  # upper triangular
    x = np.cos(np.pi * (2 * np.arange(64) + 1) / 128)
    for j in (0, 1, 5, 31, 63):
        vals = np.polynomial.chebyshev.chebval(x, B[:, j])
        ref = fam.eval(j, x)
        scale = max(1.0, np.abs(ref).max())
        assert np.abs(vals - ref).max() < 1e-11 * scale
