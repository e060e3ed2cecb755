"""Torus norms, continued fractions, and nonresonance scans."""

from fractions import Fraction

import pytest
from mpmath import mp, mpf

from ergoaccel.errors import DomainError, SpecificationError
from ergoaccel.precision import Precision
from ergoaccel.smalldiv import (
    continued_fraction,
    nonresonance_scan,
    preset_rotation,
    small_divisor,
    torus_norm,
)

from conftest import P256, P512, rel_err


def test_torus_norm_two_pi():
    with mp.workprec(256):
        period = 2 * mp.pi
    # The period as rounded at the working mantissa reduces to exactly zero.
    assert torus_norm(period, "two_pi", P256) == 0
    assert torus_norm(0, "two_pi", P256) == 0
    v = torus_norm(3, "two_pi", P256)
    assert v == 3
    with mp.workprec(400):
        ref = 2 * mp.pi - 6
        assert rel_err(torus_norm(6, "two_pi", P256), ref) < mpf(2) ** -250


def test_torus_norm_unit():
    assert torus_norm("1.25", "unit", P256) == mpf("0.25")
    assert torus_norm("0.75", "unit", P256) == mpf("0.25")
    assert torus_norm(-3, "unit", P256) == 0
    assert torus_norm("0.5", "unit", P256) == mpf("0.5")


def test_torus_norm_validation():
    with pytest.raises(SpecificationError):
        torus_norm(1, "radians", P256)


def test_preset_rotations():
    g = preset_rotation("golden", P256)
    with mp.workprec(400):
        assert rel_err(g, (mp.sqrt(5) - 1) / 2) < mpf(2) ** -250
        assert rel_err(preset_rotation("silver", P256),
                       mp.sqrt(2) - 1) < mpf(2) ** -250
        assert rel_err(preset_rotation("three_over_two_pi", P256),
                       3 / (2 * mp.pi)) < mpf(2) ** -250
    with pytest.raises(SpecificationError):
        preset_rotation("bronze", P256)


def test_small_divisor_golden():
    g = preset_rotation("golden", P512)
    assert abs(float(small_divisor(g, 1, P256)) - 0.3819660113) < 1e-9
    assert abs(float(small_divisor(g, 13, P256)) - 0.0344418537) < 1e-9
    v256 = small_divisor(g, 13, P256)
    v512 = small_divisor(g, 13, P512)
    assert rel_err(v256, v512) < mpf(2) ** -250


def test_small_divisor_resonant():
    assert small_divisor(mpf("0.25"), 4, P256) == 0
    assert small_divisor(mpf("0.25"), 8, P256) == 0


def test_small_divisor_large_k():
    # The k * rho product must not cost the reduced value any accuracy.
    g = preset_rotation("golden", P512)
    k = 10 ** 6 + 3
    v = small_divisor(g, k, P256)
    with mp.workprec(700):
        f = k * preset_rotation("golden", Precision(700))
        f = f - mp.floor(f)
        ref = min(f, 1 - f)
    assert rel_err(v, ref) < mpf(2) ** -240


def test_small_divisor_validation():
    with pytest.raises(DomainError):
        small_divisor(mpf("0.5"), 0, P256)
    with pytest.raises(DomainError):
        small_divisor(mpf("0.5"), -2, P256)
    with pytest.raises(DomainError):
        small_divisor(mpf("0.5"), 2.0, P256)


def test_continued_fraction_exact_rational():
    cf = continued_fraction(Fraction(22, 7))
    assert cf.coefficients == (3, 7)
    assert cf.convergents == (Fraction(3), Fraction(22, 7))
    assert cf.complete
    assert continued_fraction(7).coefficients == (7,)
    assert continued_fraction(Fraction(-7, 2)).complete


def test_continued_fraction_pi():
    cf = continued_fraction(mp.pi, max_terms=5, precision=P256)
    assert cf.coefficients == (3, 7, 15, 1, 292)
    assert not cf.complete


def test_continued_fraction_golden():
    g = preset_rotation("golden", P256)
    cf = continued_fraction(g, max_terms=200, precision=P256)
    assert cf.coefficients[0] == 0
    assert set(cf.coefficients[1:]) == {1}
    # Stops where the convergents outrun what 256 bits certify.
    assert not cf.complete
    assert cf.convergents[-1].denominator <= 2 ** 120
    assert len(cf.coefficients) > 100


def test_convergent_determinant_identity():
    cf = continued_fraction(preset_rotation("golden", P256), max_terms=50,
                            precision=P256)
    cs = cf.convergents
    for a, b in zip(cs, cs[1:]):
        det = b.numerator * a.denominator - a.numerator * b.denominator
        assert det in (1, -1)


def test_convergent_quality():
    cf = continued_fraction(preset_rotation("golden", P256), max_terms=60,
                            precision=P256)
    with mp.workprec(400):
        x = preset_rotation("golden", Precision(400))
        for c in cf.convergents:
            assert abs(x - mpf(c.numerator) / c.denominator) < \
                mpf(1) / c.denominator ** 2


def test_golden_denominator_small_divisor_product():
    # q_k ||q_k rho|| converges to 1/sqrt(5) for the golden mean.
    cf = continued_fraction(preset_rotation("golden", P256), max_terms=40,
                            precision=P256)
    g = preset_rotation("golden", P512)
    with mp.workprec(400):
        target = 1 / mp.sqrt(5)
        for c in cf.convergents[2:12]:
            q = c.denominator
            product = q * small_divisor(g, q, Precision(400))
            assert abs(product - target) < mpf("0.05")


def test_continued_fraction_validation():
    with pytest.raises(DomainError):
        continued_fraction(mp.pi, max_terms=0, precision=P256)


def test_nonresonance_scan_golden():
    g = preset_rotation("golden", P256)
    scan = nonresonance_scan(g, 100, 0, P256)
    assert scan.minimum > mpf("0.38")
    assert scan.witness == (1,)
    assert scan.scanned == 100
    smaller = nonresonance_scan(g, 10, 0, P256)
    assert scan.minimum <= smaller.minimum


def test_nonresonance_scan_resonant():
    scan = nonresonance_scan(mpf("0.5"), 4, 0, P256)
    assert scan.minimum == 0
    # Ties resolve to the lexicographically smallest frequency.
    assert scan.witness == (2,)


def test_nonresonance_scan_two_dimensional():
    g = preset_rotation("golden", P256)
    s = preset_rotation("silver", P256)
    scan = nonresonance_scan((g, s), 6, 1, P256)
    assert scan.minimum > 0
    assert scan.scanned == ((2 * 6 + 1) ** 2 - 1) // 2
    assert len(scan.witness) == 2


def test_nonresonance_scan_validation():
    with pytest.raises(DomainError):
        nonresonance_scan(mpf("0.5"), 0, 0, P256)
    with pytest.raises(DomainError):
        nonresonance_scan(mpf("0.5"), 4, -1, P256)
