"""Precision contexts, ordered summation, and panel-doubled quadrature."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpf

from ergoaccel.errors import DomainError, QuadratureConvergenceError
from ergoaccel.precision import (
    Precision,
    QuadratureConfig,
    accumulation_bits,
    as_mpf,
    integrate,
    integrate_info,
    precision_floor,
    sum_ordered,
)

from conftest import P256, P512, rel_err

# int_0^inf exp(-s^2 - 1/s^2) ds = exp(-2) sqrt(pi)/2, evaluated at 400 bits.
PSI_ONE_ONE = "0.11993777196806144736803650163679351621945045191023"

# int_0^1 exp(-1/(x(1-x))) dx, frozen from independent adaptive quadrature
# (mpmath.quad with a midpoint split) at 400 bits.
BUMP_NORMALIZER = "0.0070298584066096562392412705303539560761553994753572"


def test_precision_defaults():
    assert P256.mantissa_bits == 256
    assert P256.oracle_bits == 512
    assert Precision(100).oracle_bits == 200
    assert P256.oracle().mantissa_bits == 512


def test_precision_validation():
    with pytest.raises(DomainError):
        Precision(mantissa_bits=63)
    with pytest.raises(DomainError):
        Precision(mantissa_bits=128, oracle_bits=128)


def test_precision_floor_is_fixed_power_of_two():
    assert precision_floor(P256) == mpf(2) ** -216
    assert precision_floor(P512) == mpf(2) ** -472


def test_accumulation_bits_guard_covers_cancellation_to_the_floor():
    # The guard is never narrower than the mantissa itself, so sums whose
    # results sit near the precision floor stay faithfully rounded.
    assert accumulation_bits(P256) == 512
    assert accumulation_bits(P256, 1000) == 512
    assert accumulation_bits(Precision(64)) == 128
    # Term count binds once 32 + log2(N) outgrows the mantissa width.
    assert accumulation_bits(Precision(64), 2**40) == 64 + 32 + 41


def test_as_mpf_accepts_common_numeric_types():
    with mp.workprec(256):
        assert as_mpf(3) == 3
        assert as_mpf("0.5") == mpf(1) / 2
        assert rel_err(as_mpf(Fraction(1, 3)), mpf(1) / 3, bits=256) < mpf(2) ** -250
    with pytest.raises(DomainError):
        as_mpf(1 + 2j)


def test_sum_ordered_empty_is_zero():
    assert sum_ordered([], P256) == 0


def test_sum_ordered_small_integers():
    assert sum_ordered([1, 2, 3], P256) == 6


def test_sum_ordered_rejects_nonfinite():
    with pytest.raises(DomainError):
        sum_ordered([1.0, float("nan"), 2.0], P256)
    with pytest.raises(DomainError):
        sum_ordered([mpf("inf")], P256)


def test_sum_ordered_compensates_far_scales():
    # 1 + 2^-300 - 1 loses the tiny term without compensation at 256 bits.
    tiny = mpf(2) ** -300
    assert sum_ordered([1, tiny, -1], P256) == tiny


def test_sum_ordered_independent_of_ambient_precision():
    terms = [mpf(1) / 3, mpf(2) / 7, mpf(-5) / 11]
    with mp.workprec(53):
        low = sum_ordered(terms, P256)
    with mp.workprec(2000):
        high = sum_ordered(terms, P256)
    assert low == high


def test_sum_ordered_oracle_agreement_geometric():
    # Same geometric sum at 256 and 512 bits; terms rebuilt at each precision.
    def terms(bits):
        with mp.workprec(bits):
            return [mp.exp(-2 * n) for n in range(1000)]

    s256 = sum_ordered(terms(256), P256)
    s512 = sum_ordered(terms(512), P512)
    assert rel_err(s256, s512) < mpf(2) ** -236


@given(st.lists(st.integers(min_value=-(2**100), max_value=2**100), max_size=50))
def test_sum_ordered_matches_exact_integer_sum(xs):
    # Integer sums of this size are exactly representable at 256 bits.
    assert sum_ordered(xs, P256) == sum(xs)


def test_integrate_polynomial_is_near_exact():
    # A 12-node rule integrates degree <= 23 exactly on every panel.
    val = integrate(lambda x: x**23, 0, 1, precision=P256)
    assert rel_err(val, Fraction(1, 24)) < mpf(2) ** -230


def test_integrate_bump_normalizer():
    val = integrate(lambda x: mp.exp(-1 / (x * (1 - x))), 0, 1, precision=P256)
    assert rel_err(val, BUMP_NORMALIZER) < mpf("1e-45")


def test_integrate_decaying_gaussian_pair():
    # exp(-x^2 - x^-2) on [0, 40]; tail beyond 40 is ~exp(-1600).
    val = integrate(lambda x: mp.exp(-x * x - 1 / (x * x)), 0, 40, precision=P256)
    assert rel_err(val, PSI_ONE_ONE) < mpf("1e-45")
    assert abs(float(val) - 0.1199377) < 1e-7


def test_integrate_requires_ordered_interval():
    with pytest.raises(DomainError):
        integrate(lambda x: x, 1, 1, precision=P256)
    with pytest.raises(DomainError):
        integrate(lambda x: x, 2, 1, precision=P256)


def test_integrate_convergence_failure_carries_last_iterates():
    # A 0.1-Hoelder kink converges far too slowly for this tolerance.
    cfg = QuadratureConfig(
        initial_panels=4, nodes_per_panel=8,
        relative_tolerance=mpf(2) ** -200, max_doublings=2,
    )
    kink = mpf(1) / 3
    with pytest.raises(QuadratureConvergenceError) as exc:
        integrate(lambda x: abs(x - kink) ** mpf("0.1"), 0, 1, cfg, P256)
    err = exc.value
    assert err.last is not None and err.previous is not None
    assert mp.isfinite(err.last) and mp.isfinite(err.previous)
    assert err.last != err.previous


def test_integrate_refinements_shrink_monotonically():
    cfg = QuadratureConfig(initial_panels=2, nodes_per_panel=6,
                           relative_tolerance=mpf(2) ** -180)
    _, info = integrate_info(lambda x: mp.exp(-x * x), 0, 3, cfg, P256)
    diffs = [abs(info.iterates[i + 1] - info.iterates[i])
             for i in range(len(info.iterates) - 1)]
    assert len(diffs) >= 2
    for earlier, later in zip(diffs[1:], diffs[2:]):
        assert later < earlier


def test_integrate_oracle_agreement_with_shared_config():
    # One config, two precisions: identical panel schedule, arithmetic-level gap.
    cfg = QuadratureConfig(relative_tolerance=mpf(2) ** -200)
    f = lambda x: mp.exp(-1 / (x * (1 - x)))
    v256, info256 = integrate_info(f, 0, 1, cfg, P256)
    v512, info512 = integrate_info(f, 0, 1, cfg, P512)
    assert info256.panels == info512.panels
    assert rel_err(v256, v512) < mpf(2) ** -236


def test_integrate_near_zero_stops_at_floor():
    # Odd integrand on a symmetric interval: true value 0, iterates are noise.
    val = integrate(lambda x: x * mp.exp(x * x), -1, 1, precision=P256)
    assert abs(val) <= precision_floor(P256)


def test_integrate_deterministic():
    f = lambda x: mp.exp(-1 / (x * (1 - x)))
    assert integrate(f, 0, 1, precision=P256) == integrate(f, 0, 1, precision=P256)


def test_quadrature_config_validation():
    with pytest.raises(DomainError):
        QuadratureConfig(initial_panels=0)
    with pytest.raises(DomainError):
        QuadratureConfig(nodes_per_panel=1)
    with pytest.raises(DomainError):
        QuadratureConfig(relative_tolerance=-1)
    with pytest.raises(DomainError):
        QuadratureConfig(max_doublings=0)
