"""Rate predictions, family reductions, and error-decay fits."""

from fractions import Fraction

import pytest
from mpmath import mp, mpf

from ergoaccel.averaging import error_series
from ergoaccel.errors import (
    DegenerateRateError,
    DomainError,
    InsufficientDataError,
    SpecificationError,
)
from ergoaccel.generators import DecayingWaveSpec, LinearSystemSpec
from ergoaccel.precision import Precision
from ergoaccel.rates import (
    RatePrediction,
    fit_log_slope,
    fit_rate,
    mixed_regularity_exponent,
    quasi_periodic_exponent,
    xi,
    xi_con,
    xi_kappa,
    xi_linear_system,
    xi_poly,
    xi_trig,
    xi_width,
)
from ergoaccel.weights import WeightSpec

from conftest import P256, P512, rel_err

SQUARES = (100, 225, 400, 625, 900, 1225, 1600)


def test_xi_headline_value():
    v = xi(2, 3, P256)
    with mp.workprec(400):
        assert rel_err(v, 2 + mp.sqrt(13) / mp.e) < mpf(2) ** -245
    assert abs(float(v) - 3.3264082) < 1e-7


def test_xi_frequency_symmetries():
    assert xi(2, -3, P256) == xi(2, 3, P256)
    with mp.workprec(256):
        shifted = 3 + 2 * mp.pi
    assert rel_err(xi(2, shifted, P256), xi(2, 3, P256)) < mpf(2) ** -240


def test_xi_grid_monotonicity():
    lams = [mpf(v) / 2 for v in range(1, 6)]
    rhos = [mpf(0), mpf("0.5"), mpf(1), mpf(2), mpf(3)]
    grid = {(l, r): xi(l, r, P256) for l in lams for r in rhos}
    for r in rhos:
        col = [grid[(l, r)] for l in lams]
        assert all(b > a for a, b in zip(col, col[1:]))
    for l in lams:
        row = [grid[(l, r)] for r in rhos]
        assert all(b > a for a, b in zip(row, row[1:]))


def test_family_reductions_are_bit_exact():
    assert xi_kappa("0.5", 3, P256) == xi(3, 0, P256)
    assert xi_width(2, 3, 1, P256) == xi(2, 3, P256)
    assert xi_trig(2, 3, 1, P256) == xi(2, 3, P256)
    with mp.workprec(256 + 16):
        manual = 2 * mp.sqrt(3 * mpf("0.5")) + 2 * 3 * mpf("0.5") / mp.e
    with mp.workprec(256):
        manual = +manual
    assert xi_kappa("0.5", 3, P256) == manual


def test_continuous_rate_vs_discrete():
    # Inside the sampling torus the two agree exactly; beyond it the
    # discrete average aliases the frequency down and decays slower.
    assert xi_con(2, 3, P256) == xi(2, 3, P256)
    assert xi_con(2, "3.14", P256) == xi(2, "3.14", P256)
    assert xi_con(2, 7, P256) > xi(2, 7, P256)
    assert xi_con(2, -3, P256) == xi_con(2, 3, P256)


def test_trig_composition_takes_worst_harmonic():
    v = xi_trig(2, 3, 3, P256)
    others = [xi(2, 3, P256), xi(2, 6, P256), xi(2, 9, P256)]
    assert v == min(others)
    with pytest.raises(DomainError):
        xi_trig(2, 3, 0, P256)


def test_polynomial_composition_rates():
    assert xi_poly(2, 3, (0, 0, 1), P256) == xi(4, 0, P256)
    v = xi_poly(2, 3, (0, 1, 0, 1), P256)
    assert v == min(xi(2, 3, P256), xi(6, 9, P256))
    assert xi_poly(2, 3, (0, 1, 1), P256) == xi(2, 3, P256)
    with pytest.raises(DegenerateRateError):
        xi_poly(2, 3, (5,), P256)
    with pytest.raises(DegenerateRateError):
        xi_poly(2, 3, ("0", 0), P256)


def test_rate_argument_validation():
    with pytest.raises(DomainError):
        xi(-1, 0, P256)
    with pytest.raises(DomainError):
        xi_kappa(1, 0, P256)
    with pytest.raises(DomainError):
        xi_kappa(1, 1.5, P256)
    with pytest.raises(DomainError):
        xi_width(1, 0, 0, P256)


def test_linear_system_rates():
    v = xi_linear_system(("0.5", "0.8"), "decay_rate", P256)
    assert abs(float(v) - 0.7501372) < 1e-7
    assert abs(float(xi_linear_system(("0.5", "0.8"), "modulus", P256))
               - 1.4324046) < 1e-7
    with mp.workprec(300):
        mode = mp.exp(-2)
    v = xi_linear_system((mode,), "decay_rate", P256)
    with mp.workprec(400):
        assert rel_err(v, 2 + 2 / mp.e) < mpf(2) ** -240


def test_linear_system_spec_paths():
    one = LinearSystemSpec((("0.5",),), (1,))
    v = xi_linear_system(one, precision=P256)
    assert v == xi_linear_system(("0.5",), precision=P256)
    two = LinearSystemSpec((("0.5", 0), (0, "0.8")), (1, 1))
    v2 = xi_linear_system(two, precision=P256)
    ref = xi_linear_system(("0.5", "0.8"), precision=P256)
    # The 2x2 path reads eigenvalues at machine precision.
    assert abs(v2 - ref) < mpf(10) ** -12


def test_linear_system_degenerate_and_invalid():
    with pytest.raises(DegenerateRateError):
        xi_linear_system(LinearSystemSpec(((0,),), (1,)), precision=P256)
    with pytest.raises(DomainError):
        xi_linear_system((1,), precision=P256)
    with pytest.raises(DomainError):
        xi_linear_system((), precision=P256)
    with pytest.raises(SpecificationError):
        xi_linear_system(("0.5",), "phase", P256)


def test_quasi_periodic_exponents():
    plain = quasi_periodic_exponent(1, "plain")
    assert rel_err(plain.exponent_a, Fraction(1, 3)) < mpf(2) ** -50
    assert plain.log_correction == 0
    half = quasi_periodic_exponent(1, "constant_type")
    assert half.exponent_a == mpf("0.5")
    dio = quasi_periodic_exponent(2, "diophantine", zeta=2)
    assert rel_err(dio.exponent_a, Fraction(1, 4)) < mpf(2) ** -50
    assert rel_err(dio.log_correction, Fraction(1, 2)) < mpf(2) ** -50
    with pytest.raises(SpecificationError):
        quasi_periodic_exponent(1, "diophantine", zeta=1)
    with pytest.raises(SpecificationError):
        quasi_periodic_exponent(1, "plain", zeta=2)
    with pytest.raises(SpecificationError):
        quasi_periodic_exponent(1, "fast")
    with pytest.raises(DomainError):
        quasi_periodic_exponent(0, "plain")


def test_mixed_regularity_exponent():
    pred = mixed_regularity_exponent(4, 4, 10, 1)
    assert rel_err(pred.exponent_a, Fraction(20, 27)) < mpf(2) ** -100
    sym = mixed_regularity_exponent(4, 7, 10, 1)
    assert sym.exponent_a == mixed_regularity_exponent(7, 4, 10, 1).exponent_a
    with pytest.raises(DomainError):
        mixed_regularity_exponent(0, 4, 10, 1)
    with pytest.raises(DomainError):
        mixed_regularity_exponent(4, 4, 0, 1)


def test_prediction_exponent_validation():
    with pytest.raises(SpecificationError):
        RatePrediction(None, 0)
    with pytest.raises(SpecificationError):
        RatePrediction(None, "1.5")


def test_fit_recovers_synthetic_rate():
    with mp.workprec(300):
        pairs = [(N, mp.exp(-3 * mp.sqrt(N))) for N in SQUARES]
    fit = fit_rate(pairs, "0.5", 0, P256)
    assert abs(fit.slope - 3) < mpf(10) ** -40
    with mp.workprec(200):
        assert 1 - mpf(10) ** -40 < fit.r2 <= 1
    assert fit.points_used == len(SQUARES)


def test_fit_recovers_log_corrected_rate():
    with mp.workprec(300):
        corr = mpf(2) / 3
        pairs = [(N, mp.exp(-2 * mp.cbrt(N) / mp.ln(N) ** corr))
                 for N in (100, 300, 900, 2700)]
    fit = fit_rate(pairs, Fraction(1, 3), corr, P256)
    assert abs(fit.slope - 2) < mpf(10) ** -40
    assert fit.log_correction == corr


def test_fit_constant_series():
    fit = fit_rate([(10, mpf(1)), (20, mpf(1)), (40, mpf(1))], "0.5", 0, P256)
    assert fit.slope == 0
    assert fit.r2 == 1


def test_fit_drops_floor_and_zero_points():
    series = error_series(DecayingWaveSpec(2, 3, 1), (100, 225, 400, 2500),
                          precision=P256)
    fit = fit_rate(series, "0.5", 0, P256)
    assert fit.points_used == 3
    with pytest.raises(InsufficientDataError):
        fit_rate(error_series(DecayingWaveSpec(2, 3, 1), (100, 225, 2500),
                              precision=P256), "0.5", 0, P256)
    with pytest.raises(InsufficientDataError):
        fit_rate([(10, mpf(0)), (20, mpf(0)), (40, mpf(1)), (80, mpf(1))],
                 "0.5", 0, P256)


def test_fit_validation():
    pairs = [(10, mpf(1)), (20, mpf("0.5")), (40, mpf("0.25"))]
    with pytest.raises(DomainError):
        fit_rate(pairs, 0, 0, P256)
    with pytest.raises(DomainError):
        fit_rate(pairs, "1.5", 0, P256)
    with pytest.raises(DomainError):
        fit_rate([(1, mpf(1)), (2, mpf(1)), (3, mpf(1))], "0.5", 1, P256)
    with pytest.raises(InsufficientDataError):
        fit_rate([(10, mpf(1)), (10, mpf(1)), (10, mpf(1))], "0.5", 0, P256)


def test_log_slope_fit():
    with mp.workprec(300):
        inverse = [(N, mpf(1) / N) for N in (10, 100, 1000)]
    fit = fit_log_slope(inverse, P256)
    assert abs(fit.slope - 1) < mpf(10) ** -40
    assert fit.r2 == 1
    with mp.workprec(300):
        steep = [(N, mpf(N) ** mpf("-2.5")) for N in (10, 100, 1000)]
    fit = fit_log_slope(steep, P256)
    assert abs(fit.slope - mpf("2.5")) < mpf(10) ** -40


def test_uniform_weight_wave_is_power_law():
    series = error_series(DecayingWaveSpec(2, 3, 1), (100, 200, 400, 800),
                          weight=WeightSpec("uniform"), precision=P256)
    fit = fit_log_slope(series, P256)
    assert abs(fit.slope - 1) < mpf(10) ** -6
    assert fit.r2 > 1 - mpf(10) ** -10


def test_fitted_wave_slopes_track_predictions():
    # The fitted slope approaches xi from above as the extents grow; at
    # these schedules the strongest damping agrees to a few percent and
    # the weakest to about fifteen.
    cases = [
        (2, 0, SQUARES, mpf("0.10")),
        (2, 3, SQUARES, mpf("0.10")),
        (1, 0, (400, 625, 900, 1225, 1600, 2025, 2500), mpf("0.15")),
        (1, 3, (400, 625, 900, 1225, 1600, 2025, 2500), mpf("0.15")),
    ]
    for lam, rho, extents, tolerance in cases:
        series = error_series(DecayingWaveSpec(lam, rho, 1), extents,
                              precision=P256)
        fit = fit_rate(series, "0.5", 0, P256)
        predicted = xi(lam, rho, P256)
        assert abs(fit.slope - predicted) / predicted < tolerance
        assert fit.slope > mpf("0.98") * predicted
        assert fit.r2 > mpf("0.999")
