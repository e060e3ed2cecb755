"""Predicted decay rates and least-squares fits of observed error decay.

For the weighted average of a decaying wave the error falls like
exp(-xi sqrt(N)) with

    xi(lam, rho) = sqrt(2 lam) + (1/e) sqrt(lam^2 + |rho|_T^2),

|rho|_T the distance of rho to the nearest multiple of 2 pi. Compositions
and superpositions move the arguments around inside the same core: trig
compositions take the worst harmonic of rho, polynomial compositions the
slowest surviving power, flat compositions double the decay and drop the
frequency, and orbit averages of a linear contraction use the slowest
eigenvalue. All reductions reuse one core evaluation so that stated
identities between family members hold bit for bit, not just to tolerance.

Rates with no closed-form xi (quasi-periodic and mixed-regularity problems)
are expressed as the exponent a in exp(-c N^a), optionally with a logarithm
correction, and fitted the same way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from mpmath import mp, mpf

from .averaging import ErrorSeries
from .errors import (
    DegenerateRateError,
    DomainError,
    InsufficientDataError,
    SpecificationError,
)
from .generators import LinearSystemSpec
from .precision import Precision, as_mpf, precision_floor
from .smalldiv import torus_norm

__all__ = [
    "RateFit",
    "RatePrediction",
    "fit_log_slope",
    "fit_rate",
    "mixed_regularity_exponent",
    "quasi_periodic_exponent",
    "xi",
    "xi_con",
    "xi_kappa",
    "xi_linear_system",
    "xi_poly",
    "xi_trig",
    "xi_width",
]


@dataclass(frozen=True)
class RatePrediction:
    """Error model exp(-xi N^a (ln N)^(-log_correction)).

    xi is None when only the exponent is predicted; provenance names the
    rate law that produced the prediction.
    """

    xi: object
    exponent_a: object
    log_correction: object = 0
    provenance: str = ""

    def __post_init__(self):
        with mp.workprec(64):
            a = as_mpf(self.exponent_a)
            if not 0 < a <= 1:
                raise SpecificationError("exponent_a must lie in (0, 1]")


@dataclass(frozen=True)
class RateFit:
    """ln(error) regressed on -N^a (ln N)^(-log_correction)."""

    slope: mpf
    intercept: mpf
    r2: mpf
    exponent_a: object
    log_correction: object
    points_used: int


def _nonneg(value, name: str) -> mpf:
    v = as_mpf(value)
    if not v >= 0:
        raise DomainError(f"{name} must be nonnegative")
    return v


def _xi_core(first_lam: mpf, second_lam: mpf, dist: mpf) -> mpf:
    # dist == 0 short-circuits sqrt(second^2), keeping reductions to the
    # frequency-free rate exactly equal to computing that rate directly.
    if dist == 0:
        tail = second_lam
    else:
        tail = mp.sqrt(second_lam * second_lam + dist * dist)
    return mp.sqrt(2 * first_lam) + tail / mp.e


def _finish(val: mpf, bits: int) -> mpf:
    with mp.workprec(bits):
        return +val


def xi(lam, rho, precision: Precision | None = None) -> mpf:
    """sqrt(2 lam) + (1/e) sqrt(lam^2 + |rho|_T^2) on the 2 pi torus."""
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 16):
        lam_v = _nonneg(lam, "lam")
        dist = torus_norm(rho, "two_pi", Precision(bits + 16))
        return _finish(_xi_core(lam_v, lam_v, dist), bits)


def xi_con(lam, rho, precision: Precision | None = None) -> mpf:
    """The continuous-time rate: |rho| enters unreduced.

    Agrees with :func:`xi` exactly when |rho| <= pi and exceeds it
    otherwise, since the discrete average cannot see frequencies past the
    sampling torus.
    """
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 16):
        lam_v = _nonneg(lam, "lam")
        return _finish(_xi_core(lam_v, lam_v, abs(as_mpf(rho))), bits)


def xi_trig(lam, rho, degree: int, precision: Precision | None = None) -> mpf:
    """Rate for a degree-l trig polynomial of the phase: the worst harmonic.

    min over 1 <= j <= l of |j rho|_T replaces |rho|_T; degree 1 reduces to
    :func:`xi` exactly.
    """
    if not isinstance(degree, int) or degree < 1:
        raise DomainError("trig compositions need integer degree >= 1")
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 16):
        lam_v = _nonneg(lam, "lam")
        aux = Precision(bits + 16)
        rho_v = as_mpf(rho)
        dist = min(torus_norm(j * rho_v, "two_pi", aux)
                   for j in range(1, degree + 1))
        return _finish(_xi_core(lam_v, lam_v, dist), bits)


def xi_poly(lam, rho, coefficients,
            precision: Precision | None = None) -> mpf:
    """Rate for a polynomial of the wave value.

    Each surviving power j contributes xi(j lam, j rho) for odd j and
    xi(j lam, 0) for even j (squares lose the oscillation); the constant
    term only shifts the limit. The slowest contribution wins.
    """
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 16):
        lam_v = _nonneg(lam, "lam")
        aux = Precision(bits + 16)
        rho_v = as_mpf(rho)
        best = None
        for j, c in enumerate(coefficients):
            if j == 0 or as_mpf(c) == 0:
                continue
            jl = j * lam_v
            dist = mpf(0) if j % 2 == 0 else torus_norm(j * rho_v, "two_pi", aux)
            val = _xi_core(jl, jl, dist)
            if best is None or val < best:
                best = val
        if best is None:
            raise DegenerateRateError(
                "a constant polynomial composition does not decay")
        return _finish(best, bits)


def xi_kappa(lam, tau: int, precision: Precision | None = None) -> mpf:
    """Rate for a 2 tau-flat composition: xi(2 tau lam, 0), i.e.
    2 sqrt(tau lam) + 2 tau lam / e."""
    if not isinstance(tau, int) or tau < 1:
        raise DomainError("flat compositions need integer tau >= 1")
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 16):
        lam_v = 2 * tau * _nonneg(lam, "lam")
        return _finish(_xi_core(lam_v, lam_v, mpf(0)), bits)


def xi_width(lam, rho, gamma, precision: Precision | None = None) -> mpf:
    """Rate for a width-gamma weight: sqrt(2 gamma lam) + the usual tail.

    gamma = 1 reduces to :func:`xi` exactly.
    """
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 16):
        lam_v = _nonneg(lam, "lam")
        gamma_v = as_mpf(gamma)
        if not gamma_v > 0:
            raise DomainError("the weight width gamma must be positive")
        dist = torus_norm(rho, "two_pi", Precision(bits + 16))
        return _finish(_xi_core(gamma_v * lam_v, lam_v, dist), bits)


def xi_linear_system(system, reading: str = "decay_rate",
                     precision: Precision | None = None) -> mpf:
    """Rate for orbit averages of a linear contraction.

    ``decay_rate`` (default) uses the slowest mode, lam = -ln(spectral
    radius), which is what the orbit's error series actually exhibits.
    ``modulus`` uses the fastest mode instead. Accepts a
    :class:`LinearSystemSpec` or a sequence of eigenvalue moduli.
    """
    if reading not in ("decay_rate", "modulus"):
        raise SpecificationError(f"unknown eigenvalue reading {reading!r}")
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 16):
        if isinstance(system, LinearSystemSpec):
            if system.d == 1:
                moduli = [abs(as_mpf(system.matrix[0][0]))]
            else:
                a = np.array([[float(as_mpf(v)) for v in row]
                              for row in system.matrix])
                moduli = [as_mpf(abs(s)) for s in np.linalg.eigvals(a)]
        else:
            moduli = [abs(as_mpf(s)) for s in system]
        if not moduli:
            raise DomainError("no eigenvalues to read a rate from")
        if any(m == 0 for m in moduli):
            raise DegenerateRateError(
                "a zero eigenvalue collapses the orbit in finite time")
        if any(m >= 1 for m in moduli):
            raise DomainError("eigenvalue moduli must lie inside the unit disk")
        pick = max(moduli) if reading == "decay_rate" else min(moduli)
        lam_v = -mp.ln(pick)
        return _finish(_xi_core(lam_v, lam_v, mpf(0)), bits)


def quasi_periodic_exponent(d: int, variant: str = "plain",
                            zeta=None) -> RatePrediction:
    """Exponent a of the quasi-periodic error model exp(-c N^a ...).

    ``diophantine``: a = 1/(d+2) with a (ln N)^(zeta/(d+2)) correction,
    for rotations Diophantine with logarithm exponent zeta > 1.
    ``plain``: a = 1/(d+2), no correction.
    ``constant_type``: a = 1/2, the bound for constant-type rotations
    such as the golden mean in one dimension.
    """
    if not isinstance(d, int) or d < 1:
        raise DomainError("the torus dimension d must be a positive integer")
    if variant == "constant_type":
        if zeta is not None:
            raise SpecificationError("constant_type takes no zeta")
        return RatePrediction(None, mpf(1) / 2, 0,
                              provenance="quasi_periodic_constant_type")
    if variant == "plain":
        if zeta is not None:
            raise SpecificationError("plain takes no zeta")
        return RatePrediction(None, mpf(1) / (d + 2), 0,
                              provenance="quasi_periodic_plain")
    if variant == "diophantine":
        with mp.workprec(64):
            if zeta is None or not as_mpf(zeta) > 1:
                raise SpecificationError("diophantine needs zeta > 1")
        with mp.workprec(128):
            return RatePrediction(None, mpf(1) / (d + 2),
                                  as_mpf(zeta) / (d + 2),
                                  provenance="quasi_periodic_diophantine")
    raise SpecificationError(f"unknown quasi-periodic variant {variant!r}")


def mixed_regularity_exponent(p: int, q: int, v, d: int) -> RatePrediction:
    """a = v / (d + v (1 + 1/min(p, q))) for a (p, q)-regular weight pair."""
    if not isinstance(d, int) or d < 1:
        raise DomainError("the torus dimension d must be a positive integer")
    with mp.workprec(128):
        p_v = as_mpf(p)
        q_v = as_mpf(q)
        v_v = as_mpf(v)
        if not (p_v >= 1 and q_v >= 1):
            raise DomainError("regularity orders p, q must be at least 1")
        if not v_v > 0:
            raise DomainError("the smoothness v must be positive")
        a = v_v / (d + v_v * (1 + 1 / min(p_v, q_v)))
        return RatePrediction(None, a, 0, provenance="mixed_regularity")


def _fit_points(series, log_correction, floor):
    """(extent, error) pairs safe to regress on."""
    if isinstance(series, ErrorSeries):
        pairs = [(r.extent, r.error) for r in series.results
                 if r.error > 0 and not r.at_floor]
    else:
        pairs = [(n, as_mpf(e)) for n, e in series if as_mpf(e) > 0]
        if floor is not None:
            pairs = [(n, e) for n, e in pairs if e >= floor]
    if log_correction != 0 and any(as_mpf(n) <= 1 for n, _ in pairs):
        raise DomainError("log-corrected fits need extents above 1")
    return pairs


def _ols(xs, ys):
    n = len(xs)
    mean_x = mp.fsum(xs) / n
    mean_y = mp.fsum(ys) / n
    sxx = mp.fsum((x - mean_x) ** 2 for x in xs)
    sxy = mp.fsum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    # Spread below the rounding noise of the regressors is no spread at all.
    noise = n * max(abs(x) for x in xs) ** 2 * mpf(2) ** (-2 * (mp.prec - 20))
    if sxx <= noise:
        raise InsufficientDataError("all extents map to one regressor value")
    beta = sxy / sxx
    alpha = mean_y - beta * mean_x
    ss_res = mp.fsum((y - (alpha + beta * x)) ** 2 for x, y in zip(xs, ys))
    ss_tot = mp.fsum((y - mean_y) ** 2 for y in ys)
    r2 = mpf(1) if ss_tot == 0 else 1 - ss_res / ss_tot
    return beta, alpha, r2


def fit_rate(series, exponent_a="0.5", log_correction=0,
             precision: Precision | None = None) -> RateFit:
    """Fit ln(error) = intercept - slope * N^a (ln N)^(-log_correction).

    Points with zero error or at the precision floor are dropped; fewer
    than three survivors raise :class:`InsufficientDataError`. The slope
    comes back positive for decaying error.
    """
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 16):
        a = as_mpf(exponent_a)
        if not 0 < a <= 1:
            raise DomainError("exponent_a must lie in (0, 1]")
        corr = as_mpf(log_correction)
        pairs = _fit_points(series, corr, precision_floor(prec))
        if len(pairs) < 3:
            raise InsufficientDataError(
                f"rate fits need at least 3 usable points, got {len(pairs)}")
        xs = []
        ys = []
        for n, e in pairs:
            n_v = as_mpf(n)
            x = n_v ** a
            if corr != 0:
                x /= mp.ln(n_v) ** corr
            xs.append(x)
            ys.append(mp.ln(e))
        beta, alpha, r2 = _ols(xs, ys)
        slope = -beta
    with mp.workprec(bits):
        return RateFit(+slope, +alpha, +r2, exponent_a=a,
                       log_correction=corr, points_used=len(pairs))


def fit_log_slope(series, precision: Precision | None = None) -> RateFit:
    """Fit ln(error) = intercept - slope * ln(N): power-law decay N^-slope."""
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 16):
        pairs = _fit_points(series, 0, precision_floor(prec))
        if len(pairs) < 3:
            raise InsufficientDataError(
                f"rate fits need at least 3 usable points, got {len(pairs)}")
        if any(as_mpf(n) <= 0 for n, _ in pairs):
            raise DomainError("log-log fits need positive extents")
        xs = [mp.ln(as_mpf(n)) for n, _ in pairs]
        ys = [mp.ln(e) for _, e in pairs]
        beta, alpha, r2 = _ols(xs, ys)
        slope = -beta
    with mp.workprec(bits):
        return RateFit(+slope, +alpha, +r2, exponent_a=None,
                       log_correction=0, points_used=len(pairs))
