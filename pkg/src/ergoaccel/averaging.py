"""Weighted and plain averages along orbits, and their error series.

The weighted average of f over N steps is sum w(n/N) f(n) / sum w(n/N). With
the bump weight the average of a decaying wave converges like
exp(-xi sqrt(N)) instead of the unweighted coeff/N, and the average of an
observable along a Diophantine rotation converges faster than any power of
1/N. This module computes both kinds of average at controlled precision,
exposes the closed forms that the unweighted wave averages admit, and builds
error-vs-extent series ready for rate fitting.

Numerator and denominator are accumulated in one pass with compensated
summation at a guard precision wide enough that the final quotient rounds
correctly at the requested mantissa; a constant f therefore averages to
exactly that constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from mpmath import mp, mpf

from .errors import (
    DegenerateRateError,
    DegenerateWeightError,
    DivergenceError,
    DomainError,
    ErgoaccelError,
    SeriesAbortedError,
    SpecificationError,
)
from .generators import (
    DecayingWaveSpec,
    LinearSystemSpec,
    MapSpec,
    ObservableSpec,
    SuperpositionSpec,
    TorusRotationSpec,
    exact_mean,
    map_orbit,
    _composed_raw,
    _observable_raw,
    _superposition_raw,
    _torus_point_raw,
    _wave_raw,
)
from .precision import (
    Precision,
    QuadratureConfig,
    accumulation_bits,
    as_mpf,
    integrate,
    precision_floor,
)
from .weights import WeightSpec, normalizer, _kernel_raw

__all__ = [
    "AverageResult",
    "ComposedWave",
    "ContinuousWave",
    "ErrorSeries",
    "LeadingCoefficient",
    "OrbitProblem",
    "TorusObservable",
    "continuous_leading_coefficient",
    "continuous_unweighted_average",
    "continuous_unweighted_closed_form",
    "continuous_weighted_average",
    "dw_average_closed_form",
    "dw_leading_coefficient",
    "error_series",
    "unweighted_average",
    "weighted_average",
    "weighted_birkhoff",
]


@dataclass(frozen=True)
class AverageResult:
    """One averaged value with its distance from the reference limit."""

    extent: object
    value: mpf
    reference: mpf
    error: mpf
    precision_bits: int
    at_floor: bool


@dataclass(frozen=True)
class ErrorSeries:
    """Average results at strictly increasing extents, shared precision."""

    results: tuple

    def __post_init__(self):
        results = tuple(self.results)
        if not results:
            raise SpecificationError("an error series needs at least one result")
        extents = [r.extent for r in results]
        if any(b <= a for a, b in zip(extents, extents[1:])):
            raise SpecificationError("extents must be strictly increasing")
        if len({r.precision_bits for r in results}) != 1:
            raise SpecificationError("results must share one precision")
        object.__setattr__(self, "results", results)

    @property
    def extents(self) -> tuple:
        return tuple(r.extent for r in self.results)

    @property
    def errors(self) -> tuple:
        return tuple(r.error for r in self.results)

    @property
    def precision_bits(self) -> int:
        return self.results[0].precision_bits


@dataclass(frozen=True)
class LeadingCoefficient:
    """numerator / denominator of the leading error term."""

    numerator: mpf
    denominator: mpf
    coefficient: mpf


# Problems an error series can be built from, beyond the bare specs.

@dataclass(frozen=True)
class ComposedWave:
    """An observable composed with a decaying wave."""

    wave: DecayingWaveSpec
    observable: ObservableSpec


@dataclass(frozen=True)
class TorusObservable:
    """An observable sampled along a torus rotation orbit."""

    rotation: TorusRotationSpec
    observable: ObservableSpec

    def __post_init__(self):
        if self.rotation.d != 1:
            raise SpecificationError("torus observables here are univariate")
        if self.observable.kind in ("poly_compose", "kappa"):
            raise SpecificationError(
                f"{self.observable.kind} composes with a wave, not a rotation")


@dataclass(frozen=True)
class OrbitProblem:
    """An observable sampled along an iterated-map orbit.

    The observable takes one state; by default it sums the coordinates.
    The reference is the observable's value at the attracting fixed point,
    zero for the contractions built here.
    """

    system: object
    observable: Callable | None = None
    reference: object = 0

    def __post_init__(self):
        if not isinstance(self.system, (LinearSystemSpec, MapSpec)):
            raise SpecificationError(
                "orbit problems take a LinearSystemSpec or MapSpec")


@dataclass(frozen=True)
class ContinuousWave:
    """The continuous-time wave, averaged over [0, T]."""

    wave: DecayingWaveSpec


def _check_extent(weight: WeightSpec, N: int):
    if N < 1:
        raise DomainError("averages need N >= 1")
    if N < 2 and weight.kind != "uniform":
        raise DomainError("tapered weights need N >= 2")


def weighted_average(term: Callable, N: int, weight: WeightSpec | None = None,
                     precision: Precision | None = None) -> mpf:
    """sum_{n<N} w(n/N) term(n) / sum_{n<N} w(n/N).

    The term callable is evaluated at the ambient (guarded) precision.
    """
    prec = precision or Precision()
    weight = weight or WeightSpec.canonical()
    _check_extent(weight, N)
    bits = prec.mantissa_bits
    with mp.workprec(accumulation_bits(prec, N)):
        num = mpf(0)
        num_c = mpf(0)
        den = mpf(0)
        den_c = mpf(0)
        for n in range(N):
            w = _kernel_raw(weight, mpf(n) / N, bits)
            if w == 0:
                continue
            t = w * as_mpf(term(n))
            s = num + t
            if abs(num) >= abs(t):
                num_c += (num - s) + t
            else:
                num_c += (t - s) + num
            num = s
            s = den + w
            if abs(den) >= abs(w):
                den_c += (den - s) + w
            else:
                den_c += (w - s) + den
            den = s
        num += num_c
        den += den_c
        if den == 0:
            raise DegenerateWeightError(f"weights vanished at N = {N}")
    with mp.workprec(bits):
        return num / den


def unweighted_average(term: Callable, N: int,
                       precision: Precision | None = None) -> mpf:
    """(1/N) sum_{n<N} term(n)."""
    prec = precision or Precision()
    if N < 1:
        raise DomainError("averages need N >= 1")
    bits = prec.mantissa_bits
    with mp.workprec(accumulation_bits(prec, N)):
        total = mpf(0)
        comp = mpf(0)
        for n in range(N):
            t = as_mpf(term(n))
            s = total + t
            if abs(total) >= abs(t):
                comp += (total - s) + t
            else:
                comp += (t - s) + total
            total = s
        total += comp
    with mp.workprec(bits):
        return total / N


def dw_leading_coefficient(spec: DecayingWaveSpec,
                           precision: Precision | None = None) -> LeadingCoefficient:
    """N times the unweighted wave average converges to this coefficient.

    Im(e^{i theta} / (1 - e^{-lam + i rho})), split into
    (e^{-lam} sin(rho - theta) + sin(theta)) over
    (1 - e^{-lam} cos(rho))^2 + (e^{-lam} sin(rho))^2.
    """
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 16):
        lam = as_mpf(spec.lam)
        rho = as_mpf(spec.rho)
        theta = as_mpf(spec.theta)
        damp = mp.exp(-lam)
        num = damp * mp.sin(rho - theta) + mp.sin(theta)
        den = (1 - damp * mp.cos(rho)) ** 2 + (damp * mp.sin(rho)) ** 2
        if den == 0:
            raise DegenerateRateError("lam = 0 and rho = 0 does not decay")
        coeff = num / den
    with mp.workprec(bits):
        return LeadingCoefficient(+num, +den, +coeff)


def dw_average_closed_form(spec: DecayingWaveSpec, N: int,
                           precision: Precision | None = None) -> mpf:
    """(1/N) sum_{n<N} e^{-lam n} sin(theta + n rho) via the geometric sum."""
    prec = precision or Precision()
    if N < 1:
        raise DomainError("averages need N >= 1")
    bits = prec.mantissa_bits
    with mp.workprec(bits + 32 + N.bit_length()):
        lam = as_mpf(spec.lam)
        rho = as_mpf(spec.rho)
        theta = as_mpf(spec.theta)
        if lam == 0 and rho == 0:
            val = mp.sin(theta)
        else:
            z = mp.exp(mp.mpc(-lam, rho))
            val = (mp.expj(theta) * (1 - z ** N) / (1 - z)).imag / N
    with mp.workprec(bits):
        return +val


def continuous_unweighted_closed_form(spec: DecayingWaveSpec, T,
                                      precision: Precision | None = None) -> mpf:
    """(1/T) int_0^T e^{-lam t} sin(theta + rho t) dt, in closed form."""
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 32):
        T = as_mpf(T)
        if not T > 0:
            raise DomainError("the horizon T must be positive")
        lam = as_mpf(spec.lam)
        rho = as_mpf(spec.rho)
        theta = as_mpf(spec.theta)
        if lam == 0 and rho == 0:
            val = mp.sin(theta)
        else:
            s = mp.mpc(lam, -rho)
            val = (mp.expj(theta) * (1 - mp.exp(-s * T)) / s).imag / T
    with mp.workprec(bits):
        return +val


def continuous_leading_coefficient(spec: DecayingWaveSpec,
                                   precision: Precision | None = None) -> LeadingCoefficient:
    """T times the unweighted continuous average converges to this.

    (lam sin(theta) + rho cos(theta)) / (lam^2 + rho^2).
    """
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 16):
        lam = as_mpf(spec.lam)
        rho = as_mpf(spec.rho)
        theta = as_mpf(spec.theta)
        num = lam * mp.sin(theta) + rho * mp.cos(theta)
        den = lam * lam + rho * rho
        if den == 0:
            raise DegenerateRateError("lam = 0 and rho = 0 does not decay")
        coeff = num / den
    with mp.workprec(bits):
        return LeadingCoefficient(+num, +den, +coeff)


def _continuous_integrand(spec: DecayingWaveSpec, weight: WeightSpec | None,
                          T, bits: int) -> Callable:
    # Capture the constants above the quadrature's working precision so the
    # closure is exact at any ambient it is called under.
    with mp.workprec(bits + 64):
        lam = as_mpf(spec.lam)
        rho = as_mpf(spec.rho)
        theta = as_mpf(spec.theta)

    def f(z):
        ph = theta + rho * T * z
        ph = ph - 2 * mp.pi * mp.nint(ph / (2 * mp.pi))
        val = mp.exp(-lam * T * z) * mp.sin(ph)
        if weight is not None:
            val *= _kernel_raw(weight, z, bits)
        return val

    return f


def continuous_weighted_average(spec: DecayingWaveSpec, T,
                                weight: WeightSpec | None = None,
                                precision: Precision | None = None,
                                config: QuadratureConfig | None = None) -> mpf:
    """int_0^1 w(z) e^{-lam T z} sin(theta + rho T z) dz / int_0^1 w."""
    prec = precision or Precision()
    weight = weight or WeightSpec.canonical()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 32):
        T = as_mpf(T)
        if not T > 0:
            raise DomainError("the horizon T must be positive")
    f = _continuous_integrand(spec, weight, T, bits)
    num = integrate(f, 0, 1, config=config, precision=prec)
    den = normalizer(weight, precision=prec, config=config)
    with mp.workprec(bits):
        return num / den


def continuous_unweighted_average(spec: DecayingWaveSpec, T,
                                  precision: Precision | None = None,
                                  config: QuadratureConfig | None = None) -> mpf:
    """(1/T) int_0^T e^{-lam t} sin(theta + rho t) dt by quadrature."""
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 32):
        T = as_mpf(T)
        if not T > 0:
            raise DomainError("the horizon T must be positive")
    f = _continuous_integrand(spec, None, T, bits)
    val = integrate(f, 0, 1, config=config, precision=prec)
    with mp.workprec(bits):
        return +val


def weighted_birkhoff(rotation: TorusRotationSpec, observable: ObservableSpec,
                      N: int, weight: WeightSpec | None = None,
                      precision: Precision | None = None) -> AverageResult:
    """Weighted average of the observable along the rotation orbit."""
    problem = TorusObservable(rotation, observable)
    series = error_series(problem, (N,), weight=weight, precision=precision)
    return series.results[0]


def _result(extent, value: mpf, reference: mpf,
            prec: Precision) -> AverageResult:
    bits = prec.mantissa_bits
    with mp.workprec(bits + 32):
        error = abs(value - as_mpf(reference))
    with mp.workprec(bits):
        error = +error
    return AverageResult(extent=extent, value=value, reference=reference,
                         error=error, precision_bits=bits,
                         at_floor=error < precision_floor(prec))


def _validate_extents(extents, weight: WeightSpec):
    extents = tuple(extents)
    if not extents:
        raise DomainError("an error series needs at least one extent")
    if any(not isinstance(n, int) for n in extents):
        raise DomainError("extents must be integers")
    if any(b <= a for a, b in zip(extents, extents[1:])):
        raise DomainError("extents must be strictly increasing")
    _check_extent(weight, extents[0])
    return extents


def _prefix_results(terms: Sequence, reference, extents, weight: WeightSpec,
                    prec: Precision) -> list:
    out = []
    for N in extents:
        value = weighted_average(lambda n: terms[n], N, weight=weight,
                                 precision=prec)
        out.append(_result(N, value, reference, prec))
    return out


def _series_from_terms(term: Callable, reference, extents,
                       weight: WeightSpec, prec: Precision) -> ErrorSeries:
    n_max = extents[-1]
    terms = []
    with mp.workprec(accumulation_bits(prec, n_max)):
        for n in range(n_max):
            try:
                terms.append(term(n))
            except ErgoaccelError as exc:
                usable = [N for N in extents if N <= n]
                partial = _prefix_results(terms, reference, usable, weight, prec)
                raise SeriesAbortedError(
                    f"term {n} failed: {exc}", partial=tuple(partial)) from exc
    return ErrorSeries(tuple(_prefix_results(terms, reference, extents,
                                             weight, prec)))


def _composed_reference(obs: ObservableSpec, prec: Precision) -> mpf:
    with mp.workprec(prec.mantissa_bits):
        if obs.kind == "poly_compose":
            return +as_mpf(obs.coefficients[0])
        if obs.kind == "kappa":
            return +as_mpf(obs.rule(mpf(0))) if obs.rule is not None else mpf(0)
        # Torus kinds damped by e^{-lam n} average to zero.
        return mpf(0)


def error_series(problem, extents, weight: WeightSpec | None = None,
                 precision: Precision | None = None) -> ErrorSeries:
    """Average the problem at each extent and record errors vs the limit.

    Accepts a :class:`DecayingWaveSpec`, :class:`SuperpositionSpec`,
    :class:`ComposedWave`, :class:`TorusObservable`, :class:`OrbitProblem`,
    or :class:`ContinuousWave`. For the continuous wave the extents are
    horizons T and the average is a quadrature; all other problems average
    N orbit terms. A failure mid-series raises :class:`SeriesAbortedError`
    carrying the results whose extents were already covered.
    """
    prec = precision or Precision()
    weight = weight or WeightSpec.canonical()

    if isinstance(problem, ContinuousWave):
        return _continuous_series(problem, extents, weight, prec)

    extents = _validate_extents(extents, weight)
    if isinstance(problem, DecayingWaveSpec):
        return _series_from_terms(lambda n: _wave_raw(problem, n), mpf(0),
                                  extents, weight, prec)
    if isinstance(problem, SuperpositionSpec):
        return _series_from_terms(lambda n: _superposition_raw(problem, n),
                                  mpf(0), extents, weight, prec)
    if isinstance(problem, ComposedWave):
        ref = _composed_reference(problem.observable, prec)
        return _series_from_terms(
            lambda n: _composed_raw(problem.wave, problem.observable, n),
            ref, extents, weight, prec)
    if isinstance(problem, TorusObservable):
        ref = exact_mean(problem.observable, prec)
        obs = problem.observable
        rot = problem.rotation

        def term(n):
            return _observable_raw(obs, _torus_point_raw(rot, n)[0])

        return _series_from_terms(term, ref, extents, weight, prec)
    if isinstance(problem, OrbitProblem):
        return _orbit_series(problem, extents, weight, prec)
    raise SpecificationError(f"no error series for {type(problem).__name__}")


def _default_observable(state):
    if isinstance(state, tuple):
        return mp.fsum(state)
    return state


def _orbit_series(problem: OrbitProblem, extents, weight: WeightSpec,
                  prec: Precision) -> ErrorSeries:
    n_max = extents[-1]
    obs = problem.observable or _default_observable
    aborted = None
    try:
        states = map_orbit(problem.system, n_max - 1, precision=prec)
    except DivergenceError as exc:
        if exc.step < 1:
            raise SeriesAbortedError(f"orbit diverged at step {exc.step}",
                                     partial=()) from exc
        states = map_orbit(problem.system, exc.step - 1, precision=prec)
        aborted = exc
    with mp.workprec(accumulation_bits(prec, len(states))):
        terms = [as_mpf(obs(s)) for s in states]
    if aborted is not None:
        usable = [N for N in extents if N <= len(terms)]
        partial = _prefix_results(terms, problem.reference, usable, weight, prec)
        raise SeriesAbortedError(
            f"orbit diverged at step {aborted.step}",
            partial=tuple(partial)) from aborted
    return ErrorSeries(tuple(_prefix_results(terms, problem.reference,
                                             extents, weight, prec)))


def _continuous_series(problem: ContinuousWave, extents,
                       weight: WeightSpec, prec: Precision) -> ErrorSeries:
    extents = tuple(extents)
    if not extents:
        raise DomainError("an error series needs at least one extent")
    with mp.workprec(prec.mantissa_bits + 16):
        horizons = [as_mpf(T) for T in extents]
        if any(not T > 0 for T in horizons):
            raise DomainError("horizons must be positive")
        if any(b <= a for a, b in zip(horizons, horizons[1:])):
            raise DomainError("horizons must be strictly increasing")
    results = []
    for T, horizon in zip(extents, horizons):
        value = continuous_weighted_average(problem.wave, horizon,
                                            weight=weight, precision=prec)
        results.append(_result(T, value, mpf(0), prec))
    return ErrorSeries(tuple(results))
