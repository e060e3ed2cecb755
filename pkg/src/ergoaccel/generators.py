"""Problem generators: decaying waves, torus rotations, observables, orbits.

The central test signal is the decaying wave e^{-lam n} sin(theta + n rho):
its weighted averages decay like exp(-xi sqrt(N)) with a rate xi that is
known in closed form, which makes it the calibration family for everything
else here. Around it sit superpositions with component-wise decay, smooth
functions composed with the wave, irrational rotations of the d-torus with
analytic observables, and contracting iterated maps.

Two torus conventions coexist deliberately. Wave phases live on the 2pi-torus
(radians); rotation orbits and their observables live on the unit torus.
Phases are reduced modulo the period in one high-precision operation before
any sine is taken, so large n costs accuracy only through the single product
n * rho, which the caller's guard bits cover.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from mpmath import mp, mpf

from .errors import DivergenceError, DomainError, SpecificationError
from .precision import Precision, as_mpf

__all__ = [
    "DecayingWaveSpec",
    "LinearSystemSpec",
    "MapSpec",
    "ObservableSpec",
    "SuperpositionSpec",
    "TorusRotationSpec",
    "composed_term",
    "decaying_wave_term",
    "evaluate_observable",
    "exact_mean",
    "map_orbit",
    "superposition_term",
    "torus_orbit_point",
]

_TORUS_OBSERVABLES = ("trig_poly", "poisson_kernel", "gaussian_fourier")
_COMPOSE_OBSERVABLES = ("poly_compose", "kappa")


@dataclass(frozen=True)
class DecayingWaveSpec:
    """e^{-lam n} sin(theta + n rho); lam = 0 gives the pure rotation wave."""

    lam: object
    rho: object
    theta: object

    def __post_init__(self):
        with mp.workprec(64):
            if not as_mpf(self.lam) >= 0:
                raise SpecificationError("decaying wave needs lam >= 0")


@dataclass(frozen=True)
class SuperpositionSpec:
    """sum_k c_k e^{-lam_k n} sin(theta + n rho_k), one shared phase offset.

    Components are (c, lam, rho) triples; every lam must be positive so the
    slowest component dominates the decay.
    """

    components: tuple
    theta: object

    def __post_init__(self):
        comps = tuple(tuple(c) for c in self.components)
        if not comps:
            raise SpecificationError("superposition needs at least one component")
        for c in comps:
            if len(c) != 3:
                raise SpecificationError("components are (c, lam, rho) triples")
        with mp.workprec(64):
            if any(not as_mpf(lam) > 0 for _, lam, _ in comps):
                raise SpecificationError("superposition components need lam > 0")
        object.__setattr__(self, "components", comps)


@dataclass(frozen=True)
class ObservableSpec:
    """A function to average: three torus kinds and two wave compositions.

    trig_poly: c_0 + sum_k c_k cos(2 pi k theta), coefficients (c_0, .., c_l).
    poisson_kernel: (1-q^2)/(1 - 2q cos(2 pi theta) + q^2) - 1, mean zero.
    gaussian_fourier: 2 sum_{k>=1} e^{-k^2} cos(2 pi k theta), mean zero.
    poly_compose: Q(x) = sum_j c_j x^j applied to a wave value.
    kappa: |x|^{2 tau} (or a caller-supplied rule with the same flatness).
    """

    kind: str
    coefficients: tuple | None = None
    q: object = None
    tau: int | None = None
    rule: Callable | None = None

    def __post_init__(self):
        if self.kind not in _TORUS_OBSERVABLES + _COMPOSE_OBSERVABLES:
            raise SpecificationError(f"unknown observable kind {self.kind!r}")
        if self.kind in ("trig_poly", "poly_compose"):
            if not self.coefficients:
                raise SpecificationError(f"{self.kind} needs coefficients")
            object.__setattr__(self, "coefficients", tuple(self.coefficients))
        elif self.coefficients is not None:
            raise SpecificationError(f"{self.kind} takes no coefficients")
        if self.kind == "poisson_kernel":
            if self.q is None:
                raise SpecificationError("poisson_kernel needs q")
            with mp.workprec(64):
                if not abs(as_mpf(self.q)) < 1:
                    raise SpecificationError("poisson_kernel needs |q| < 1")
        elif self.q is not None:
            raise SpecificationError(f"{self.kind} takes no q")
        if self.kind == "kappa":
            if not isinstance(self.tau, int) or self.tau < 1:
                raise SpecificationError("kappa needs integer tau >= 1")
        elif self.tau is not None or self.rule is not None:
            raise SpecificationError(f"{self.kind} takes no tau or rule")


@dataclass(frozen=True)
class TorusRotationSpec:
    """theta0 + n rho on the unit d-torus."""

    rho: tuple
    theta0: tuple

    def __post_init__(self):
        rho = tuple(self.rho) if isinstance(self.rho, (tuple, list)) else (self.rho,)
        theta0 = (tuple(self.theta0) if isinstance(self.theta0, (tuple, list))
                  else (self.theta0,))
        if len(rho) != len(theta0) or not rho:
            raise SpecificationError("rho and theta0 need equal positive length")
        with mp.workprec(64):
            if any(not 0 <= as_mpf(t) < 1 for t in theta0):
                raise SpecificationError("theta0 components must lie in [0, 1)")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "theta0", theta0)

    @property
    def d(self) -> int:
        return len(self.rho)


@dataclass(frozen=True)
class LinearSystemSpec:
    """x -> A x for a d x d contraction; checked at construction."""

    matrix: tuple
    x0: tuple
    margin: float = 1e-6

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.matrix)
        x0 = tuple(self.x0) if isinstance(self.x0, (tuple, list)) else (self.x0,)
        d = len(rows)
        if d == 0 or any(len(r) != d for r in rows) or len(x0) != d:
            raise SpecificationError("matrix must be square and match x0")
        with mp.workprec(64):
            a = np.array([[float(as_mpf(v)) for v in r] for r in rows])
        radius = max(abs(np.linalg.eigvals(a)))
        if not radius < 1 - self.margin:
            raise SpecificationError(
                f"spectral radius {radius:.6f} is not below 1 - margin")
        object.__setattr__(self, "matrix", rows)
        object.__setattr__(self, "x0", x0)

    @property
    def d(self) -> int:
        return len(self.matrix)


@dataclass(frozen=True)
class MapSpec:
    """A user-supplied step x -> F(x) iterated inside a bounding box.

    The step is called at the ambient working precision; states may be
    scalars or tuples. Leaving the box |x_i| <= bound raises
    :class:`DivergenceError`.
    """

    step: Callable
    x0: object
    bound: object = 1000

    def __post_init__(self):
        with mp.workprec(64):
            if not as_mpf(self.bound) > 0:
                raise SpecificationError("bounding box needs bound > 0")


def _reduced_phase(theta: mpf, rho: mpf, n: int) -> mpf:
    # theta + n rho mod 2pi in one shot; the single product n*rho is where
    # large n spends precision, covered by the caller's guard bits.
    ph = theta + n * rho
    twopi = 2 * mp.pi
    return ph - twopi * mp.nint(ph / twopi)


def _wave_raw(spec: DecayingWaveSpec, n: int) -> mpf:
    lam = as_mpf(spec.lam)
    ph = _reduced_phase(as_mpf(spec.theta), as_mpf(spec.rho), n)
    s = mp.sin(ph)
    if s == 0:
        return mpf(0)
    return mp.exp(-lam * n) * s if lam != 0 else s


def _superposition_raw(spec: SuperpositionSpec, n: int) -> mpf:
    theta = as_mpf(spec.theta)
    total = mpf(0)
    for c, lam, rho in spec.components:
        ph = _reduced_phase(theta, as_mpf(rho), n)
        total += as_mpf(c) * mp.exp(-as_mpf(lam) * n) * mp.sin(ph)
    return total


# e^{-k^2} tails truncated where they fall below the ambient resolution.
_GAUSS_COEFF_CACHE: dict = {}


def _gaussian_coeffs() -> tuple:
    bits = mp.prec
    cached = _GAUSS_COEFF_CACHE.get(bits)
    if cached is None:
        kmax = int(mp.ceil(mp.sqrt((bits + 64) * mp.ln(2)))) + 1
        cached = tuple(mp.exp(-k * k) for k in range(1, kmax + 1))
        _GAUSS_COEFF_CACHE[bits] = cached
    return cached


def _observable_raw(spec: ObservableSpec, u: mpf) -> mpf:
    """Torus observable at u on the unit torus, ambient precision."""
    if spec.kind == "trig_poly":
        coeffs = spec.coefficients
        total = as_mpf(coeffs[0])
        for k, c in enumerate(coeffs[1:], start=1):
            ck = as_mpf(c)
            if ck != 0:
                total += ck * mp.cospi(2 * k * u)
        return total
    if spec.kind == "poisson_kernel":
        q = as_mpf(spec.q)
        return (1 - q * q) / (1 - 2 * q * mp.cospi(2 * u) + q * q) - 1
    # gaussian_fourier
    total = mpf(0)
    for k, c in enumerate(_gaussian_coeffs(), start=1):
        total += c * mp.cospi(2 * k * u)
    return 2 * total


def _compose_raw(spec: ObservableSpec, x: mpf) -> mpf:
    if spec.kind == "poly_compose":
        # Horner on Q(x) = sum_j c_j x^j
        total = mpf(0)
        for c in reversed(spec.coefficients):
            total = total * x + as_mpf(c)
        return total
    if spec.rule is not None:
        return as_mpf(spec.rule(x))
    return abs(x) ** (2 * spec.tau)


def _composed_raw(wave: DecayingWaveSpec, obs: ObservableSpec, n: int) -> mpf:
    if obs.kind in _COMPOSE_OBSERVABLES:
        return _compose_raw(obs, _wave_raw(wave, n))
    # Torus observables ride the wave's phase mapped to the unit torus, so a
    # trig_poly with unit coefficients is cos(k(theta + n rho)) exactly.
    ph = as_mpf(wave.theta) + n * as_mpf(wave.rho)
    u = ph / (2 * mp.pi)
    u = u - mp.floor(u)
    lam = as_mpf(wave.lam)
    val = _observable_raw(obs, u)
    return mp.exp(-lam * n) * val if lam != 0 else val


def _frac(x: mpf) -> mpf:
    return x - mp.floor(x)


def _torus_point_raw(spec: TorusRotationSpec, n: int) -> tuple:
    return tuple(_frac(as_mpf(t) + n * as_mpf(r))
                 for t, r in zip(spec.theta0, spec.rho))


def decaying_wave_term(spec: DecayingWaveSpec, n: int,
                       precision: Precision | None = None) -> mpf:
    """e^{-lam n} sin(theta + n rho) with the phase reduced mod 2pi first."""
    prec = precision or Precision()
    if n < 0:
        raise DomainError("term index must be nonnegative")
    with mp.workprec(prec.mantissa_bits + 32 + n.bit_length()):
        val = _wave_raw(spec, n)
    with mp.workprec(prec.mantissa_bits):
        return +val


def superposition_term(spec: SuperpositionSpec, n: int,
                       precision: Precision | None = None) -> mpf:
    """Sum of component waves at index n."""
    prec = precision or Precision()
    if n < 0:
        raise DomainError("term index must be nonnegative")
    with mp.workprec(prec.mantissa_bits + 32 + n.bit_length()):
        val = _superposition_raw(spec, n)
    with mp.workprec(prec.mantissa_bits):
        return +val


def composed_term(wave: DecayingWaveSpec, obs: ObservableSpec, n: int,
                  precision: Precision | None = None) -> mpf:
    """Observable composed with the wave at index n.

    poly_compose and kappa act on the wave's value; the torus kinds are
    evaluated at the wave's phase (on the unit torus) and damped by e^{-lam n}.
    """
    prec = precision or Precision()
    if n < 0:
        raise DomainError("term index must be nonnegative")
    with mp.workprec(prec.mantissa_bits + 32 + n.bit_length()):
        val = _composed_raw(wave, obs, n)
    with mp.workprec(prec.mantissa_bits):
        return +val


def torus_orbit_point(spec: TorusRotationSpec, n: int,
                      precision: Precision | None = None) -> tuple:
    """frac(theta0 + n rho), componentwise."""
    prec = precision or Precision()
    if n < 0:
        raise DomainError("orbit index must be nonnegative")
    with mp.workprec(prec.mantissa_bits + 32 + n.bit_length()):
        pt = _torus_point_raw(spec, n)
    with mp.workprec(prec.mantissa_bits):
        return tuple(+x for x in pt)


def evaluate_observable(spec: ObservableSpec, point,
                        precision: Precision | None = None) -> mpf:
    """Torus observable at a unit-torus point."""
    if spec.kind not in _TORUS_OBSERVABLES:
        raise SpecificationError(f"{spec.kind} composes with a wave; "
                                 "it is not a torus observable")
    prec = precision or Precision()
    if isinstance(point, (tuple, list)):
        if len(point) != 1:
            raise SpecificationError("torus observables here are univariate")
        point = point[0]
    with mp.workprec(prec.mantissa_bits + 16):
        val = _observable_raw(spec, _frac(as_mpf(point)))
    with mp.workprec(prec.mantissa_bits):
        return +val


def exact_mean(spec: ObservableSpec, precision: Precision | None = None) -> mpf:
    """Mean of a torus observable over the torus."""
    if spec.kind not in _TORUS_OBSERVABLES:
        raise SpecificationError(f"{spec.kind} has no torus mean")
    prec = precision or Precision()
    with mp.workprec(prec.mantissa_bits):
        if spec.kind == "trig_poly":
            return +as_mpf(spec.coefficients[0])
        return mpf(0)


def _as_state_tuple(x):
    return tuple(x) if isinstance(x, (tuple, list)) else (x,)


def map_orbit(system, n: int, precision: Precision | None = None) -> tuple:
    """States x_0 .. x_n (length n + 1) of an iterated map.

    Accepts a :class:`LinearSystemSpec` (step x -> Ax, escape impossible by
    the contraction check) or a :class:`MapSpec` (user step inside a
    bounding box).
    """
    prec = precision or Precision()
    if n < 0:
        raise DomainError("orbit length must be nonnegative")
    bits = prec.mantissa_bits
    with mp.workprec(bits + 32 + n.bit_length()):
        if isinstance(system, LinearSystemSpec):
            rows = tuple(tuple(as_mpf(v) for v in r) for r in system.matrix)
            x = tuple(as_mpf(v) for v in system.x0)
            states = [x]
            for _ in range(n):
                x = tuple(sum(a * v for a, v in zip(row, x)) for row in rows)
                states.append(x)
        elif isinstance(system, MapSpec):
            bound = as_mpf(system.bound)
            if isinstance(system.x0, (tuple, list)):
                x = tuple(as_mpf(v) for v in system.x0)
            else:
                x = as_mpf(system.x0)
            states = [x]
            for k in range(n):
                if any(abs(as_mpf(v)) > bound for v in _as_state_tuple(x)):
                    raise DivergenceError(
                        f"orbit left the box |x| <= {mp.nstr(bound, 8)} at step {k}",
                        step=k, state=x)
                x = system.step(x)
                states.append(x if not isinstance(x, (tuple, list)) else tuple(x))
            if any(abs(as_mpf(v)) > bound for v in _as_state_tuple(x)):
                raise DivergenceError(
                    f"orbit left the box |x| <= {mp.nstr(bound, 8)} at step {n}",
                    step=n, state=x)
        else:
            raise SpecificationError("map_orbit takes a LinearSystemSpec or MapSpec")
    with mp.workprec(bits):
        out = []
        for s in states:
            if isinstance(s, tuple):
                out.append(tuple(+as_mpf(v) for v in s))
            else:
                out.append(+as_mpf(s))
        return tuple(out)
