"""Torus distances, continued fractions, and small-divisor scans.

The convergence rates in this package are controlled by how well rotation
numbers avoid resonances. For a frequency rho the quantity that matters is
the distance of k rho to the nearest lattice point; its decay in k is
summarized by the continued fraction of rho and probed directly by a scan
over frequency vectors k.

Two conventions: the ``two_pi`` norm reduces a radian phase into [0, pi],
the ``unit`` norm reduces a unit-torus point into [0, 1/2]. Reduction
happens at exactly the requested mantissa so that an input equal to the
rounded period maps to exactly zero rather than to rounding dust.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from mpmath import mp, mpf

from .errors import DomainError, SpecificationError
from .precision import Precision, as_mpf

__all__ = [
    "ContinuedFraction",
    "NonresonanceScan",
    "continued_fraction",
    "nonresonance_scan",
    "preset_rotation",
    "small_divisor",
    "torus_norm",
]

_CONVENTIONS = ("two_pi", "unit")

# Rotation numbers that recur throughout: the golden and silver means are
# constant-type, and 3/(2 pi) is the headline wave frequency on the unit
# torus.
_PRESETS = {
    "golden": lambda: (mp.sqrt(5) - 1) / 2,
    "silver": lambda: mp.sqrt(2) - 1,
    "three_over_two_pi": lambda: 3 / (2 * mp.pi),
}


def torus_norm(x, convention: str = "two_pi",
               precision: Precision | None = None) -> mpf:
    """Distance to the nearest period multiple, in [0, pi] or [0, 1/2]."""
    if convention not in _CONVENTIONS:
        raise SpecificationError(f"unknown torus convention {convention!r}")
    prec = precision or Precision()
    with mp.workprec(prec.mantissa_bits):
        x = as_mpf(x)
        if convention == "two_pi":
            period = 2 * mp.pi
            r = x - period * mp.nint(x / period)
            return abs(r)
        f = x - mp.floor(x)
        return min(f, 1 - f)


def preset_rotation(name: str, precision: Precision | None = None) -> mpf:
    """A named rotation number at the requested precision."""
    if name not in _PRESETS:
        raise SpecificationError(f"unknown rotation preset {name!r}")
    prec = precision or Precision()
    with mp.workprec(prec.mantissa_bits):
        return +_PRESETS[name]()


def small_divisor(rho, k: int, precision: Precision | None = None) -> mpf:
    """Unit-torus distance of k rho to the nearest integer.

    The product k rho is formed with guard bits for the size of k before
    reduction, so large k does not eat into the reduced value's accuracy.
    """
    if not isinstance(k, int) or k < 1:
        raise DomainError("small divisors are indexed by integers k >= 1")
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 16 + k.bit_length()):
        f = k * as_mpf(rho)
        f = f - mp.floor(f)
    with mp.workprec(bits):
        return min(+f, +(1 - f))


@dataclass(frozen=True)
class ContinuedFraction:
    """Partial quotients of x with the convergents p_k / q_k.

    ``complete`` is False when the expansion was cut early, either by
    max_terms or because the next convergent's denominator would exceed
    what the input's precision can certify.
    """

    coefficients: tuple
    convergents: tuple
    complete: bool


def continued_fraction(x, max_terms: int = 32,
                       precision: Precision | None = None) -> ContinuedFraction:
    """Continued fraction of x, exact for Fraction input.

    For floating input the expansion stops once the convergent denominator
    passes 2^((bits - 16) / 2); beyond that the partial quotients reflect
    the binary rounding of x rather than the number it approximates.
    """
    if max_terms < 1:
        raise DomainError("max_terms must be positive")
    prec = precision or Precision()
    bits = prec.mantissa_bits

    coeffs = []
    convergents = []
    p_prev, q_prev = 1, 0
    p, q = None, None

    if isinstance(x, Fraction) or isinstance(x, int):
        frac = Fraction(x)
        num, den = frac.numerator, frac.denominator
        complete = False
        while len(coeffs) < max_terms:
            a = num // den
            coeffs.append(int(a))
            if p is None:
                p, q = a, 1
            else:
                p, q, p_prev, q_prev = a * p + p_prev, a * q + q_prev, p, q
            convergents.append(Fraction(p, q))
            num, den = den, num - a * den
            if den == 0:
                complete = True
                break
        return ContinuedFraction(tuple(coeffs), tuple(convergents), complete)

    q_limit = 1 << max(1, (bits - 16) // 2)
    with mp.workprec(bits):
        r = as_mpf(x)
        complete = False
        while len(coeffs) < max_terms:
            a = int(mp.floor(r))
            if p is None:
                p_new, q_new = a, 1
            else:
                p_new, q_new = a * p + p_prev, a * q + q_prev
            if q_new > q_limit:
                break
            coeffs.append(a)
            if p is not None:
                p_prev, q_prev = p, q
            p, q = p_new, q_new
            convergents.append(Fraction(p, q))
            frac_part = r - a
            if frac_part == 0:
                complete = True
                break
            r = 1 / frac_part
    return ContinuedFraction(tuple(coeffs), tuple(convergents), complete)


@dataclass(frozen=True)
class NonresonanceScan:
    """The worst weighted small divisor over a block of frequencies."""

    minimum: mpf
    witness: tuple
    scanned: int


def _frequency_block(d: int, k_max: int):
    # One representative per +-k pair: first nonzero coordinate positive.
    for k in product(range(-k_max, k_max + 1), repeat=d):
        for c in k:
            if c > 0:
                yield k
                break
            if c < 0:
                break


def nonresonance_scan(rho, k_max: int, zeta=0,
                      precision: Precision | None = None) -> NonresonanceScan:
    """min over 0 < |k| <= k_max of |k|^d ln^zeta(1 + |k|) ||k . rho||.

    Zero means rho is resonant inside the block; for Diophantine rho the
    minimum stays bounded away from zero as k_max grows.
    """
    if k_max < 1:
        raise DomainError("the scan needs k_max >= 1")
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 32):
        zeta = as_mpf(zeta)
        if zeta < 0:
            raise DomainError("zeta must be nonnegative")
        rho_v = tuple(as_mpf(r) for r in
                      (rho if isinstance(rho, (tuple, list)) else (rho,)))
        d = len(rho_v)
        best = None
        witness = None
        scanned = 0
        for k in _frequency_block(d, k_max):
            scanned += 1
            f = mp.fsum(ki * ri for ki, ri in zip(k, rho_v))
            f = f - mp.floor(f)
            sd = min(f, 1 - f)
            norm = mp.sqrt(mp.fsum(mpf(ki) ** 2 for ki in k))
            val = norm ** d * mp.ln(1 + norm) ** zeta * sd if zeta != 0 \
                else norm ** d * sd
            if best is None or val < best or (val == best and k < witness):
                best = val
                witness = k
    with mp.workprec(bits):
        return NonresonanceScan(+best, witness, scanned)
