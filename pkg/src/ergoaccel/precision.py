"""Arbitrary-precision arithmetic contexts, ordered summation, and quadrature.

Everything downstream funnels its arithmetic through this module: a
:class:`Precision` fixes the mantissa size results are rounded to (plus a
higher "oracle" size used to cross-check them), :func:`sum_ordered` adds
sequences deterministically in index order, and :func:`integrate` is a
composite Gauss-Legendre rule on uniform panels whose only adaptivity is
doubling the panel count until two successive refinements agree.

The near-zero absolute floor is 2^-(mantissa_bits - 40): results smaller than
this are treated as numerically indistinguishable from zero, and quadrature
refinement may stop once successive iterates differ by less than it.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from mpmath import mp, mpf

from .errors import DomainError, QuadratureConvergenceError

__all__ = [
    "Precision",
    "QuadratureConfig",
    "QuadratureInfo",
    "as_mpf",
    "accumulation_bits",
    "integrate",
    "precision_floor",
    "sum_ordered",
]

# Extra bits carried internally by quadrature so the value handed back after
# rounding to mantissa_bits is clean of accumulation noise.
_QUAD_GUARD_BITS = 32


@dataclass(frozen=True)
class Precision:
    """Working precision in bits, plus the oracle precision used to check it.

    ``oracle_bits`` defaults to twice ``mantissa_bits``. Recomputing a result
    at the oracle precision and comparing against the stated one is how this
    package validates its own arithmetic: the two must agree to a relative
    error of 2^-(mantissa_bits - 20) whenever the result's magnitude exceeds
    the floor 2^-(mantissa_bits - 40).
    """

    mantissa_bits: int = 256
    oracle_bits: int | None = None

    def __post_init__(self):
        if self.mantissa_bits < 64:
            raise DomainError("mantissa_bits must be at least 64")
        if self.oracle_bits is None:
            object.__setattr__(self, "oracle_bits", 2 * self.mantissa_bits)
        if self.oracle_bits <= self.mantissa_bits:
            raise DomainError("oracle_bits must exceed mantissa_bits")

    def oracle(self) -> "Precision":
        """The Precision at which this one's results are cross-checked."""
        return Precision(self.oracle_bits)


def precision_floor(precision: Precision) -> mpf:
    """Magnitudes below 2^-(mantissa_bits - 40) count as zero."""
    return mpf(2) ** (-(precision.mantissa_bits - 40))


def accumulation_bits(precision: Precision, n_terms: int = 0) -> int:
    """Working-precision bits for a sum of ``n_terms`` rounded quantities.

    Doubling the mantissa covers cancellation all the way down to the
    precision floor: a sum whose result sits at magnitude 2^-(bits - 40)
    among O(1) terms loses bits - 40 bits to cancellation, and the extra
    mantissa keeps the rounded result faithful there. The 32 + log2(N)
    term is the binding width for short sums at low mantissa widths.
    """
    bits = precision.mantissa_bits
    guard = max(32 + (n_terms.bit_length() if n_terms > 0 else 0), bits)
    return bits + guard


def as_mpf(x) -> mpf:
    """Convert to mpf at the current working precision.

    Accepts int, float, str, Fraction, and mpf. Strings and Fractions are
    evaluated at the ambient precision, so callers should raise it first
    when the value feeds a long computation.
    """
    if isinstance(x, mpf):
        return x
    if isinstance(x, Fraction):
        return mpf(x.numerator) / mpf(x.denominator)
    if isinstance(x, (int, float, str)):
        return mpf(x)
    if hasattr(x, "_mpf_"):
        # Lazy constants like mp.pi evaluate at the ambient precision.
        return mpf(x)
    raise DomainError(f"cannot interpret {type(x).__name__} as a real number")


def sum_ordered(terms: Iterable, precision: Precision | None = None) -> mpf:
    """Sum terms strictly in index order at mantissa_bits precision.

    Neumaier-compensated so the result is faithful to the rounded inputs;
    deterministic by construction. An empty sequence sums to 0. Non-finite
    terms raise :class:`DomainError`.
    """
    prec = precision or Precision()
    with mp.workprec(prec.mantissa_bits):
        total = mpf(0)
        comp = mpf(0)
        for i, raw in enumerate(terms):
            t = as_mpf(raw)
            if not mp.isfinite(t):
                raise DomainError(f"non-finite term at index {i}: {raw!r}")
            s = total + t
            if abs(total) >= abs(t):
                comp += (total - s) + t
            else:
                comp += (t - s) + total
            total = s
        return total + comp


@dataclass(frozen=True)
class QuadratureConfig:
    """Panel layout and stopping rule for :func:`integrate`.

    ``relative_tolerance`` is a plain number, not derived from any Precision:
    two runs of the same integral with the same config walk identical panel
    schedules regardless of working precision, which is what makes oracle
    recomputation a pure arithmetic comparison.
    """

    initial_panels: int = 8
    nodes_per_panel: int = 12
    relative_tolerance: object = 1e-30
    max_doublings: int = 14

    def __post_init__(self):
        if self.initial_panels < 1:
            raise DomainError("initial_panels must be positive")
        if self.nodes_per_panel < 2:
            raise DomainError("nodes_per_panel must be at least 2")
        if self.max_doublings < 1:
            raise DomainError("max_doublings must be at least 1")
        with mp.workprec(64):
            rtol = as_mpf(self.relative_tolerance)
            if not (mp.isfinite(rtol) and rtol > 0):
                raise DomainError("relative_tolerance must be a positive real")

    @classmethod
    def for_precision(cls, precision: Precision, **kwargs) -> "QuadratureConfig":
        """Config whose tolerance tracks the precision: rtol = 2^-(bits-16)."""
        rtol = mpf(2) ** (-(precision.mantissa_bits - 16))
        return cls(relative_tolerance=rtol, **kwargs)


@dataclass(frozen=True)
class QuadratureInfo:
    """Refinement trace of a converged :func:`integrate` call."""

    panels: int
    iterates: tuple


# Gauss-Legendre rules on [-1, 1], cached per (order, bits). Newton iteration
# on the three-term recurrence; deterministic, so cached rules are bit-stable.
_RULE_CACHE: dict = {}
_RULE_LOCK = threading.Lock()


def _legendre_rule(n: int, bits: int):
    key = (n, bits)
    with _RULE_LOCK:
        rule = _RULE_CACHE.get(key)
    if rule is not None:
        return rule
    with mp.workprec(bits):
        one = mpf(1)
        tol = mpf(2) ** (-(bits - 8))
        nodes = []
        weights = []
        for i in range(1, n + 1):
            x = mpf(math.cos(math.pi * (i - 0.25) / (n + 0.5)))
            dp = one
            for _ in range(120):
                p0, p1 = one, x
                for k in range(2, n + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x = x - dx
                if abs(dx) <= tol:
                    break
            p0, p1 = one, x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
        rule = (tuple(nodes), tuple(weights))
    with _RULE_LOCK:
        _RULE_CACHE.setdefault(key, rule)
    return _RULE_CACHE[key]


def _composite(f: Callable, lo: mpf, hi: mpf, panels: int, nodes: Sequence, wts: Sequence) -> mpf:
    # One pass over panels x nodes in fixed order, Neumaier-compensated.
    half = (hi - lo) / (2 * panels)
    total = mpf(0)
    comp = mpf(0)
    for j in range(panels):
        mid = lo + (2 * j + 1) * half
        for x, w in zip(nodes, wts):
            term = w * f(mid + half * x)
            if not mp.isfinite(term):
                raise DomainError(f"integrand returned non-finite value near x = {mp.nstr(mid)}")
            s = total + term
            if abs(total) >= abs(term):
                comp += (total - s) + term
            else:
                comp += (term - s) + total
            total = s
    return (total + comp) * half


def integrate(f: Callable, a, b, config: QuadratureConfig | None = None,
              precision: Precision | None = None) -> mpf:
    """Integrate f over [a, b] by composite Gauss-Legendre with panel doubling.

    The panel count doubles until two successive refinements agree to the
    config's relative tolerance, or to within the absolute floor for results
    near zero; the last refinement is returned, rounded to mantissa_bits.
    The integrand is evaluated at a raised ambient precision, so closures
    built from mpmath functions need no precision plumbing of their own.

    Raises :class:`QuadratureConvergenceError` (carrying the last two
    iterates) if max_doublings is exhausted.
    """
    value, _ = integrate_info(f, a, b, config, precision)
    return value


def integrate_info(f: Callable, a, b, config: QuadratureConfig | None = None,
                   precision: Precision | None = None):
    """Like :func:`integrate`, also returning a :class:`QuadratureInfo`."""
    prec = precision or Precision()
    bits = prec.mantissa_bits
    cfg = config or QuadratureConfig.for_precision(prec)
    work = bits + _QUAD_GUARD_BITS
    nodes, wts = _legendre_rule(cfg.nodes_per_panel, work)
    with mp.workprec(work):
        lo = as_mpf(a)
        hi = as_mpf(b)
        if not lo < hi:
            raise DomainError("integration interval requires a < b")
        rtol = as_mpf(cfg.relative_tolerance)
        floor_abs = precision_floor(prec)
        panels = cfg.initial_panels
        iterates = []
        prev = None
        for _ in range(cfg.max_doublings + 1):
            cur = _composite(f, lo, hi, panels, nodes, wts)
            iterates.append(cur)
            if prev is not None:
                diff = abs(cur - prev)
                if diff <= rtol * abs(cur) or diff <= floor_abs:
                    with mp.workprec(bits):
                        value = +cur
                        trace = tuple(+it for it in iterates)
                    return value, QuadratureInfo(panels=panels, iterates=trace)
            prev = cur
            panels *= 2
        with mp.workprec(bits):
            last = +iterates[-1]
            previous = +iterates[-2] if len(iterates) > 1 else None
    raise QuadratureConvergenceError(
        f"no agreement to rtol {mp.nstr(rtol, 8)} after {cfg.max_doublings} "
        f"doublings ({panels // 2} panels); last two iterates "
        f"{mp.nstr(last, 12)} and {mp.nstr(previous, 12)}",
        last=last,
        previous=previous,
    )
