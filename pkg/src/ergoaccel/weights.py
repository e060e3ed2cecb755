"""Averaging weights: smooth bump kernels, their derivatives, and norms.

The canonical weight w(x) = exp(-1/(x(1-x))) on (0,1) vanishes to infinite
order at both endpoints; weighting an average by w(n/N) is what buys the
accelerated convergence this package is about. The kernel family here also
covers the sharper exp(-x^-p (1-x)^-q) bumps, a width-parametrized variant
exp(-gamma/(x(1-x))), and two classical comparison windows (sin^2 and the
parabola) that taper only polynomially.

Derivatives of the bumps are evaluated by Cauchy's integral formula on a
circle of radius min(x, 1-x)/2: the kernels are analytic on a neighborhood
of (0,1), and a K-point trapezoid rule on the contour converges geometrically
while staying numerically stable where finite differences would cancel.

Two integral identities are included because the decay-rate analysis leans on
them: Phi(A,B) = int_0^inf exp(-(As - B/s)^2) ds, which is independent of B,
and Psi(sigma,eta) = int_0^inf exp(-sigma s^2 - eta s^-2) ds with its closed
form exp(-2 sqrt(sigma eta)) sqrt(pi) / (2 sqrt(sigma)).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable

from mpmath import mp, mpf

from .errors import (
    ContourError,
    DegenerateWeightError,
    DomainError,
    SpecificationError,
)
from .precision import (
    Precision,
    QuadratureConfig,
    accumulation_bits,
    as_mpf,
    integrate,
)

__all__ = [
    "WeightSpec",
    "PsiIdentity",
    "cauchy_schlomilch_phi",
    "derivative_norm_growth",
    "eval_kernel",
    "kernel_derivative",
    "l1_decay_norm",
    "normalizer",
    "psi_identity",
    "weight_sum",
]

_EXP_KINDS = ("exp_pq", "exp_width")
_KINDS = _EXP_KINDS + ("laskar_sin2", "poly_x1mx", "uniform")


@dataclass(frozen=True)
class WeightSpec:
    """One averaging kernel: a kind tag plus its shape parameters.

    exp_pq(p, q) is exp(-x^-p (1-x)^-q); exp_width(gamma) is
    exp(-gamma/(x(1-x))); laskar_sin2 and poly_x1mx are the classical
    sin^2(pi x) and x(1-x) windows; uniform is the unweighted baseline.
    """

    kind: str
    p: object = None
    q: object = None
    gamma: object = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise SpecificationError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "exp_pq":
            if self.p is None or self.q is None or self.gamma is not None:
                raise SpecificationError("exp_pq takes exactly p and q")
            with mp.workprec(64):
                if not (as_mpf(self.p) > 0 and as_mpf(self.q) > 0):
                    raise SpecificationError("exp_pq needs p > 0 and q > 0")
        elif self.kind == "exp_width":
            if self.gamma is None or self.p is not None or self.q is not None:
                raise SpecificationError("exp_width takes exactly gamma")
            with mp.workprec(64):
                if not as_mpf(self.gamma) > 0:
                    raise SpecificationError("exp_width needs gamma > 0")
        elif self.p is not None or self.q is not None or self.gamma is not None:
            raise SpecificationError(f"{self.kind} takes no parameters")

    @classmethod
    def canonical(cls) -> "WeightSpec":
        """The exponential bump exp(-1/(x(1-x)))."""
        return cls(kind="exp_pq", p=1, q=1)

    @property
    def exponential(self) -> bool:
        return self.kind in _EXP_KINDS


def _underflows(expo_real, cutoff_bits: int) -> bool:
    # Exponents this negative produce values treated as exactly zero. The
    # cutoff follows the ambient mantissa when that is wider than the
    # caller's target: a widened accumulation must keep every weight it can
    # still resolve, or the flushed tail shows up as a precision-dependent
    # step in cancelling sums.
    bits = max(cutoff_bits, mp.prec)
    return expo_real < -(bits + 64) * mp.ln(2)


def _shape_exponent(v):
    # Integer exponents keep mpmath on the fast binary-power path.
    return v if isinstance(v, int) else as_mpf(v)


def _exp_exponent(spec: WeightSpec, x: mpf):
    # ln w(x) for the exponential kinds, x in (0,1).
    if spec.kind == "exp_pq":
        p = _shape_exponent(spec.p)
        q = _shape_exponent(spec.q)
        if p == 1 and q == 1:
            return -1 / (x * (1 - x))
        return -(x ** -p) * ((1 - x) ** -q)
    return -as_mpf(spec.gamma) / (x * (1 - x))


def _kernel_raw(spec: WeightSpec, x: mpf, cutoff_bits: int) -> mpf:
    """Kernel value at ambient precision; exact 0 outside the support."""
    if spec.kind == "uniform":
        return mpf(1) if 0 <= x < 1 else mpf(0)
    if x <= 0 or x >= 1:
        return mpf(0)
    if spec.kind == "laskar_sin2":
        return mp.sinpi(x) ** 2
    if spec.kind == "poly_x1mx":
        return x * (1 - x)
    expo = _exp_exponent(spec, x)
    if _underflows(expo, cutoff_bits):
        return mpf(0)
    return mp.exp(expo)


def _kernel_complex(spec: WeightSpec, z, cutoff_bits: int):
    # Analytic continuation of the exponential kernels for contour work.
    if spec.kind == "exp_pq":
        p = _shape_exponent(spec.p)
        q = _shape_exponent(spec.q)
        if p == 1 and q == 1:
            expo = -1 / (z * (1 - z))
        else:
            expo = -(z ** -p) * ((1 - z) ** -q)
    else:
        expo = -as_mpf(spec.gamma) / (z * (1 - z))
    if _underflows(expo.real, cutoff_bits):
        return mp.mpc(0)
    return mp.exp(expo)


def eval_kernel(spec: WeightSpec, x, precision: Precision | None = None) -> mpf:
    """w(x), exactly zero outside the open support."""
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 16):
        val = _kernel_raw(spec, as_mpf(x), bits)
    with mp.workprec(bits):
        return +val


def weight_sum(spec: WeightSpec, N: int, precision: Precision | None = None) -> mpf:
    """A_N = sum_{n=0}^{N-1} w(n/N), accumulated in index order."""
    prec = precision or Precision()
    if N < 1:
        raise DomainError("weight sum needs N >= 1")
    if N < 2 and spec.kind != "uniform":
        # w(0) = 0 for every tapered kernel, so N = 1 would be all zeros.
        raise DomainError("tapered kernels need N >= 2")
    bits = prec.mantissa_bits
    with mp.workprec(accumulation_bits(prec, N)):
        total = mpf(0)
        comp = mpf(0)
        for n in range(N):
            t = _kernel_raw(spec, mpf(n) / N, bits)
            s = total + t
            if abs(total) >= abs(t):
                comp += (total - s) + t
            else:
                comp += (t - s) + total
            total = s
        total = total + comp
    with mp.workprec(bits):
        result = +total
    if result == 0:
        raise DegenerateWeightError(f"A_N vanished for {spec.kind} at N = {N}")
    return result


# Normalizers int_0^1 w(x) dx, cached per (spec, bits) for the default config.
_NORMALIZER_CACHE: dict = {}
_NORMALIZER_LOCK = threading.Lock()


def normalizer(spec: WeightSpec, precision: Precision | None = None,
               config: QuadratureConfig | None = None) -> mpf:
    """int_0^1 w(x) dx; A_N / N converges to this as N grows."""
    prec = precision or Precision()
    bits = prec.mantissa_bits
    key = (spec, bits)
    if config is None:
        with _NORMALIZER_LOCK:
            cached = _NORMALIZER_CACHE.get(key)
        if cached is not None:
            return cached
    val = integrate(lambda x: _kernel_raw(spec, x, bits), 0, 1, config, prec)
    if config is None:
        with _NORMALIZER_LOCK:
            _NORMALIZER_CACHE.setdefault(key, val)
    return val


def _contour_raw(spec: WeightSpec, x: mpf, m: int, cutoff_bits: int) -> mpf:
    """D^m w(x) by the Cauchy integral at ambient precision.

    K = max(64, 8m) trapezoid points on |z - x| = min(x, 1-x)/2; if any
    kernel value comes back non-finite the radius is halved once before
    giving up.
    """
    if m == 0:
        return _kernel_raw(spec, x, cutoff_bits)
    K = max(64, 8 * m)
    delta = min(x, 1 - x) / 2
    for _ in range(2):
        total = mpf(0)
        comp = mpf(0)
        bad = False
        for j in range(K):
            z = x + delta * mp.expjpi(mpf(2 * j) / K)
            wz = _kernel_complex(spec, z, cutoff_bits)
            if not (mp.isfinite(wz.real) and mp.isfinite(wz.imag)):
                bad = True
                break
            term = (wz * mp.expjpi(mpf(-2 * j * m) / K)).real
            s = total + term
            if abs(total) >= abs(term):
                comp += (total - s) + term
            else:
                comp += (term - s) + total
            total = s
        if not bad:
            val = mp.factorial(m) * (total + comp) / (K * delta ** m)
            if mp.isfinite(val):
                return val
        delta = delta / 2
    raise ContourError(
        f"contour evaluation of D^{m}w failed near x = {mp.nstr(x, 8)}"
    )


def kernel_derivative(spec: WeightSpec, x, m: int,
                      precision: Precision | None = None) -> mpf:
    """m-th derivative of an exponential kernel at x in (0,1)."""
    prec = precision or Precision()
    if m < 0:
        raise DomainError("derivative order must be nonnegative")
    if m > 0 and not spec.exponential:
        raise SpecificationError("contour derivatives cover the exponential kinds only")
    bits = prec.mantissa_bits
    with mp.workprec(bits + 32):
        xv = as_mpf(x)
        if not 0 < xv < 1:
            raise DomainError("derivative point must lie in (0, 1)")
        val = _contour_raw(spec, xv, m, bits)
    with mp.workprec(bits):
        return +val


def l1_decay_norm(spec: WeightSpec, m: int, lam, N: int,
                  config: QuadratureConfig | None = None,
                  precision: Precision | None = None) -> mpf:
    """|| |D^m w(y)| exp(-lam N y) ||_L1(0,1).

    The integrand is rescaled internally by exp(+sqrt(2 lam N)) (an exact
    factorization, divided back out at the end) so the quadrature's relative
    tolerance keeps meaning even when the norm itself sits far below the
    near-zero floor: the interesting regime is exactly the one where this
    quantity is exponentially small in sqrt(N).
    """
    prec = precision or Precision()
    bits = prec.mantissa_bits
    if m < 0:
        raise DomainError("derivative order must be nonnegative")
    if m > 0 and not spec.exponential:
        raise SpecificationError("contour derivatives cover the exponential kinds only")
    if N < 1:
        raise DomainError("decay norm needs N >= 1")
    with mp.workprec(bits + 32):
        lam_ = as_mpf(lam)
        if not lam_ > 0:
            raise DomainError("decay norm needs lam > 0")
        lamN = lam_ * N
        shift = mp.sqrt(2 * lamN)
        if m == 0 and spec.exponential:
            # One combined exponent: the rescale lifts kernel values from far
            # below the bare-kernel cutoff back to relevance, so the cutoff
            # must see the lifted exponent or it cuts a step into the integrand.
            def f(y):
                if y <= 0 or y >= 1:
                    return mpf(0)
                expo = _exp_exponent(spec, y) + shift - lamN * y
                if _underflows(expo, bits):
                    return mpf(0)
                return mp.exp(expo)
        elif m == 0:
            f: Callable = lambda y: _kernel_raw(spec, y, bits) * mp.exp(shift - lamN * y)
        else:
            lift = bits + int(shift / mp.ln(2)) + 16
            f = lambda y: abs(_contour_raw(spec, y, m, lift)) * mp.exp(shift - lamN * y)
        scaled = integrate(f, 0, 1, config, prec)
        val = scaled * mp.exp(-shift)
    with mp.workprec(bits):
        return +val


def _sign_change_points(spec: WeightSpec, m: int, bits: int) -> list:
    """Zeros of D^m w in (0,1), located by grid scan plus bisection.

    Grid values within 2^-48 of the overall scale are ignored as tail noise:
    the contour evaluation bottoms out near its trapezoid truncation there,
    and any sign flips it reports are spurious (and carry no L1 mass).
    """
    grid = 48 + 16 * m
    ys = [mpf(2 * i + 1) / (2 * grid) for i in range(grid)]
    vals = [_contour_raw(spec, y, m, bits) for y in ys]
    scale = max(abs(v) for v in vals)
    thresh = scale * mpf(2) ** -48
    zeros = []
    for i in range(grid - 1):
        a, b = ys[i], ys[i + 1]
        va, vb = vals[i], vals[i + 1]
        if abs(va) <= thresh or abs(vb) <= thresh:
            continue
        if mp.sign(va) == mp.sign(vb):
            continue
        # Split points are critical points of the antiderivative, so their
        # location error enters the norm only at second order: 2^-48 is ample.
        for _ in range(48):
            mid = (a + b) / 2
            vm = _contour_raw(spec, mid, m, bits)
            if vm == 0:
                a = b = mid
                break
            if mp.sign(vm) == mp.sign(va):
                a, va = mid, vm
            else:
                b, vb = mid, vm
        zeros.append((a + b) / 2)
    return zeros


def derivative_norm_growth(spec: WeightSpec, m_max: int,
                           precision: Precision | None = None) -> list:
    """||D^m w||_L1(0,1) for m = 1..m_max.

    Splitting (0,1) at the zeros of D^m w turns each piece into an exact
    antiderivative difference of D^(m-1) w, so no quadrature of a kinked
    |integrand| is needed: the norm is a telescoping sum of contour values.
    Since the split points are critical points of D^(m-1) w, their location
    error enters the result only at second order.
    """
    prec = precision or Precision()
    if not 2 <= m_max <= 12:
        raise DomainError("m_max must lie in 2..12")
    if not spec.exponential:
        raise SpecificationError("contour derivatives cover the exponential kinds only")
    bits = prec.mantissa_bits
    norms = []
    with mp.workprec(bits + 32):
        for m in range(1, m_max + 1):
            cuts = _sign_change_points(spec, m, bits)
            # D^(m-1) w vanishes to infinite order at both endpoints.
            values = [mpf(0)]
            values += [_contour_raw(spec, z, m - 1, bits) for z in cuts]
            values.append(mpf(0))
            norm = mpf(0)
            for lo, hi in zip(values, values[1:]):
                norm += abs(hi - lo)
            with mp.workprec(bits):
                norms.append(+norm)
    return norms


def cauchy_schlomilch_phi(A, B, precision: Precision | None = None,
                          config: QuadratureConfig | None = None,
                          truncation_scale=1) -> mpf:
    """Phi(A,B) = int_0^inf exp(-(As - B/s)^2) ds, equal to sqrt(pi)/(2A).

    The infinite range is truncated where the argument (As - B/s) exceeds T
    with exp(-T^2) below the working tolerance; ``truncation_scale`` widens T
    so callers can confirm the truncation is converged.
    """
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 32):
        A_ = as_mpf(A)
        B_ = as_mpf(B)
        if not A_ > 0:
            raise DomainError("Phi needs A > 0")
        if B_ < 0:
            raise DomainError("Phi needs B >= 0")
        # 60 extra nats absorb the e^u Jacobian of the log substitution below.
        T = mp.sqrt((bits + 16) * mp.ln(2) + 60) * as_mpf(truncation_scale)
        disc = mp.sqrt(T * T + 4 * A_ * B_)
        s_hi = (T + disc) / (2 * A_)
        if B_ == 0:
            f = lambda s: mp.exp(-((A_ * s) ** 2))
            val = integrate(f, 0, s_hi, config, prec)
        else:
            # s = e^u keeps the lower transition O(1) wide even for tiny B,
            # where uniform panels in s could never resolve it.
            s_lo = (disc - T) / (2 * A_)
            g = lambda u: mp.exp(u - (A_ * mp.exp(u) - B_ * mp.exp(-u)) ** 2)
            val = integrate(g, mp.log(s_lo), mp.log(s_hi), config, prec)
    with mp.workprec(bits):
        return +val


@dataclass(frozen=True)
class PsiIdentity:
    """Quadrature value and closed form of Psi(sigma, eta)."""

    quadrature: mpf
    closed_form: mpf


def psi_identity(sigma, eta, precision: Precision | None = None,
                 config: QuadratureConfig | None = None) -> PsiIdentity:
    """Psi(sigma,eta) = int_0^inf exp(-sigma s^2 - eta s^-2) ds, both ways.

    The closed form exp(-2 sqrt(sigma eta)) sqrt(pi)/(2 sqrt(sigma)) follows
    from completing (sqrt(sigma) s - sqrt(eta)/s)^2 and applying Phi.
    """
    prec = precision or Precision()
    bits = prec.mantissa_bits
    with mp.workprec(bits + 32):
        sg = as_mpf(sigma)
        et = as_mpf(eta)
        if not sg > 0:
            raise DomainError("Psi needs sigma > 0")
        if not et > 0:
            raise DomainError("Psi needs eta > 0")
        # Truncate where sigma s^2 + eta/s^2 = U: both tails are below the
        # tolerance once exp(-U) is, and U >= 2 sqrt(sigma eta) keeps the
        # quadratic formula real. The 60 extra nats absorb the Jacobian of
        # the log substitution, which keeps the lower transition resolvable
        # by uniform panels even when eta is many orders below sigma.
        U = (bits + 16) * mp.ln(2) + 60 + 2 * mp.sqrt(sg * et)
        root = mp.sqrt(U * U - 4 * sg * et)
        s_hi = mp.sqrt((U + root) / (2 * sg))
        s_lo = mp.sqrt(2 * et / (U + root))
        g = lambda u: mp.exp(u - sg * mp.exp(2 * u) - et * mp.exp(-2 * u))
        quad_val = integrate(g, mp.log(s_lo), mp.log(s_hi), config, prec)
        closed = mp.exp(-2 * mp.sqrt(sg * et)) * mp.sqrt(mp.pi) / (2 * mp.sqrt(sg))
    with mp.workprec(bits):
        return PsiIdentity(quadrature=+quad_val, closed_form=+closed)
