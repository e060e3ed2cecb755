"""Shared test helpers."""

from mpmath import mp

from ergoaccel.precision import Precision, as_mpf

P256 = Precision()
P512 = Precision(512)


def rel_err(value, reference, bits: int = 1024):
    """|value - reference| / |reference| evaluated at high precision.

    Falls back to the absolute error when the reference is zero. Pass exact
    references as str or Fraction: anything built from mpf arithmetic at the
    caller's ambient precision is already rounded by the time it gets here.
    """
    with mp.workprec(bits):
        v = as_mpf(value)
        r = as_mpf(reference)
        if r == 0:
            return abs(v)
        return abs((v - r) / r)
