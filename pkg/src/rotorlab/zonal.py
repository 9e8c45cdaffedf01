"""Zonal polynomials of the sphere S^{n-1}, normalized to 1 at s = 1.

These are the Gegenbauer (ultraspherical) polynomials rescaled so that
G_l(n, 1) = 1; for n = 2 they reduce to Chebyshev T_l, for n = 3 to the
Legendre polynomials.  Both a float evaluator (vectorizes over numpy
arrays) and an exact coefficient form are provided; the three-term
recurrence

    G_0 = 1,  G_1 = s,
    G_{l+1} = ((2l + n - 2) s G_l - l G_{l-1}) / (l + n - 2)

keeps the value at s = 1 pinned to 1 identically.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .errors import InputError


def gegenbauer(n: int, l: int, s):
    """Evaluate the degree-l zonal polynomial at s; accepts scalars or arrays."""
    if n < 2 or l < 0:
        raise InputError(f"gegenbauer needs n >= 2 and l >= 0, got n={n}, l={l}")
    if l == 0:
        return s * 0 + 1.0
    prev = s * 0 + 1.0
    cur = s * 1.0
    for k in range(1, l):
        prev, cur = cur, ((2 * k + n - 2) * s * cur - k * prev) / (k + n - 2)
    return cur


@lru_cache(maxsize=None)
def gegenbauer_coefficients(n: int, l: int) -> tuple[Fraction, ...]:
    """Exact coefficients of G_l(n, s) in s; index k is the s^k coefficient."""
    if n < 2 or l < 0:
        raise InputError(f"gegenbauer needs n >= 2 and l >= 0, got n={n}, l={l}")
    if l == 0:
        return (Fraction(1),)
    if l == 1:
        return (Fraction(0), Fraction(1))
    prev = gegenbauer_coefficients(n, l - 2) if l >= 2 else ()
    cur = gegenbauer_coefficients(n, l - 1)
    k = l - 1
    shifted = (Fraction(0),) + cur  # s * G_{l-1}
    out = []
    for deg in range(l + 1):
        a = shifted[deg] if deg < len(shifted) else Fraction(0)
        b = prev[deg] if deg < len(prev) else Fraction(0)
        out.append(((2 * k + n - 2) * a - k * b) / (k + n - 2))
    return tuple(out)


def laplace_eigenvalue(n: int, l: int) -> int:
    """-eigenvalue of the spherical Laplacian on degree-l harmonics: l(l+n-2).

    A standard fact, but not taken on faith here: the heat module's exact
    Gegenbauer eigen-check re-derives it inside the test suite before the
    Chernoff comparisons rely on it.
    """
    return l * (l + n - 2)
