"""Complex special functions used throughout the package.

Provides the regular confluent hypergeometric function M(a, b, z), associated
Laguerre polynomials, the auxiliary polynomial family entering the Green's
function of the singular Sturm-Liouville problem, the exponential integral E1,
and the logarithmic second solution of the Laguerre equation.

All functions are pure and reentrant.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

EULER_GAMMA = 0.57721566490153286061

# Series truncation: stop when |term| < _SERIES_RTOL * |sum| for
# _SERIES_RUN consecutive terms.
_SERIES_RTOL = 1e-17
_SERIES_RUN = 3
_SERIES_MAX_TERMS = 10_000

# Below this real part the raw Kummer series alternates destructively;
# switch to M(a,b,z) = e^z M(b-a,b,-z).
_KUMMER_TRANSFORM_RE = -1.0

# |z| at and beyond which the large-argument expansion reaches ~1e-13.
_ASYMPTOTIC_MIN_ABS = 34.0

# Cancellation budget: accept the double-precision series only if the
# estimated rounding error stays below this relative level.
_CANCEL_RTOL = 1e-13

_E1_SWITCH_ABS = 2.0
_E1_MAX_ITER = 500


class SpecialFunctionError(Exception):
    """Base class for special-function evaluation failures."""


class ConvergenceError(SpecialFunctionError):
    """Series or continued fraction did not converge within the budget."""

    def __init__(self, message, z, terms):
        super().__init__(f"{message} (|z|={abs(z):.6g}, terms={terms})")
        self.z = z
        self.terms = terms


@dataclass(frozen=True)
class PolynomialCoeffs:
    """Real polynomial stored by ascending-degree coefficients."""

    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ValueError("empty coefficient list")
        if len(self.coeffs) > 1 and self.coeffs[-1] == 0.0:
            raise ValueError("leading coefficient must be nonzero")

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, x):
        # Horner, works for real or complex x
        acc = 0.0 * x + 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self):
        if self.degree == 0:
            return PolynomialCoeffs((0.0,))
        d = tuple(k * c for k, c in enumerate(self.coeffs) if k > 0)
        return PolynomialCoeffs(d)


def _recip_gamma(x):
    """1/Gamma(x) for real x, zero at the poles."""
    if x <= 0 and x == int(x):
        return 0.0
    return 1.0 / math.gamma(x)


def _kummer_series_double(a, b, z):
    """Double-precision power series. Returns (value, max |partial sum|, terms)."""
    term = 1.0 + 0.0j
    acc = term
    max_mag = 1.0
    small_run = 0
    for k in range(_SERIES_MAX_TERMS):
        term = term * ((a + k) / ((b + k) * (k + 1.0))) * z
        if term == 0:  # terminating series (a a non-positive integer)
            return acc, max_mag, k + 1
        acc += term
        mag = abs(acc)
        if mag > max_mag:
            max_mag = mag
        if abs(term) < _SERIES_RTOL * max(mag, 1e-300):
            small_run += 1
            if small_run >= _SERIES_RUN:
                return acc, max_mag, k + 1
        else:
            small_run = 0
    raise ConvergenceError("Kummer series did not converge", z, _SERIES_MAX_TERMS)


def _kummer_series_highprec(a, b, z):
    """The same term recurrence in elevated-precision arithmetic.

    Used only in the cancellation-dominated window where neither the
    double-precision series nor the large-argument expansion reaches the
    accuracy contract.
    """
    import mpmath as mp

    extra_bits = int(1.5 * abs(z)) + 40
    with mp.workprec(53 + extra_bits):
        zz = mp.mpc(z)
        aa = mp.mpf(a)
        bb = mp.mpf(b)
        term = mp.mpc(1)
        acc = mp.mpc(1)
        small_run = 0
        for k in range(_SERIES_MAX_TERMS):
            term = term * ((aa + k) / ((bb + k) * (k + 1))) * zz
            if term == 0:
                return complex(acc)
            acc += term
            if abs(term) < mp.mpf(_SERIES_RTOL) * abs(acc):
                small_run += 1
                if small_run >= _SERIES_RUN:
                    return complex(acc)
            else:
                small_run = 0
    raise ConvergenceError("high-precision Kummer series did not converge",
                           z, _SERIES_MAX_TERMS)


def _asym_sum(p, q, w):
    """Optimally truncated sum_s (p)_s (q)_s / (s! w^s).

    The truncation point is the globally smallest term: a Pochhammer factor
    passing near zero makes single terms dip and recover, so a local growth
    test would stop too early.
    """
    term = 1.0 + 0.0j
    acc = term
    best_acc = acc
    best_mag = abs(term)
    for s in range(int(abs(w)) + 40):
        term = term * ((p + s) * (q + s) / (s + 1.0)) / w
        acc += term
        mag = abs(term)
        if mag < best_mag:
            best_mag = mag
            best_acc = acc
            if mag < _SERIES_RTOL * abs(acc):
                break
        elif mag > 1e6 * best_mag:
            break  # safely inside the divergent tail
    return best_acc, best_mag


def _kummer_asymptotic(a, b, z):
    """Large-|z| expansion of M; upper sign for Im z >= 0.

    Returns (value, absolute error estimate) where the estimate is the sum
    of the optimally truncated tails scaled by their prefactors.
    """
    eps = 1.0 if z.imag >= 0 else -1.0
    s1, tail1 = _asym_sum(a, a - b + 1.0, -z)
    s2, tail2 = _asym_sum(b - a, 1.0 - a, z)
    pref_alg = cmath.exp(1j * math.pi * a * eps) * z ** (-a) * _recip_gamma(b - a)
    pref_exp = cmath.exp(z) * z ** (a - b) * _recip_gamma(a)
    value = math.gamma(b) * (pref_alg * s1 + pref_exp * s2)
    err = math.gamma(b) * (abs(pref_alg) * tail1 + abs(pref_exp) * tail2)
    return value, err


def kummer_m(a, b, z):
    """Kummer's confluent hypergeometric function M(a, b, z).

    a and b real, z complex; b must not be a non-positive integer. Relative
    accuracy ~1e-12 for |z| <= 200. The power series (with the Kummer
    transformation for Re z < -1) handles the well-conditioned regime; the
    large-argument expansion and a high-precision series fallback cover the
    cancellation-dominated corner at large |Im z|.
    """
    if b <= 0 and b == int(b):
        raise ValueError(f"b={b} is a non-positive integer")
    z = complex(z)
    if z.real < _KUMMER_TRANSFORM_RE:
        return cmath.exp(z) * kummer_m(b - a, b, -z)
    if a == 0.0:
        return 1.0 + 0.0j
    value, max_mag, _terms = _kummer_series_double(a, b, z)
    cancel = 2.3e-16 * max_mag
    if cancel <= _CANCEL_RTOL * max(abs(value), 1e-300):
        return value
    if abs(z) >= _ASYMPTOTIC_MIN_ABS:
        asym, err = _kummer_asymptotic(a, b, z)
        if err <= _CANCEL_RTOL * max(abs(asym), 1e-300):
            return asym
    return _kummer_series_highprec(a, b, z)


def kummer_m_dz(a, b, z):
    """d/dz M(a, b, z) = (a/b) M(a+1, b+1, z)."""
    return (a / b) * kummer_m(a + 1.0, b + 1.0, z)


def laguerre(n, beta, x):
    """Associated Laguerre polynomial L_n^(beta)(x) by three-term recurrence.

    Works for real or complex x (scalars or numpy arrays).
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if beta not in (0, 1, 2):
        raise ValueError("beta must be 0, 1 or 2")
    p_prev = 1.0 + 0.0 * x
    if n == 0:
        return p_prev
    p = 1.0 + beta - x
    for k in range(1, n):
        p, p_prev = ((2 * k + beta + 1 - x) * p - (k + beta) * p_prev) / (k + 1), p
    return p


def laguerre_coeffs(n, beta):
    """Coefficients of L_n^(beta), ascending degree (exact, then floats)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    coeffs = []
    for m in range(n + 1):
        c = Fraction((-1) ** m * math.comb(n + beta, n - m), math.factorial(m))
        coeffs.append(float(c))
    return PolynomialCoeffs(tuple(coeffs))


def p_poly(n):
    """The auxiliary polynomial family of degree n from the Green's-function
    construction: constant term 1, leading coefficient equal to that of
    L_n^(1). Coefficients by the direct double sum, computed exactly."""
    if n < 0:
        raise ValueError("n must be non-negative")
    coeffs = [Fraction(0)] * (n + 1)
    for k in range(n + 1):
        binom = (-1) ** k * math.comb(n + 1, k + 1)
        for m in range(k + 1):
            coeffs[m] += Fraction(binom * math.factorial(k - m),
                                  math.factorial(k))
    return PolynomialCoeffs(tuple(float(c) for c in coeffs))


def _e1_series(z):
    acc = -EULER_GAMMA - cmath.log(z)
    term = 1.0 + 0.0j
    for k in range(1, _E1_MAX_ITER):
        term = term * (-z) / k
        contrib = -term / k
        acc += contrib
        if abs(contrib) < _SERIES_RTOL * abs(acc):
            return acc
    raise ConvergenceError("E1 series did not converge", z, _E1_MAX_ITER)


def _e1_continued_fraction(z):
    # Modified Lentz on E1(z) = e^{-z} / (z + 1 - 1/(z + 3 - 4/(z + 5 - ...)))
    tiny = 1e-300
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for k in range(1, _E1_MAX_ITER):
        a = -k * k * 1.0
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return cmath.exp(-z) * h
    raise ConvergenceError("E1 continued fraction did not converge", z,
                           _E1_MAX_ITER)


def exp_integral_e1(z):
    """Exponential integral E1(z) = int_1^inf e^(-t z)/t dt for Re z > 0.

    Power series with the log term for |z| <= 2, modified Lentz continued
    fraction beyond.
    """
    z = complex(z)
    if z.real <= 0:
        raise ValueError(f"exp_integral_e1 requires Re z > 0, got {z}")
    if abs(z) <= _E1_SWITCH_ABS:
        return _e1_series(z)
    return _e1_continued_fraction(z)


def second_solution_v(n, xi):
    """Second solution of the Laguerre equation of order n:
    v(xi) = P_n(xi) e^xi / xi + L_n^(1)(xi) E1(-xi), for Re(-xi) > 0."""
    xi = complex(xi)
    if xi == 0:
        raise SpecialFunctionError("second_solution_v is singular at xi = 0")
    if (-xi).real <= 0:
        raise ValueError(f"second_solution_v requires Re(-xi) > 0, got xi={xi}")
    pn = p_poly(n)
    return pn(xi) * cmath.exp(xi) / xi + laguerre(n, 1, xi) * exp_integral_e1(-xi)
