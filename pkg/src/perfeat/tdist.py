"""Student-t tail probabilities from the regularized incomplete beta function.

The two-tailed probability for a t statistic with nu degrees of freedom is

    P(|T| >= |t|) = I_x(nu / 2, 1 / 2),   x = nu / (nu + t^2),

where I is the regularized incomplete beta function, evaluated here with the
standard continued-fraction expansion (Lentz's algorithm) on whichever of
I_x(a, b) and 1 - I_{1-x}(b, a) converges fast.
"""

from __future__ import annotations

import math

_MAX_ITERATIONS = 400
_EPS = 3e-16
_TINY = 1e-300


def log_beta(a: float, b: float) -> float:
    """log of the beta function B(a, b) for positive arguments."""
    if a <= 0 or b <= 0:
        raise ValueError("beta function arguments must be positive")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta integral at (a, b, x)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITERATIONS + 1):
        m2 = 2 * m
        numerator = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + numerator * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + numerator / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        numerator = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + numerator * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + numerator / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), monotone in x from 0 at x = 0 to 1 at x = 1."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log1p(-x) - log_beta(a, b)
    front = math.exp(log_front)
    # Use the expansion on the side of the split point where it converges fast.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_two_tailed(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isnan(t):
        raise ValueError("t statistic is NaN")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(0.5 * df, 0.5, x)


def student_t_sf(t: float, df: float) -> float:
    """One-sided upper tail P(T > t)."""
    half = 0.5 * student_t_two_tailed(abs(t), df)
    return half if t >= 0 else 1.0 - half
