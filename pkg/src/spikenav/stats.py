"""Welch's t-test from summary statistics.

The two-tailed p-value comes from the Student-t distribution evaluated
through the regularized incomplete beta function, computed here with a
continued fraction (modified Lentz) so the toolkit needs no statistics
service: P(|T| > t) = I_x(nu/2, 1/2) with x = nu / (nu + t^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class WelchInput:
    """Summary stats of two samples: means, standard deviations, sizes."""

    mu1: float
    sigma1: float
    n1: int
    mu2: float
    sigma2: float
    n2: int

    def __post_init__(self):
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError("both sample sizes must be >= 2")
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise ValueError("standard deviations must be >= 0")


@dataclass(frozen=True)
class WelchResult:
    t_value: float
    dof: float
    p_value: float


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise RuntimeError(f"incomplete beta continued fraction did not converge "
                       f"(a={a}, b={b}, x={x})")


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0, 0 <= x <= 1."""
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x must be in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    front = math.exp(math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                     + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, dof: float) -> float:
    """CDF of the Student-t distribution with ``dof`` degrees of freedom."""
    if dof <= 0:
        raise ValueError("dof must be > 0")
    if t == 0.0:
        return 0.5
    x = dof / (dof + t * t)
    tail = 0.5 * reg_inc_beta(dof / 2.0, 0.5, x)
    return 1.0 - tail if t > 0 else tail


def student_t_two_tailed_p(t: float, dof: float) -> float:
    """P(|T| >= |t|) under Student-t with ``dof`` degrees of freedom."""
    if dof <= 0:
        raise ValueError("dof must be > 0")
    if t == 0.0:
        return 1.0
    return reg_inc_beta(dof / 2.0, 0.5, dof / (dof + t * t))


def welch_t_test(inp: WelchInput) -> WelchResult:
    """Welch's unequal-variance t-test with Welch-Satterthwaite dof."""
    se1 = inp.sigma1 ** 2 / inp.n1
    se2 = inp.sigma2 ** 2 / inp.n2
    if se1 + se2 == 0.0:
        if inp.mu1 == inp.mu2:
            return WelchResult(t_value=0.0, dof=float(inp.n1 + inp.n2 - 2), p_value=1.0)
        raise ValueError("degenerate variance: both sigmas are zero with unequal means")
    t = (inp.mu1 - inp.mu2) / math.sqrt(se1 + se2)
    dof = (se1 + se2) ** 2 / (se1 ** 2 / (inp.n1 - 1) + se2 ** 2 / (inp.n2 - 1))
    return WelchResult(t_value=t, dof=dof, p_value=student_t_two_tailed_p(t, dof))
