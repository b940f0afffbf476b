"""Closed-form special functions checked against scipy quadrature and special functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, special

from . import special_math as sm


@dataclass
class CheckResult:
    name: str
    worst: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: worst {self.worst:.3e} (tol {self.tolerance:.1e})"


def gamma_log_moment_quad(n: int, mu: float) -> float:
    """Adaptive quadrature of E[ln(1 + mu X)], X ~ Gamma(n, 1), on [0, n + 40 sqrt(n)]."""
    def integrand(x):
        if x <= 0.0:
            return 0.0
        return math.log1p(mu * x) * math.exp((n - 1) * math.log(x) - x - math.lgamma(n))

    upper = n + 40.0 * math.sqrt(n)
    value, _ = integrate.quad(integrand, 0.0, upper, epsabs=0.0, epsrel=1e-13, limit=400,
                              points=[max(n - 1.0, 0.5)])
    # ln(1 + mu x) <= ln(1 + mu) + ln(x) for x >= 1 bounds the neglected tail.
    tail = special.gammaincc(n, upper) * math.log1p(mu * upper) + special.gammaincc(n + 1, upper) * n
    return value + tail


def gamma_ratio_half_exact(n: int) -> float:
    """``sqrt(pi) (2n)! / (4^n n! (n-1)!)`` with the factorial ratio in exact integers."""
    ratio = Fraction(math.factorial(2 * n), 4 ** n * math.factorial(n) * math.factorial(n - 1))
    return float(ratio) * math.sqrt(math.pi)


def run_checks(n_max: int = 64) -> list[CheckResult]:
    mus = np.logspace(-3, 3, 13)
    xs = np.logspace(-6, 3, 28)
    worst = 0.0
    for n in range(1, n_max + 1):
        for mu in mus:
            ref = gamma_log_moment_quad(n, mu)
            worst = max(worst, abs(sm.log_moment_gamma(n, mu) - ref) / ref)
    out = [CheckResult("log_moment_gamma vs quadrature", worst, 1e-8)]

    worst = 0.0
    for n in range(1, n_max + 1):
        for x in xs:
            ref = special.expn(n, x)
            if ref > 0:
                worst = max(worst, abs(sm.exp_int(n, x) - ref) / ref)
    out.append(CheckResult("exp_int vs scipy.special.expn", worst, 1e-10))

    worst = 0.0
    for n in range(1, n_max + 1):
        for x in xs:
            scaled = n * sm.exp_int_scaled(n + 1, x) - (1.0 - x * sm.exp_int_scaled(n, x))
            worst = max(worst, abs(scaled))
            if math.exp(-x) > 1e-300:
                resid = n * sm.exp_int(n + 1, x) - (math.exp(-x) - x * sm.exp_int(n, x))
                worst = max(worst, abs(resid) / math.exp(-x))
    out.append(CheckResult("exp_int recurrence residual / e^-x", worst, 1e-12))

    worst = 0.0
    for n in range(1, n_max + 1):
        for x in np.linspace(0.0, 50.0, 26):
            ref = special.gammaincc(n, x)
            if ref > 1e-300:
                worst = max(worst, abs(sm.pi_poly(n, x) - ref) / ref)
    out.append(CheckResult("pi_poly vs regularized upper incomplete gamma", worst, 1e-12))

    worst = max(abs(sm.gamma_ratio_half(n) - gamma_ratio_half_exact(n)) / gamma_ratio_half_exact(n)
                for n in range(1, 1001))
    out.append(CheckResult("gamma_ratio_half vs exact factorial ratio", worst, 1e-12))
    return out
