"""Special functions behind the closed-form rate expressions.

All functions work in natural-log units and operate on Python scalars.
The central quantity is

    I_n(mu) = E[ln(1 + mu X)],    X ~ Gamma(n, 1),

the ergodic capacity of a Gamma-distributed channel power (the complex
chi-square convention, mean n).  It is evaluated through the identity

    I_n(mu) = e^{1/mu} * sum_{m=1}^{n} E_m(1/mu)

which follows from integrating d/dx p_{n+1}(x) = p_n(x) - p_{n+1}(x) by parts
against ln(1 + mu x).  Every term is positive, so there is no cancellation.
The alternating form built from finite exponential sums is kept as
:func:`log_moment_gamma_pi_form` for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "GammaLogMomentParams",
    "EXP_INT_CROSSOVER",
    "pi_poly",
    "exp_int",
    "exp_int_scaled",
    "log_moment_gamma",
    "log_moment_gamma_pi_form",
    "gamma_ratio_half",
]

EULER_GAMMA = 0.5772156649015329

#: Below this argument ``exp_int`` uses the power series, at or above it the
#: modified-Lentz continued fraction.
EXP_INT_CROSSOVER = 1.0

_EPS = 1e-16
_FPMIN = 1e-300
_MAXIT = 10_000


@dataclass(frozen=True)
class GammaLogMomentParams:
    """Shape ``n`` and scale ``mu`` of the integral ``I_n(mu)``."""

    n: int
    mu: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be positive and finite, got {self.mu!r}")

    def value(self) -> float:
        return log_moment_gamma(self.n, self.mu)


def _check_order(n) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"order must be a positive integer, got {n!r}")
    return int(n)


def _partial_exp_sum(n: int, x: float) -> float:
    term = 1.0
    total = 1.0
    for i in range(1, n):
        term *= x / i
        total += term
    return total


def pi_poly(n: int, x: float) -> float:
    """Truncated exponential sum ``e^{-x} * sum_{i<n} x^i / i!``.

    Terms are accumulated with ``t_i = t_{i-1} * x / i``; negative ``x`` is
    allowed.
    """
    n = _check_order(n)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"pi_poly requires a finite argument, got {x!r}")
    return math.exp(-x) * _partial_exp_sum(n, x)


def _exp_int_series(n: int, x: float) -> float:
    # Power series, valid for small x; returns the unscaled E_n(x).
    nm1 = n - 1
    ans = 1.0 / nm1 if nm1 else -math.log(x) - EULER_GAMMA
    fact = 1.0
    for i in range(1, _MAXIT):
        fact *= -x / i
        if i != nm1:
            delta = -fact / (i - nm1)
        else:
            psi = -EULER_GAMMA + sum(1.0 / ii for ii in range(1, nm1 + 1))
            delta = fact * (-math.log(x) + psi)
        ans += delta
        if abs(delta) < abs(ans) * _EPS:
            return ans
    raise ArithmeticError(f"exp_int series failed to converge (n={n}, x={x})")


def _exp_int_cf_scaled(n: int, x: float) -> float:
    # Continued fraction (modified Lentz); returns e^x * E_n(x).
    b = x + n
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT):
        an = -i * (n - 1 + i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"exp_int continued fraction failed (n={n}, x={x})")


def _check_exp_int_args(n, x) -> tuple[int, float]:
    n = _check_order(n)
    x = float(x)
    if not x > 0 or math.isnan(x):
        raise ValueError(f"exp_int requires x > 0, got {x!r}")
    return n, x


def exp_int(n: int, x: float) -> float:
    """Generalized exponential integral ``E_n(x) = int_1^inf e^{-xt} t^{-n} dt``.

    Uses the power series for ``x < EXP_INT_CROSSOVER`` and a continued
    fraction above it.  Underflows to 0 for ``x`` beyond ~745.
    """
    n, x = _check_exp_int_args(n, x)
    if math.isinf(x):
        return 0.0
    if x < EXP_INT_CROSSOVER:
        return _exp_int_series(n, x)
    return _exp_int_cf_scaled(n, x) * math.exp(-x)


def exp_int_scaled(n: int, x: float) -> float:
    """``e^x * E_n(x)``, finite for every ``x > 0``."""
    n, x = _check_exp_int_args(n, x)
    if x < EXP_INT_CROSSOVER:
        return _exp_int_series(n, x) * math.exp(x)
    if math.isinf(x):
        return 0.0
    return _exp_int_cf_scaled(n, x)


def log_moment_gamma(n: int, mu: float) -> float:
    """``E[ln(1 + mu X)]`` for ``X ~ Gamma(n, 1)``, in nats.

    Parameters
    ----------
    n : int
        Shape parameter (number of complex degrees of freedom), ``n >= 1``.
    mu : float
        Nonnegative scale; ``mu == 0`` gives exactly 0.
    """
    n = _check_order(n)
    mu = float(mu)
    if mu < 0 or math.isnan(mu):
        raise ValueError(f"mu must be nonnegative, got {mu!r}")
    if mu == 0.0:
        return 0.0
    if math.isinf(mu):
        return math.inf
    a = 1.0 / mu
    if a == 0.0:
        raise OverflowError(f"mu={mu} too large for a finite result")
    return math.fsum(exp_int_scaled(m, a) for m in range(1, n + 1))


def log_moment_gamma_pi_form(n: int, mu: float) -> float:
    """Alternating closed form of :func:`log_moment_gamma`.

    ``Pi_n(-1/mu) E_1(1/mu) + sum_{m=1}^{n-1} Pi_m(1/mu) Pi_{n-m}(-1/mu) / m``.

    Agrees with :func:`log_moment_gamma` when ``1/mu`` is moderate, but the
    factors ``Pi_k(-1/mu)`` grow like ``e^{1/mu}`` while the result stays
    O(n mu), so precision is lost quickly for small ``mu`` or large ``n``.
    """
    n = _check_order(n)
    mu = float(mu)
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu!r}")
    a = 1.0 / mu
    # The e^{+-a} prefactors cancel pairwise; only the polynomial parts remain.
    total = _partial_exp_sum(n, -a) * exp_int_scaled(1, a)
    for m in range(1, n):
        total += _partial_exp_sum(m, a) * _partial_exp_sum(n - m, -a) / m
    return total


# sqrt(n) * sum_j c_j n^-j, the large-n expansion of Gamma(n + 1/2) / Gamma(n).
_RATIO_HALF_SERIES = (1.0, -1 / 8, 1 / 128, 5 / 1024, -21 / 32768, -399 / 262144, 869 / 4194304)
_RATIO_HALF_ASYMPTOTIC_N = 100


def gamma_ratio_half(n: int) -> float:
    """``Gamma(n + 1/2) / Gamma(n)``.

    Log-gamma difference for small ``n``; above that the difference cancels
    badly and the asymptotic series in ``1/n`` is used instead.
    """
    n = _check_order(n)
    if n < _RATIO_HALF_ASYMPTOTIC_N:
        return math.exp(math.lgamma(n + 0.5) - math.lgamma(n))
    inv = 1.0 / n
    acc = 0.0
    for c in reversed(_RATIO_HALF_SERIES):
        acc = acc * inv + c
    return math.sqrt(n) * acc
