"""Independent reference implementations used only by the tests."""

import math
import warnings

import numpy as np
from scipy import integrate, special


def quad_exp_int(n, x):
    """``int_1^inf e^{-xt} t^{-n} dt`` by adaptive quadrature, scaled by e^x."""
    with warnings.catch_warnings():
        # quad flags roundoff when epsrel is already at the double-precision floor
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(lambda t: math.exp(-x * (t - 1.0)) * t ** (-n), 1.0, math.inf,
                                epsabs=0.0, epsrel=1e-13, limit=500)
    return val * math.exp(-x)


def quad_log_moment(n, mu):
    """``E[ln(1 + mu X)]``, ``X ~ Gamma(n, 1)``, on ``[0, n + 40 sqrt(n)]`` plus a tail bound."""
    def f(x):
        if x <= 0.0:
            return 0.0
        return math.log1p(mu * x) * math.exp((n - 1) * math.log(x) - x - math.lgamma(n))

    upper = n + 40.0 * math.sqrt(n)
    val, _ = integrate.quad(f, 0.0, upper, epsabs=0.0, epsrel=1e-13, limit=500,
                            points=[max(n - 1.0, 0.5)])
    # ln(1 + mu x) <= ln(1 + mu u) + (x - u)/u above u; both pieces integrate in closed form.
    tail = special.gammaincc(n, upper) * math.log1p(mu * upper)
    tail += (n * special.gammaincc(n + 1, upper) - upper * special.gammaincc(n, upper)) / upper
    return val + tail


def pi_poly_terms(n, x):
    """Term-by-term ``e^{-x} sum x^i / i!`` with explicit factorials."""
    return math.exp(-x) * sum(x ** i / math.factorial(i) for i in range(n))


def zf_pinv_columns(h):
    """Normalized columns of the Moore-Penrose pseudo-inverse transpose."""
    v = np.linalg.pinv(h).conj().T
    return v / np.linalg.norm(v, axis=0)
