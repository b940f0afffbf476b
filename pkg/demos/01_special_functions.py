"""
Log-moments of Gamma variables
==============================

Every closed-form rate in the package reduces to

    I_n(mu) = E[ln(1 + mu X)],   X ~ Gamma(n, 1),

the ergodic capacity of a channel whose power gain is a sum of ``n``
unit-power complex Gaussians.  Here we evaluate it, compare it with brute
force integration, and look at the building blocks.
"""

import math

import numpy as np
from scipy import integrate

from ergobound.special_math import exp_int, gamma_ratio_half, log_moment_gamma, log_moment_gamma_pi_form, pi_poly

# A few values of the exponential integral E_n(x).  Small x goes through a
# power series, large x through a continued fraction.
for n, x in [(1, 1e-6), (1, 1.0), (2, 1.0), (1, 50.0), (10, 300.0)]:
    print(f"E_{n}({x:g}) = {exp_int(n, x):.12e}")

# Pi_n(x) is Poisson(x) probability of fewer than n events for x >= 0; the
# closed forms also evaluate it at negative arguments.
print("Pi_3(-2) =", pi_poly(3, -2.0), " e^2 =", math.exp(2.0))

# I_n against direct numerical integration over the Gamma density.
def brute_force(n, mu):
    f = lambda x: math.log1p(mu * x) * math.exp((n - 1) * math.log(x) - x - math.lgamma(n)) if x > 0 else 0.0
    return integrate.quad(f, 0, np.inf, limit=400)[0]

print("\n  n      mu      I_n(mu)        quad       alternating form")
for n, mu in [(1, 1.0), (6, 2.0), (10, 0.01), (64, 1e3)]:
    print(f"{n:3d} {mu:8g} {log_moment_gamma(n, mu):12.9f} {brute_force(n, mu):12.9f} "
          f"{log_moment_gamma_pi_form(n, mu):14.6g}")

# The alternating closed form cancels catastrophically when n is large and
# mu small; the positive sum of exponential integrals does not.
print("\nsmall-mu stress, n = 40, mu = 1e-3:")
print("  sum of E_m     ", log_moment_gamma(40, 1e-3))
print("  alternating    ", log_moment_gamma_pi_form(40, 1e-3))
print("  quad           ", brute_force(40, 1e-3))

# Gamma(n + 1/2) / Gamma(n) is the mean of sqrt(X); it behaves like sqrt(n - 1/4).
for n in (1, 10, 100, 10 ** 6):
    print(f"Gamma({n}+1/2)/Gamma({n}) = {gamma_ratio_half(n):.10f}   sqrt(n-1/4) = {math.sqrt(n - 0.25):.10f}")
