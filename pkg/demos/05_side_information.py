"""
Side information at the receiver
================================

The conditional bounds replace every moment by its value conditioned on
some side information Omega the user has, then average over Omega.  Three
providers are compared for conjugate beamforming with perfect CSI:

* vacuous: Omega independent of everything, reproduces the plain bounds;
* genie: Omega = g_kk, the useful coefficient is known exactly;
* Gaussian genie: Omega = g_kk + CN(0, sigma2), a noisy version in between.
"""

import numpy as np

from ergobound import bounds as bd
from ergobound import channel_sim as cs
from ergobound.moments import (
    analytic_moments,
    conditional_interference,
    gaussian_genie_side_info,
    genie_side_info,
    vacuous_side_info,
)

cfg = cs.SystemConfig(M=10, K=5, etx=100.0, seed=5)  # 20 dB
s = cs.simulate(cfg, samples=20_000)
m = analytic_moments(cfg)
curve = conditional_interference(cfg)

plain = bd.lb1_from_moments(m, cfg.n0)
vac = bd.lb1_cond(vacuous_side_info(m, curve, s), cfg.n0)
print(f"LB1 plain {plain.rate:.4f}   vacuous side info {vac.rate:.4f}")

genie = bd.lb1_cond(genie_side_info(s, curve), cfg.n0)
print(f"LB1 with g_kk known: {genie.rate:.4f} +- {genie.stderr:.4f}")

rng = np.random.default_rng(5)
for sigma2 in (100.0, 10.0, 1.0, 0.1, 0.01):
    r = bd.lb1_cond(gaussian_genie_side_info(cfg, s, sigma2, rng), cfg.n0)
    print(f"  noisy genie sigma2 = {sigma2:6g}: LB1 {r.rate:.4f} +- {r.stderr:.4f}")

ub = bd.ub_monte_carlo(s, cfg.n0)
print(f"UB {ub.rate:.4f}")
# The noisy genie interpolates between the plain LB1 (sigma2 large) and the
# genie value (sigma2 -> 0), which in turn sits below UB.
