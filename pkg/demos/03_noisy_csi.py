"""
Pilot-based channel estimates
=============================

With TDD reciprocity the base station estimates H from uplink pilots by
linear MMSE, H_hat = rho / (1 + rho) (H + W / sqrt(rho)), and precodes with
the estimate.  The effective coefficients are formed with the true channel,
so the estimation error turns into self-interference and leakage.
"""

import numpy as np

from ergobound import bounds as bd
from ergobound import channel_sim as cs
from ergobound.moments import conditional_interference, empirical_moments

rng = cs.block_rng(seed=3, block=0)
cfg = cs.SystemConfig(M=10, K=5, etx=10.0, csi=cs.CSIModel.PILOT_MMSE)

# The estimate and the error are uncorrelated; their powers split as
# rho/(1+rho) and 1/(1+rho).
h = cs.draw_channel(cfg, rng, batch=(20_000,))
h_hat = cs.estimate_channel(h, cfg, rng)
err = h.entries - h_hat.entries
print("E|h_hat|^2 =", np.mean(np.abs(h_hat.entries) ** 2), " expected", 10 / 11)
print("E|e|^2     =", np.mean(np.abs(err) ** 2), " expected", 1 / 11)
print("|E h_hat e*| =", abs(np.mean(h_hat.entries * err.conj())))

# Bounds for both precoders at a few SNRs.  For noisy CSI the conditional
# interference E[sum |g_kk'|^2 | |g_kk|] has no closed form and is estimated
# with 50 equal-probability bins.
for precoder in (cs.Precoding.CONJ, cs.Precoding.ZF):
    print(f"\n{precoder.value}, PilotMMSE (per user, bits)")
    base = cs.SystemConfig(M=10, K=5, precoder=precoder, csi=cs.CSIModel.PILOT_MMSE, seed=3)
    dbs = [0, 10, 20, 30]
    streams = cs.simulate_snr_grid(base, [10 ** (d / 10) for d in dbs], samples=50_000, workers=4)
    for db, s in zip(dbs, streams):
        c = s.cfg
        m = empirical_moments(s)
        ub = bd.ub_monte_carlo(s, c.n0)
        lb1 = bd.lb1_from_moments(m, c.n0)
        lb2 = bd.lb2(ub, m, c.T, c.n0)
        lb3 = bd.lb3(s, m, conditional_interference(c, s), c.T, c.n0)
        print(f"  {db:2d} dB  UB {ub.rate:.3f}  LB1 {lb1.rate:.3f}  LB2 {lb2.rate:.3f}  LB3 {lb3.rate:.3f}"
              f"   Var(g_kk) {m.var_gkk:.3f}")

# Higher pilot power than data power improves the estimate at fixed data SNR.
for pilot_db in (0, 10, 20):
    c = cs.SystemConfig(M=10, K=5, etx=10.0, precoder=cs.Precoding.ZF, csi=cs.CSIModel.PILOT_MMSE,
                        pilot_snr=10 ** (pilot_db / 10), seed=3)
    s = cs.simulate(c, samples=20_000)
    print(f"pilot SNR {pilot_db:2d} dB, data 10 dB: UB = {bd.ub_monte_carlo(s, c.n0).rate:.3f} bits/user")
