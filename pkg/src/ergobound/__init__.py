"""Upper and lower bounds on the ergodic per-user rate of multiuser MIMO downlink
with conjugate or zero-forcing beamforming.

Modules
-------
special_math  log-moments of Gamma variables, exponential integrals
channel_sim   Rayleigh channels, MMSE pilots, precoders, effective coefficients
moments       analytic/empirical moments and conditional interference curves
bounds        UB, LB1, LB2, LB3 and their side-information variants
experiment    SNR sweeps, CSV/SVG output, config files
"""

from .bounds import (
    BoundId,
    BoundResult,
    Method,
    lb1_cond,
    lb1_from_moments,
    lb2,
    lb2_cond,
    lb3,
    lb3_cond,
    lb3_term1_conj_closed_form,
    ub_monte_carlo,
    ub_zf_closed_form,
)
from .channel_sim import CSIModel, EffectiveChannel, Precoding, SystemConfig, simulate, simulate_snr_grid
from .experiment import SweepSpec, run_sweep
from .moments import analytic_moments, conditional_interference, empirical_moments
from .special_math import exp_int, gamma_ratio_half, log_moment_gamma, pi_poly

__version__ = "0.1.0"

__all__ = [
    "BoundId", "BoundResult", "Method", "ub_monte_carlo", "lb1_from_moments", "lb2", "lb3",
    "ub_zf_closed_form", "lb3_term1_conj_closed_form", "lb1_cond", "lb2_cond", "lb3_cond",
    "CSIModel", "EffectiveChannel", "Precoding", "SystemConfig", "simulate", "simulate_snr_grid",
    "SweepSpec", "run_sweep", "analytic_moments", "conditional_interference", "empirical_moments",
    "exp_int", "gamma_ratio_half", "log_moment_gamma", "pi_poly",
]
