"""Ergodic per-user rate bounds, in bits per channel use.

``ub_monte_carlo``  genie upper bound ``E[log2(1 + SINR)]``
``lb1_from_moments``  the classical moment bound (mean as useful signal,
    everything else as uncorrelated noise)
``lb2``  upper bound minus the price of not knowing the coefficients over a
    block of ``T`` channel uses
``lb3``  conditional-power bound that stays meaningful as ``n0 -> 0``

The conditional variants ``lb*_cond`` take per-draw moments from a
side-information provider (see :mod:`ergobound.moments`).  Special functions
work in nats; :data:`LOG2E` is the single nats-to-bits conversion.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel_sim import CSIModel, EffectiveChannel, Precoding, SystemConfig
from .moments import (
    MIN_SAMPLES,
    ConditionalMomentCurve,
    ConditionalMoments,
    InsufficientSamplesError,
    MomentSet,
    MomentSource,
    analytic_moments,
)
from .special_math import log_moment_gamma

__all__ = [
    "LOG2E",
    "BoundId",
    "Method",
    "BoundResult",
    "ClosedFormParams",
    "ConfigMismatchError",
    "CurveMismatchError",
    "closed_form_params",
    "ub_monte_carlo",
    "lb1_from_moments",
    "lb2_penalty",
    "lb2",
    "lb3",
    "ub_zf_closed_form",
    "lb3_term1_conj_closed_form",
    "lb3_zf_closed_form",
    "lb1_cond",
    "lb2_cond",
    "lb3_cond",
]

LOG2E = 1.0 / math.log(2.0)


class BoundId(str, enum.Enum):
    UB = "UB"
    LB1 = "LB1"
    LB2 = "LB2"
    LB3 = "LB3"


class Method(str, enum.Enum):
    CLOSED_FORM = "ClosedForm"
    MONTE_CARLO = "MonteCarlo"


class ConfigMismatchError(ValueError):
    pass


class CurveMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class BoundResult:
    """Per-user rate in bits/channel use.

    ``terms`` carries the individual contributions of composite bounds
    (e.g. the four LB3 terms and their standard errors) for diagnostics.
    """

    rate: float
    stderr: float
    bound_id: BoundId
    method: Method
    samples: int = 0
    terms: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ClosedFormParams:
    gamma1: float
    gamma2: float
    gamma3: float


def closed_form_params(cfg: SystemConfig) -> ClosedFormParams:
    M, K, snr = cfg.M, cfg.K, cfg.snr
    return ClosedFormParams((M + K - 1) / (M * K) * snr, (K - 1) / (M * K) * snr, snr / K)


def _mean_and_se(x: np.ndarray) -> tuple[float, float]:
    n = len(x)
    return float(np.mean(x)), (float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else 0.0)


def _require(samples: EffectiveChannel, minimum: int = MIN_SAMPLES):
    if samples.n < minimum:
        raise InsufficientSamplesError(f"need at least {minimum} samples, got {samples.n}")


def _sinr_rates(samples: EffectiveChannel, n0: float) -> np.ndarray:
    return np.log2(1.0 + np.abs(samples.useful()) ** 2 / (n0 + samples.interference_power()))


def ub_monte_carlo(samples: EffectiveChannel, n0: float, min_samples: int = MIN_SAMPLES) -> BoundResult:
    """Monte-Carlo ``E[log2(1 + |g_kk|^2 / (n0 + sum_{k'!=k} |g_kk'|^2))]``."""
    _require(samples, min_samples)
    rate, se = _mean_and_se(_sinr_rates(samples, n0))
    return BoundResult(rate, se, BoundId.UB, Method.MONTE_CARLO, samples.n)


def _lb1_rate(mean, var, interference, n0):
    # Shared by lb1_from_moments and lb1_cond so vacuous side information
    # reproduces LB1 bit for bit.
    return np.log2(1.0 + np.abs(mean) ** 2 / (n0 + var + interference))


def lb1_from_moments(m: MomentSet, n0: float) -> BoundResult:
    rate = float(_lb1_rate(np.complex128(m.mean_gkk), m.var_gkk, m.interference_power, n0))
    method = Method.CLOSED_FORM if m.source is MomentSource.ANALYTIC else Method.MONTE_CARLO
    return BoundResult(rate, 0.0, BoundId.LB1, method, m.n_samples)


def lb2_penalty(var_cross, T: int, n0: float) -> float:
    """``(1/T) sum_k' log2(1 + T Var(g_kk') / n0)`` over all ``K`` coefficients."""
    v = np.asarray(var_cross, dtype=float)
    return float(np.sum(np.log2(1.0 + T * v / n0)) / T)


def lb2(ub: BoundResult, m: MomentSet, T: int, n0: float) -> BoundResult:
    if ub.bound_id is not BoundId.UB:
        raise ValueError("lb2 needs an upper-bound result as its first term")
    if T < 1:
        raise ValueError("T must be >= 1")
    penalty = lb2_penalty(m.var_cross, T, n0)
    method = ub.method if m.source is MomentSource.ANALYTIC else Method.MONTE_CARLO
    return BoundResult(ub.rate - penalty, ub.stderr, BoundId.LB2, method, ub.samples,
                       terms={"ub": ub.rate, "penalty": penalty})


def lb3(samples: EffectiveChannel, m: MomentSet, curve: ConditionalMomentCurve,
        T: int, n0: float, term1_closed: Optional[float] = None,
        min_samples: int = MIN_SAMPLES) -> BoundResult:
    """Four-term LB3.

    term1 = E[log2(1 + |g_kk|^2 / (n0 + curve(|g_kk|)))]
    term2 = (1/T) log2(1 + T Var(g_kk) / (n0 + sum E|g_kk'|^2))
    term3 = E[log2(1 + sum_{k'!=k} |g_kk'|^2 / n0)]
    term4 = log2(1 + sum_{k'!=k} E|g_kk'|^2 / n0)

    Terms 1 and 3 are averaged on the same draws and the standard error is
    taken on their per-draw sum.  ``term1_closed`` replaces the Monte-Carlo
    term 1 by a closed-form value.
    """
    _require(samples, min_samples)
    if not curve.compatible_with(samples.cfg):
        raise CurveMismatchError(f"{curve.kind.value} curve does not match the sample configuration")
    interference = m.interference_power
    if term1_closed is None:
        t1 = np.log2(1.0 + np.abs(samples.useful()) ** 2 / (n0 + curve(np.abs(samples.useful()))))
    else:
        t1 = np.full(samples.n, float(term1_closed))
    t3 = np.log2(1.0 + samples.interference_power() / n0)
    term2 = float(np.log2(1.0 + T * m.var_gkk / (n0 + interference)) / T)
    term4 = float(np.log2(1.0 + interference / n0))
    combined, se = _mean_and_se(t1 + t3)
    term1, term1_se = (float(term1_closed), 0.0) if term1_closed is not None else _mean_and_se(t1)
    term3, term3_se = _mean_and_se(t3)
    rate = combined - term2 - term4
    terms = {"term1": term1, "term2": term2, "term3": term3, "term4": term4,
             "term1_se": term1_se, "term3_se": term3_se}
    return BoundResult(rate, se, BoundId.LB3, Method.MONTE_CARLO, samples.n, terms)


def _require_perfect(cfg: SystemConfig, precoder: Precoding):
    if cfg.precoder is not precoder or cfg.csi is not CSIModel.PERFECT:
        raise ConfigMismatchError(
            f"closed form needs precoder={precoder.value}, csi=Perfect "
            f"(got {cfg.precoder.value}, {cfg.csi.value})")


def ub_zf_closed_form(cfg: SystemConfig) -> BoundResult:
    """ZFBF with perfect CSI: ``I_{M-K+1}(snr/K) log2(e)``."""
    _require_perfect(cfg, Precoding.ZF)
    rate = log_moment_gamma(cfg.M - cfg.K + 1, closed_form_params(cfg).gamma3) * LOG2E
    return BoundResult(rate, 0.0, BoundId.UB, Method.CLOSED_FORM)


def lb3_term1_conj_closed_form(cfg: SystemConfig) -> float:
    """ConjBF with perfect CSI: ``(I_M(gamma1) - I_M(gamma2)) log2(e)``.

    Equals LB3's first term and is also a lower bound on the UB.
    """
    _require_perfect(cfg, Precoding.CONJ)
    p = closed_form_params(cfg)
    return (log_moment_gamma(cfg.M, p.gamma1) - log_moment_gamma(cfg.M, p.gamma2)) * LOG2E


def lb3_zf_closed_form(cfg: SystemConfig) -> BoundResult:
    """ZFBF with perfect CSI: interference vanishes, LB3 = UB - term2."""
    ub = ub_zf_closed_form(cfg)
    m = analytic_moments(cfg)
    term2 = math.log2(1.0 + cfg.T * m.var_gkk / cfg.n0) / cfg.T
    return BoundResult(ub.rate - term2, 0.0, BoundId.LB3, Method.CLOSED_FORM,
                       terms={"term1": ub.rate, "term2": term2, "term3": 0.0, "term4": 0.0})


def _check_cond(cond: ConditionalMoments, K: int, n: Optional[int] = None):
    shapes_ok = cond.var_cross.shape[-1] == K and cond.pow_cross.shape[-1] == K
    if n is not None:
        shapes_ok &= cond.n in (1, n)
    if not shapes_ok:
        raise ValueError("side-information provider dimensions do not match the samples")


def lb1_cond(cond: ConditionalMoments, n0: float) -> BoundResult:
    """LB1 with every moment conditioned on the side information, averaged."""
    _check_cond(cond, cond.pow_cross.shape[-1])
    rate = _lb1_rate(cond.mean_gkk, cond.var_gkk, cond.interference_power, n0)
    mean, se = _mean_and_se(rate)
    return BoundResult(mean, se, BoundId.LB1, Method.MONTE_CARLO, cond.n)


def lb2_cond(ub: BoundResult, cond: ConditionalMoments, T: int, n0: float) -> BoundResult:
    if ub.bound_id is not BoundId.UB:
        raise ValueError("lb2_cond needs an upper-bound result as its first term")
    _check_cond(cond, cond.var_cross.shape[-1])
    per_draw = np.log2(1.0 + T * cond.var_cross / n0).sum(axis=1) / T
    penalty, se = _mean_and_se(per_draw)
    return BoundResult(ub.rate - penalty, math.hypot(ub.stderr, se), BoundId.LB2,
                       Method.MONTE_CARLO, ub.samples, terms={"ub": ub.rate, "penalty": penalty})


def lb3_cond(samples: EffectiveChannel, cond: ConditionalMoments, T: int, n0: float,
             min_samples: int = MIN_SAMPLES) -> BoundResult:
    _require(samples, min_samples)
    _check_cond(cond, samples.K, samples.n)
    if cond.interference_given_gkk is None:
        raise ValueError("lb3_cond needs E[interference | g_kk, Omega] from the provider")
    t1 = np.log2(1.0 + np.abs(samples.useful()) ** 2 / (n0 + cond.interference_given_gkk))
    t3 = np.log2(1.0 + samples.interference_power() / n0)
    inter = cond.interference_power
    t2 = np.log2(1.0 + T * cond.var_gkk / (n0 + inter)) / T
    t4 = np.log2(1.0 + inter / n0)
    combined, se = _mean_and_se(t1 + t3)
    term2, se2 = _mean_and_se(t2)
    term4, se4 = _mean_and_se(t4)
    rate = combined - term2 - term4
    terms = {"term1": float(np.mean(t1)), "term2": term2, "term3": float(np.mean(t3)), "term4": term4}
    return BoundResult(rate, math.sqrt(se ** 2 + se2 ** 2 + se4 ** 2), BoundId.LB3,
                       Method.MONTE_CARLO, samples.n, terms)
