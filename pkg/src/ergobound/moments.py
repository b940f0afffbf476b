"""First and second moments of the effective coefficients.

:func:`analytic_moments` gives the closed forms available under perfect CSI,
:func:`empirical_moments` estimates the same quantities from a sample stream,
and :func:`conditional_interference` provides the conditional interference
power ``E[sum_{k' != k} |g_{k,k'}|^2 | |g_{k,k}|]`` needed by LB3.

The side-information providers at the bottom produce per-draw conditional
moments for the ``lb*_cond`` bounds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel_sim import CSIModel, EffectiveChannel, Precoding, SystemConfig
from .special_math import gamma_ratio_half

__all__ = [
    "MIN_SAMPLES",
    "MIN_SAMPLES_PER_BIN",
    "DEFAULT_BINS",
    "InsufficientSamplesError",
    "UnsupportedConfigurationError",
    "MomentSource",
    "MomentSet",
    "MomentAccumulator",
    "CurveKind",
    "ConditionalMomentCurve",
    "analytic_moments",
    "empirical_moments",
    "conditional_interference",
    "ConditionalMoments",
    "vacuous_side_info",
    "genie_side_info",
    "gaussian_genie_side_info",
]

MIN_SAMPLES = 1000
MIN_SAMPLES_PER_BIN = 100
DEFAULT_BINS = 50


class InsufficientSamplesError(ValueError):
    pass


class UnsupportedConfigurationError(ValueError):
    pass


class MomentSource(str, enum.Enum):
    ANALYTIC = "Analytic"
    EMPIRICAL = "Empirical"


@dataclass(frozen=True)
class MomentSet:
    """Moments of ``g_{k,k'}`` for a reference user ``k``.

    ``pow_cross`` and ``var_cross`` have length ``K``; their entry at
    ``user_index`` repeats ``pow_gkk`` / ``var_gkk``.  The ``*_se`` fields hold
    standard errors for empirical sets and zeros for analytic ones.
    """

    mean_gkk: complex
    pow_gkk: float
    var_gkk: float
    pow_cross: np.ndarray
    var_cross: np.ndarray
    source: MomentSource
    n_samples: int = 0
    user_index: int = 0
    mean_gkk_se: float = 0.0
    pow_gkk_se: float = 0.0
    var_gkk_se: float = 0.0
    pow_cross_se: Optional[np.ndarray] = None
    var_cross_se: Optional[np.ndarray] = None

    @property
    def K(self) -> int:
        return len(self.pow_cross)

    @property
    def interference_power(self) -> float:
        """``sum_{k' != k} E[|g_{k,k'}|^2]``."""
        return float(np.sum(np.delete(self.pow_cross, self.user_index)))


def analytic_moments(cfg: SystemConfig, k: int = 0) -> MomentSet:
    """Closed-form moments for i.i.d. Rayleigh fading and perfect CSI.

    ConjBF: ``g_{k,k} = sqrt(etx/K) ||h_k||`` with ``||h_k||^2 ~ Gamma(M, 1)``,
    cross terms have power ``etx/K``.  ZFBF: ``||h_k||^2`` is replaced by a
    ``Gamma(M-K+1, 1)`` variable and the cross terms vanish.
    """
    if cfg.csi is not CSIModel.PERFECT:
        raise UnsupportedConfigurationError(
            "no closed-form moments under PilotMMSE; use empirical_moments")
    scale = cfg.etx / cfg.K
    if cfg.precoder is Precoding.CONJ:
        dof, cross = cfg.M, scale
    else:
        dof, cross = cfg.M - cfg.K + 1, 0.0
    mean = np.sqrt(scale) * gamma_ratio_half(dof)
    power = scale * dof
    var = power - mean * mean
    pow_cross = np.full(cfg.K, cross)
    var_cross = pow_cross.copy()
    pow_cross[k] = power
    var_cross[k] = var
    zeros = np.zeros(cfg.K)
    return MomentSet(complex(mean), float(power), float(var), pow_cross, var_cross,
                     MomentSource.ANALYTIC, user_index=k,
                     pow_cross_se=zeros, var_cross_se=zeros.copy())


class MomentAccumulator:
    """Mergeable running sums for :func:`empirical_moments`.

    Keeps per-coefficient sums of ``g``, ``g^2``, ``|g|^2``, ``g |g|^2`` and
    ``|g|^4``, enough for the means, powers, variances and their standard
    errors.  ``merge`` is associative, so partial accumulators from parallel
    workers can be combined in any grouping.
    """

    def __init__(self, K: int, user_index: int = 0):
        self.K = K
        self.user_index = user_index
        self.n = 0
        self.s1 = np.zeros(K, complex)
        self.s2 = np.zeros(K, complex)
        self.p1 = np.zeros(K)
        self.p1c = np.zeros(K, complex)
        self.p2 = np.zeros(K)

    def update(self, g) -> "MomentAccumulator":
        g = np.asarray(g.g if isinstance(g, EffectiveChannel) else g).reshape(-1, self.K)
        a = g.real ** 2 + g.imag ** 2
        self.n += len(g)
        self.s1 += g.sum(axis=0)
        self.s2 += (g * g).sum(axis=0)
        self.p1 += a.sum(axis=0)
        self.p1c += (g * a).sum(axis=0)
        self.p2 += (a * a).sum(axis=0)
        return self

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        out = MomentAccumulator(self.K, self.user_index)
        out.n = self.n + other.n
        for name in ("s1", "s2", "p1", "p1c", "p2"):
            setattr(out, name, getattr(self, name) + getattr(other, name))
        return out

    def result(self) -> MomentSet:
        n = self.n
        if n < MIN_SAMPLES:
            raise InsufficientSamplesError(f"need at least {MIN_SAMPLES} samples, got {n}")
        mean = self.s1 / n
        e_g2 = self.s2 / n
        power = self.p1 / n
        e_ga = self.p1c / n
        e_a2 = self.p2 / n
        abs_mean2 = mean.real ** 2 + mean.imag ** 2
        var = np.maximum(n / (n - 1) * (power - abs_mean2), 0.0)

        # Standard error of the complex mean: sqrt(E|m_hat - m|^2).
        mean_se = np.sqrt(var / n)
        power_se = np.sqrt(np.maximum(e_a2 - power ** 2, 0.0) / n)
        # |g - m|^2 = |g|^2 - 2 Re(conj(m) g) + |m|^2; its variance from raw moments.
        e_re = (np.conj(mean) * mean).real
        e_re2 = 0.5 * (abs_mean2 * power + (np.conj(mean) ** 2 * e_g2).real)
        e_a_re = (np.conj(mean) * e_ga).real
        second = e_a2 - 4 * e_a_re + 4 * e_re2 + abs_mean2 ** 2 + 2 * abs_mean2 * power - 4 * abs_mean2 * e_re
        var_se = np.sqrt(np.maximum(second - (power - abs_mean2) ** 2, 0.0) / n)

        k = self.user_index
        return MomentSet(complex(mean[k]), float(power[k]), float(var[k]), power, var,
                         MomentSource.EMPIRICAL, n_samples=n, user_index=k,
                         mean_gkk_se=float(mean_se[k]), pow_gkk_se=float(power_se[k]),
                         var_gkk_se=float(var_se[k]), pow_cross_se=power_se, var_cross_se=var_se)


def empirical_moments(samples: EffectiveChannel) -> MomentSet:
    """Sample moments with the unbiased ``1/(n-1)`` variance estimator."""
    acc = MomentAccumulator(samples.K, samples.user_index)
    return acc.update(samples).result()


class CurveKind(str, enum.Enum):
    ANALYTIC_CONJ = "AnalyticConjBF"
    ANALYTIC_ZERO = "AnalyticZero"
    BINNED = "Binned"


@dataclass(frozen=True)
class ConditionalMomentCurve:
    """``E[sum_{k' != k} |g_{k,k'}|^2 | |g_{k,k}|]`` as a callable.

    For ``Binned`` curves the lookup is piecewise constant over quantile bins
    with interior ``edges``; values outside the sampled range are clamped to
    the first/last bin.
    """

    abscissae: np.ndarray
    values: np.ndarray
    kind: CurveKind
    slope: float = 0.0
    edges: np.ndarray = field(default_factory=lambda: np.empty(0))
    stderr: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __call__(self, abs_gkk) -> np.ndarray:
        x = np.asarray(abs_gkk, dtype=float)
        if self.kind is CurveKind.ANALYTIC_ZERO:
            return np.zeros_like(x)
        if self.kind is CurveKind.ANALYTIC_CONJ:
            return self.slope * x * x
        return self.values[np.searchsorted(self.edges, x, side="right")]

    def compatible_with(self, cfg: Optional[SystemConfig]) -> bool:
        if cfg is None or self.kind is CurveKind.BINNED:
            return True
        if cfg.csi is not CSIModel.PERFECT:
            return False
        want = CurveKind.ANALYTIC_CONJ if cfg.precoder is Precoding.CONJ else CurveKind.ANALYTIC_ZERO
        return self.kind is want


def _grid(abs_gkk: Optional[np.ndarray], bins: int) -> np.ndarray:
    if abs_gkk is None or len(abs_gkk) == 0:
        return np.empty(0)
    return np.unique(np.quantile(abs_gkk, (np.arange(bins) + 0.5) / bins))


def conditional_interference(cfg: SystemConfig, samples: Optional[EffectiveChannel] = None,
                             bins: int = DEFAULT_BINS, force_binned: bool = False
                             ) -> ConditionalMomentCurve:
    """Conditional interference power given the useful-coefficient magnitude.

    Perfect CSI uses the exact laws: for ConjBF each interferer carries
    ``|g_{k,k}|^2 / M`` on average (``|u^H v|^2 ~ Beta(1, M-1)``), for ZFBF the
    interference is zero.  Otherwise, or with ``force_binned``, the curve is
    estimated from ``samples`` with ``bins`` equal-probability bins.
    """
    abs_gkk = None if samples is None else np.abs(samples.useful())
    if cfg.csi is CSIModel.PERFECT and not force_binned:
        grid = _grid(abs_gkk, bins)
        if cfg.precoder is Precoding.CONJ:
            slope = (cfg.K - 1) / cfg.M
            return ConditionalMomentCurve(grid, slope * grid ** 2, CurveKind.ANALYTIC_CONJ, slope=slope)
        return ConditionalMomentCurve(grid, np.zeros_like(grid), CurveKind.ANALYTIC_ZERO)

    if samples is None:
        raise InsufficientSamplesError("a binned curve needs samples")
    n = len(abs_gkk)
    if n < bins * MIN_SAMPLES_PER_BIN:
        raise InsufficientSamplesError(
            f"{bins} bins need at least {bins * MIN_SAMPLES_PER_BIN} samples, got {n}")
    order = np.argsort(abs_gkk, kind="stable")
    x = abs_gkk[order]
    y = samples.interference_power()[order]
    splits = np.linspace(0, n, bins + 1).round().astype(int)
    centers = np.array([x[a:b].mean() for a, b in zip(splits[:-1], splits[1:])])
    values = np.array([y[a:b].mean() for a, b in zip(splits[:-1], splits[1:])])
    se = np.array([y[a:b].std(ddof=1) / np.sqrt(b - a) for a, b in zip(splits[:-1], splits[1:])])
    # Interior edges halfway between neighbouring bins' extreme samples.
    edges = 0.5 * (x[splits[1:-1] - 1] + x[splits[1:-1]])
    return ConditionalMomentCurve(centers, values, CurveKind.BINNED, edges=edges, stderr=se)


@dataclass(frozen=True)
class ConditionalMoments:
    """Per-draw moments conditional on receiver side information ``Omega``.

    Arrays have a leading axis of length ``n`` (one entry per Monte-Carlo
    draw) or 1, in which case they broadcast over all draws.

    mean_gkk : ``E[g_{k,k} | Omega]``
    var_cross : ``Var(g_{k,k'} | Omega)`` for all ``k'`` (entry ``k`` is the
        useful coefficient), shape ``(n, K)``
    pow_cross : ``E[|g_{k,k'}|^2 | Omega]``, shape ``(n, K)``
    interference_given_gkk : ``sum_{k' != k} E[|g_{k,k'}|^2 | g_{k,k}, Omega]``
        (needed by LB3 only)
    """

    mean_gkk: np.ndarray
    var_cross: np.ndarray
    pow_cross: np.ndarray
    interference_given_gkk: Optional[np.ndarray] = None
    user_index: int = 0

    @property
    def n(self) -> int:
        return len(self.mean_gkk)

    @property
    def var_gkk(self) -> np.ndarray:
        return self.var_cross[:, self.user_index]

    @property
    def interference_power(self) -> np.ndarray:
        return np.delete(self.pow_cross, self.user_index, axis=1).sum(axis=1)


def vacuous_side_info(m: MomentSet, curve: Optional[ConditionalMomentCurve] = None,
                      samples: Optional[EffectiveChannel] = None) -> ConditionalMoments:
    """Side information independent of everything: conditional = unconditional."""
    cond_int = None
    if curve is not None and samples is not None:
        cond_int = curve(np.abs(samples.useful()))
    return ConditionalMoments(np.array([m.mean_gkk]), m.var_cross[None, :].copy(),
                              m.pow_cross[None, :].copy(), cond_int, m.user_index)


def genie_side_info(samples: EffectiveChannel, curve: ConditionalMomentCurve) -> ConditionalMoments:
    """``Omega = g_{k,k}``: the useful coefficient is known exactly.

    Cross coefficients are taken conditionally zero-mean (rotational
    symmetry of the i.i.d. model) and share the conditional interference
    power equally.
    """
    gkk = samples.useful()
    K, k = samples.K, samples.user_index
    inter = curve(np.abs(gkk))
    per = inter / max(K - 1, 1)
    pow_cross = np.repeat(per[:, None], K, axis=1)
    pow_cross[:, k] = np.abs(gkk) ** 2
    var_cross = pow_cross.copy()
    var_cross[:, k] = 0.0
    return ConditionalMoments(gkk.copy(), var_cross, pow_cross, inter, k)


def gaussian_genie_side_info(cfg: SystemConfig, samples: EffectiveChannel, sigma2: float,
                             rng: np.random.Generator, nodes: int = 2000) -> ConditionalMoments:
    """Noisy genie ``Omega = g_{k,k} + CN(0, sigma2)`` for ConjBF with perfect CSI.

    The posterior of ``g_{k,k} = sqrt(etx/K) sqrt(X)``, ``X ~ Gamma(M, 1)``, is
    integrated for every draw with the trapezoid rule on ``nodes`` equally
    spaced points covering the prior mass of ``X`` up to 1e-12 in each tail.
    The grid spacing limits the resolution once ``sigma2`` drops well below
    ``etx/K`` times the spacing.
    """
    if cfg.precoder is not Precoding.CONJ or cfg.csi is not CSIModel.PERFECT:
        raise UnsupportedConfigurationError("gaussian genie demo supports ConjBF with perfect CSI only")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    from scipy.stats import gamma

    gkk = samples.useful()
    n, K, k = len(gkk), samples.K, samples.user_index
    omega = gkk + np.sqrt(sigma2 / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    x = np.linspace(gamma.ppf(1e-12, cfg.M), gamma.isf(1e-12, cfg.M), nodes)
    prior = gamma.pdf(x, cfg.M)
    prior[[0, -1]] *= 0.5
    amp = np.sqrt(cfg.etx / cfg.K * x)
    mean = np.empty(n)
    second = np.empty(n)
    for lo in range(0, n, 4096):
        om = omega[lo:lo + 4096, None]
        # Posterior weights on the grid; the log-likelihood is shifted per row.
        loglik = -np.abs(om - amp[None, :]) ** 2 / sigma2
        loglik -= loglik.max(axis=1, keepdims=True)
        w = prior[None, :] * np.exp(loglik)
        w /= w.sum(axis=1, keepdims=True)
        mean[lo:lo + 4096] = w @ amp
        second[lo:lo + 4096] = w @ (amp * amp)
    slope = (cfg.K - 1) / cfg.M
    inter_given_omega = slope * second
    pow_cross = np.repeat((inter_given_omega / max(K - 1, 1))[:, None], K, axis=1)
    pow_cross[:, k] = second
    var_cross = pow_cross.copy()
    var_cross[:, k] = np.maximum(second - mean * mean, 0.0)
    inter_given_gkk = slope * np.abs(gkk) ** 2
    return ConditionalMoments(mean.astype(complex), var_cross, pow_cross, inter_given_gkk, k)
