"""Monte-Carlo engine: channel draws, CSI, precoders and effective coefficients.

Every operation accepts arrays with arbitrary leading batch dimensions; a
channel matrix has trailing shape ``(M, K)`` with column ``k`` the channel of
user ``k``.

Random numbers are organised in fixed blocks of :data:`BLOCK_SIZE` samples.
Block ``b`` of a run with seed ``s`` draws from a generator seeded with
``SeedSequence(s, spawn_key=(b,))``, so sample ``i`` only depends on
``(s, i)``; how blocks are distributed over workers never changes a bit.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "BLOCK_SIZE",
    "ZF_COND_LIMIT",
    "GRAM_INVERSE_MAX_K",
    "SINGULAR_RATE_LIMIT",
    "Precoding",
    "CSIModel",
    "SystemConfig",
    "ChannelMatrix",
    "Precoder",
    "EffectiveChannel",
    "DegenerateChannelError",
    "SingularChannelError",
    "block_rng",
    "draw_channel",
    "estimate_channel",
    "precode_conj",
    "precode_zf",
    "precode",
    "effective_coefficients",
    "simulate",
    "simulate_snr_grid",
]

BLOCK_SIZE = 1024
ZF_COND_LIMIT = 1e12
GRAM_INVERSE_MAX_K = 32
#: Fraction of singular ZF draws above which a run is declared failed.
SINGULAR_RATE_LIMIT = 1e-4


class Precoding(str, enum.Enum):
    CONJ = "ConjBF"
    ZF = "ZFBF"


class CSIModel(str, enum.Enum):
    PERFECT = "Perfect"
    PILOT_MMSE = "PilotMMSE"


class DegenerateChannelError(ValueError):
    """A channel column is numerically zero and cannot be normalized."""


class SingularChannelError(ArithmeticError):
    """The Gram matrix of the channel estimate is (numerically) singular."""

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class SystemConfig:
    """Scenario parameters.

    ``etx`` is the total transmit energy per channel use and ``n0`` the noise
    level; the SNR is always derived from the two.  ``pilot_snr`` decouples
    the uplink-pilot SNR from the data SNR; ``None`` means they are equal.
    """

    M: int
    K: int
    T: int = 168
    etx: float = 1.0
    n0: float = 1.0
    precoder: Precoding = Precoding.CONJ
    csi: CSIModel = CSIModel.PERFECT
    seed: int = 0
    samples: int = 100_000
    pilot_snr: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "precoder", Precoding(self.precoder))
        object.__setattr__(self, "csi", CSIModel(self.csi))
        for name in ("M", "K", "T", "samples"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not (self.etx > 0 and self.n0 > 0):
            raise ValueError("etx and n0 must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.pilot_snr is not None and not self.pilot_snr > 0:
            raise ValueError("pilot_snr must be positive")
        if self.precoder is Precoding.ZF and self.M < self.K:
            raise ValueError(f"ZFBF requires M >= K (got M={self.M}, K={self.K})")

    @property
    def snr(self) -> float:
        return self.etx / self.n0

    @property
    def snr_db(self) -> float:
        return 10.0 * np.log10(self.snr)

    @property
    def pilot_snr_value(self) -> float:
        return self.snr if self.pilot_snr is None else self.pilot_snr

    def with_snr(self, snr: float) -> "SystemConfig":
        """Same scenario at a different SNR; ``n0`` is kept fixed."""
        return replace(self, etx=float(snr) * self.n0)


@dataclass(frozen=True)
class ChannelMatrix:
    entries: np.ndarray

    @property
    def shape(self):
        return self.entries.shape[-2:]

    def check(self, cfg: SystemConfig) -> "ChannelMatrix":
        if self.shape != (cfg.M, cfg.K):
            raise ValueError(f"channel has shape {self.shape}, config wants {(cfg.M, cfg.K)}")
        return self


@dataclass(frozen=True)
class Precoder:
    vectors: np.ndarray
    energies: np.ndarray


@dataclass(frozen=True)
class EffectiveChannel:
    """Effective coefficients ``g[..., k']`` seen by user ``user_index``.

    ``g`` has shape ``(K,)`` for one draw or ``(n, K)`` for a sample stream.
    """

    g: np.ndarray
    user_index: int = 0
    cfg: Optional[SystemConfig] = None
    n_singular: int = 0

    @property
    def n(self) -> int:
        return int(np.prod(self.g.shape[:-1], dtype=np.int64))

    @property
    def K(self) -> int:
        return self.g.shape[-1]

    def useful(self) -> np.ndarray:
        """``g_{k,k}`` for every draw."""
        return self.g.reshape(-1, self.K)[:, self.user_index]

    def cross(self) -> np.ndarray:
        """``g_{k,k'}`` for ``k' != k``, shape ``(n, K - 1)``."""
        g = self.g.reshape(-1, self.K)
        return np.delete(g, self.user_index, axis=1)

    def interference_power(self) -> np.ndarray:
        """``sum_{k' != k} |g_{k,k'}|^2`` for every draw."""
        c = self.cross()
        return np.einsum("ij,ij->i", c.real, c.real) + np.einsum("ij,ij->i", c.imag, c.imag)


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Independent generator for sample block ``block`` of a run."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _crandn(rng: np.random.Generator, shape) -> np.ndarray:
    # Unit-variance circularly-symmetric complex Gaussians.
    x = rng.standard_normal((*shape, 2))
    return x.view(np.complex128)[..., 0] * np.sqrt(0.5)


def draw_channel(cfg: SystemConfig, rng: np.random.Generator, batch: tuple = ()) -> ChannelMatrix:
    """I.i.d. CN(0, 1) channel matrix of shape ``(*batch, M, K)``."""
    return ChannelMatrix(_crandn(rng, (*batch, cfg.M, cfg.K)))


def _mmse_estimate(h: np.ndarray, w: np.ndarray, rho: float) -> np.ndarray:
    return (rho / (1.0 + rho)) * (h + w / np.sqrt(rho))


def estimate_channel(h_true: ChannelMatrix, cfg: SystemConfig, rng: np.random.Generator) -> ChannelMatrix:
    """Linear MMSE estimate from orthogonal uplink pilots at the pilot SNR.

    ``H_hat = rho / (1 + rho) * (H + W / sqrt(rho))`` with ``W`` i.i.d. CN(0, 1).
    """
    if cfg.csi is not CSIModel.PILOT_MMSE:
        raise ValueError("estimate_channel requires csi=PilotMMSE")
    w = _crandn(rng, h_true.entries.shape)
    return ChannelMatrix(_mmse_estimate(h_true.entries, w, cfg.pilot_snr_value))


def _equal_energies(cfg: SystemConfig) -> np.ndarray:
    return np.full(cfg.K, cfg.etx / cfg.K)


def _conj_vectors(h: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(h, axis=-2, keepdims=True)
    if np.any(norms < 1e-300):
        raise DegenerateChannelError("channel column with zero norm; resample upstream")
    return h / norms


def precode_conj(h_hat: ChannelMatrix, cfg: SystemConfig) -> Precoder:
    """Conjugate beamforming: ``v_k = h_k / ||h_k||``, equal energies."""
    return Precoder(_conj_vectors(h_hat.entries), _equal_energies(cfg))


def _gram_inverse(h: np.ndarray):
    # Batched (H^H H)^{-1} with a 1-norm condition estimate per draw; singular
    # draws get an identity placeholder and cond = inf.
    K = h.shape[-1]
    gram = np.swapaxes(h.conj(), -1, -2) @ h
    try:
        ginv = np.linalg.inv(gram)
    except np.linalg.LinAlgError:
        ginv = np.empty_like(gram)
        for idx in np.ndindex(gram.shape[:-2]):
            try:
                ginv[idx] = np.linalg.inv(gram[idx])
            except np.linalg.LinAlgError:
                ginv[idx] = np.nan
    with np.errstate(invalid="ignore", over="ignore"):
        cond = np.abs(gram).sum(axis=-2).max(axis=-1) * np.abs(ginv).sum(axis=-2).max(axis=-1)
    cond = np.where(np.isfinite(cond), cond, np.inf)
    bad = ~(cond < ZF_COND_LIMIT)
    if np.any(bad):
        ginv[bad] = np.eye(K)
    return gram, ginv, cond, bad


def _zf_vectors(h: np.ndarray):
    K = h.shape[-1]
    if K <= GRAM_INVERSE_MAX_K:
        _, ginv, cond, bad = _gram_inverse(h)
        v = h @ ginv
    else:
        q, r = np.linalg.qr(h)
        eye = np.broadcast_to(np.eye(K, dtype=h.dtype), r.shape)
        rinv = np.linalg.solve(r, eye)
        with np.errstate(invalid="ignore", over="ignore"):
            cond = (np.abs(r).sum(axis=-2).max(axis=-1) * np.abs(rinv).sum(axis=-2).max(axis=-1)) ** 2
        cond = np.where(np.isfinite(cond), cond, np.inf)
        bad = ~(cond < ZF_COND_LIMIT)
        v = q @ np.swapaxes(rinv.conj(), -1, -2)
        if np.any(bad):
            v[bad] = np.eye(*h.shape[-2:])
    v = v / np.linalg.norm(v, axis=-2, keepdims=True)
    return v, cond, bad


def precode_zf(h_hat: ChannelMatrix, cfg: SystemConfig) -> Precoder:
    """Zero-forcing: normalized columns of ``H (H^H H)^{-1}``.

    Raises
    ------
    SingularChannelError
        If the Gram matrix condition number reaches ``ZF_COND_LIMIT``.
    """
    M, K = h_hat.shape
    if M < K:
        raise SingularChannelError(f"ZFBF requires M >= K (got M={M}, K={K})")
    v, cond, bad = _zf_vectors(h_hat.entries)
    if np.any(bad):
        worst = float(np.max(cond))
        raise SingularChannelError(f"ill-conditioned channel estimate (cond={worst:.3g})", worst)
    return Precoder(v, _equal_energies(cfg))


def precode(h_hat: ChannelMatrix, cfg: SystemConfig) -> Precoder:
    if cfg.precoder is Precoding.ZF:
        return precode_zf(h_hat, cfg)
    return precode_conj(h_hat, cfg)


def effective_coefficients(h_true: ChannelMatrix, p: Precoder, k: int = 0) -> EffectiveChannel:
    """``g[k'] = sqrt(E_k') * h_k^H v_k'`` using the *true* channel of user ``k``."""
    h = h_true.entries
    if h.shape[-2:] != p.vectors.shape[-2:]:
        raise ValueError("channel and precoder dimensions disagree")
    hk = h[..., :, k]
    g = np.einsum("...m,...mj->...j", hk.conj(), p.vectors) * np.sqrt(p.energies)
    return EffectiveChannel(g, user_index=k)


def _block_coefficients(cfg: SystemConfig, hk_conj: np.ndarray, h_hat: np.ndarray):
    # Unit-energy coefficients h_k^H v_k' for one block, without forming V.
    # For ZF, V^H V = (H^H H)^{-1}, so ||v_k'||^2 is a diagonal entry of the inverse.
    c = np.einsum("bm,bmj->bj", hk_conj, h_hat)
    if cfg.precoder is Precoding.CONJ:
        norms = np.sqrt(np.einsum("bmj,bmj->bj", h_hat.real, h_hat.real)
                        + np.einsum("bmj,bmj->bj", h_hat.imag, h_hat.imag))
        if np.any(norms < 1e-300):
            raise DegenerateChannelError("channel column with zero norm")
        return c / norms, np.zeros(len(c), dtype=bool)
    if cfg.K > GRAM_INVERSE_MAX_K:
        v, _, bad = _zf_vectors(h_hat)
        return np.einsum("bm,bmj->bj", hk_conj, v), bad
    _, ginv, _, bad = _gram_inverse(h_hat)
    diag = np.einsum("bjj->bj", ginv).real
    return np.einsum("bj,bjl->bl", c, ginv) / np.sqrt(diag), bad


def _simulate_block(cfg: SystemConfig, snrs: Sequence[float], block: int, k: int):
    rng = block_rng(cfg.seed, block)
    h = _crandn(rng, (BLOCK_SIZE, cfg.M, cfg.K))
    w = _crandn(rng, (BLOCK_SIZE, cfg.M, cfg.K)) if cfg.csi is CSIModel.PILOT_MMSE else None
    hk_conj = h[:, :, k].conj()
    out = []
    unit = None
    for snr in snrs:
        if w is None:
            if unit is None:
                unit = _block_coefficients(cfg, hk_conj, h)
            u, bad = unit
        else:
            rho = snr if cfg.pilot_snr is None else cfg.pilot_snr
            u, bad = _block_coefficients(cfg, hk_conj, _mmse_estimate(h, w, rho))
        out.append((u * np.sqrt(snr * cfg.n0 / cfg.K), bad))
    return out


def simulate_snr_grid(cfg: SystemConfig, snrs: Sequence[float], samples: Optional[int] = None,
                      workers: int = 1, start: int = 0, k: int = 0) -> list[EffectiveChannel]:
    """Effective-coefficient streams for several SNRs on common channel draws.

    Samples ``start .. start + samples`` are produced for every SNR in
    ``snrs``; the channel (and pilot noise) realizations are shared across
    SNR points.  Singular ZF draws are dropped and counted in
    ``EffectiveChannel.n_singular``.

    Raises
    ------
    SingularChannelError
        If more than ``SINGULAR_RATE_LIMIT`` of the draws were singular.
    """
    n = cfg.samples if samples is None else int(samples)
    if n < 1:
        raise ValueError("samples must be positive")
    stop = start + n
    blocks = range(start // BLOCK_SIZE, (stop - 1) // BLOCK_SIZE + 1)
    snrs = [float(s) for s in snrs]

    def job(b):
        return _simulate_block(cfg, snrs, b, k)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, blocks))
    else:
        results = [job(b) for b in blocks]

    lo = start - blocks[0] * BLOCK_SIZE
    streams = []
    for j, snr in enumerate(snrs):
        g = np.concatenate([r[j][0] for r in results])[lo:lo + n]
        bad = np.concatenate([r[j][1] for r in results])[lo:lo + n]
        n_bad = int(bad.sum())
        if n_bad > SINGULAR_RATE_LIMIT * n:
            raise SingularChannelError(f"{n_bad} of {n} ZF draws were singular")
        if n_bad:
            g = g[~bad]
        streams.append(EffectiveChannel(g, user_index=k, cfg=cfg.with_snr(snr), n_singular=n_bad))
    return streams


def simulate(cfg: SystemConfig, samples: Optional[int] = None, workers: int = 1,
             start: int = 0, k: int = 0) -> EffectiveChannel:
    """Effective-coefficient stream for ``cfg`` (see :func:`simulate_snr_grid`)."""
    return simulate_snr_grid(cfg, [cfg.snr], samples=samples, workers=workers, start=start, k=k)[0]
