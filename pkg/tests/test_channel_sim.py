import math

import numpy as np
import pytest

from ergobound import channel_sim as cs
from ergobound.channel_sim import (
    ChannelMatrix,
    DegenerateChannelError,
    Precoding,
    SingularChannelError,
    SystemConfig,
)
from ergobound.special_math import gamma_ratio_half

from .conftest import config, within_sigma
from .oracles import zf_pinv_columns


class TestSystemConfig:
    def test_snr_is_derived(self):
        cfg = SystemConfig(M=4, K=2, etx=8.0, n0=2.0)
        assert cfg.snr == 4.0
        assert cfg.snr_db == pytest.approx(10 * math.log10(4.0))
        assert cfg.with_snr(10.0).etx == 20.0 and cfg.with_snr(10.0).n0 == 2.0

    def test_zf_rank_condition(self):
        with pytest.raises(ValueError):
            SystemConfig(M=3, K=4, precoder=Precoding.ZF)
        SystemConfig(M=3, K=4, precoder=Precoding.CONJ)

    @pytest.mark.parametrize("kw", [dict(M=0), dict(K=0), dict(T=0), dict(etx=0.0), dict(n0=-1.0),
                                    dict(samples=0), dict(seed=-1)])
    def test_rejects_invalid(self, kw):
        base = dict(M=4, K=2)
        base.update(kw)
        with pytest.raises(ValueError):
            SystemConfig(**base)

    def test_pilot_snr_defaults_to_data_snr(self):
        cfg = config(csi="PilotMMSE", snr_db=20)
        assert cfg.pilot_snr_value == pytest.approx(100.0)
        assert config(csi="PilotMMSE", pilot_snr=3.0).pilot_snr_value == 3.0


N_DRAWS = 100_000  # x M=10 rows gives 1e6 entries
N_SAMPLES = 1_000_000


@pytest.fixture(scope="module")
def h():
    return cs.draw_channel(SystemConfig(M=10, K=2), cs.block_rng(1, 0), batch=(N_DRAWS,)).entries


@pytest.fixture(scope="module")
def conj():
    return cs.simulate(config(snr_db=0.0, seed=101), samples=N_SAMPLES, workers=4)


@pytest.fixture(scope="module")
def zf():
    return cs.simulate(config("ZFBF", snr_db=0.0, seed=102), samples=N_SAMPLES, workers=4)


class TestDrawChannel:
    N = N_DRAWS

    def test_shape(self):
        cfg = SystemConfig(M=6, K=3)
        ch = cs.draw_channel(cfg, cs.block_rng(0, 0))
        assert ch.shape == (6, 3)
        ch.check(cfg)
        with pytest.raises(ValueError):
            ch.check(SystemConfig(M=6, K=4))

    def test_norm_mean(self, h):
        nrm = np.sum(np.abs(h[:, :, 0]) ** 2, axis=1)
        assert within_sigma(nrm.mean(), 10.0, nrm.std(ddof=1) / math.sqrt(self.N))

    def test_columns_uncorrelated(self, h):
        ip = np.einsum("nm,nm->n", h[:, :, 0].conj(), h[:, :, 1])
        assert within_sigma(ip.real.mean(), 0.0, ip.real.std(ddof=1) / math.sqrt(self.N))
        assert within_sigma(ip.imag.mean(), 0.0, ip.imag.std(ddof=1) / math.sqrt(self.N))

    def test_entry_moments(self, h):
        x = h.ravel()
        p2, p4 = np.abs(x) ** 2, np.abs(x) ** 4
        assert within_sigma(p2.mean(), 1.0, p2.std(ddof=1) / math.sqrt(x.size))
        assert within_sigma(p4.mean(), 2.0, p4.std(ddof=1) / math.sqrt(x.size))
        # real and imaginary parts each carry half the power
        re = x.real ** 2
        assert within_sigma(re.mean(), 0.5, re.std(ddof=1) / math.sqrt(x.size))


class TestEstimateChannel:
    def test_requires_pilot_model(self):
        cfg = config()
        with pytest.raises(ValueError):
            cs.estimate_channel(cs.draw_channel(cfg, cs.block_rng(0, 0)), cfg, cs.block_rng(0, 1))

    def test_noiseless_limit(self):
        cfg = config(csi="PilotMMSE", snr_db=120)
        h = cs.draw_channel(cfg, cs.block_rng(0, 0))
        hh = cs.estimate_channel(h, cfg, cs.block_rng(0, 1))
        assert np.allclose(hh.entries, h.entries, rtol=0, atol=1e-5)

    def test_variance_and_orthogonality(self):
        cfg = config(csi="PilotMMSE", snr_db=0.0, M=10, K=10)
        n = 10_000
        h = cs.draw_channel(cfg, cs.block_rng(5, 0), batch=(n,))
        hh = cs.estimate_channel(h, cfg, cs.block_rng(5, 1)).entries.ravel()
        e = h.entries.ravel() - hh
        var = np.abs(hh) ** 2
        assert within_sigma(var.mean(), 0.5, var.std(ddof=1) / math.sqrt(var.size))
        cross = hh * e.conj()
        n = math.sqrt(cross.size)
        assert within_sigma(cross.real.mean(), 0.0, cross.real.std(ddof=1) / n)
        assert within_sigma(cross.imag.mean(), 0.0, cross.imag.std(ddof=1) / n)
        # error variance 1/(1+snr)
        ev = np.abs(e) ** 2
        assert within_sigma(ev.mean(), 0.5, ev.std(ddof=1) / math.sqrt(ev.size))


class TestPrecoders:
    def test_conj_identity_column(self):
        cfg = SystemConfig(M=3, K=1)
        p = cs.precode_conj(ChannelMatrix(np.array([[1.0], [0.0], [0.0]], dtype=complex)), cfg)
        assert np.array_equal(p.vectors, np.array([[1], [0], [0]], dtype=complex))
        assert p.energies.tolist() == [1.0]

    def test_conj_scale_invariance_and_unit_norm(self, rng):
        cfg = SystemConfig(M=8, K=4, etx=3.0)
        h = cs.draw_channel(cfg, rng)
        a, b = cs.precode_conj(h, cfg), cs.precode_conj(ChannelMatrix(7.5 * h.entries), cfg)
        assert np.allclose(a.vectors, b.vectors, rtol=0, atol=1e-15)
        assert np.allclose(np.linalg.norm(a.vectors, axis=0), 1.0, rtol=0, atol=1e-12)
        assert a.energies.sum() == pytest.approx(3.0)
        assert np.all(a.energies == 0.75)

    def test_conj_zero_column(self):
        cfg = SystemConfig(M=2, K=2)
        with pytest.raises(DegenerateChannelError):
            cs.precode_conj(ChannelMatrix(np.array([[1, 0], [0, 0]], dtype=complex)), cfg)

    def test_zf_orthonormal_equals_conj(self, rng):
        cfg = SystemConfig(M=6, K=3, precoder=Precoding.ZF)
        q, _ = np.linalg.qr(cs.draw_channel(cfg, rng).entries)
        h = ChannelMatrix(q)
        assert np.allclose(cs.precode_zf(h, cfg).vectors, cs.precode_conj(h, cfg).vectors, atol=1e-12)

    def test_zf_hand_example(self):
        # H = [[1, 1], [0, 1]]: H^H H = [[1, 1], [1, 2]], inverse [[2, -1], [-1, 1]],
        # H (H^H H)^{-1} = [[1, 0], [-1, 1]] -> columns (1, -1)/sqrt 2 and (0, 1).
        cfg = SystemConfig(M=2, K=2, precoder=Precoding.ZF)
        p = cs.precode_zf(ChannelMatrix(np.array([[1, 1], [0, 1]], dtype=complex)), cfg)
        expect = np.array([[1 / math.sqrt(2), 0], [-1 / math.sqrt(2), 1]])
        assert np.allclose(p.vectors, expect, rtol=0, atol=1e-14)

    def test_zf_matches_pseudo_inverse(self, rng):
        cfg = SystemConfig(M=12, K=7, precoder=Precoding.ZF)
        h = cs.draw_channel(cfg, rng)
        assert np.allclose(cs.precode_zf(h, cfg).vectors, zf_pinv_columns(h.entries), atol=1e-12)

    def test_zf_large_k_uses_qr_and_agrees(self, rng):
        cfg = SystemConfig(M=48, K=40, precoder=Precoding.ZF)
        h = cs.draw_channel(cfg, rng)
        assert cfg.K > cs.GRAM_INVERSE_MAX_K
        assert np.allclose(cs.precode_zf(h, cfg).vectors, zf_pinv_columns(h.entries), atol=1e-10)

    def test_zf_singular(self):
        cfg = SystemConfig(M=3, K=2, precoder=Precoding.ZF)
        h = np.array([[1, 2], [1, 2], [0, 0]], dtype=complex)
        with pytest.raises(SingularChannelError) as info:
            cs.precode_zf(ChannelMatrix(h), cfg)
        assert info.value.condition >= cs.ZF_COND_LIMIT

    def test_zf_nulling(self, rng):
        cfg = config("ZFBF")
        h = cs.draw_channel(cfg, rng)
        for k in range(cfg.K):
            g = cs.effective_coefficients(h, cs.precode_zf(h, cfg), k).g
            others = np.delete(np.abs(g), k)
            assert others.max() <= 1e-10 * abs(g[k])


class TestEffectiveCoefficients:
    def test_conj_useful_is_scaled_norm(self, rng):
        cfg = config()
        h = cs.draw_channel(cfg, rng)
        for k in range(cfg.K):
            g = cs.effective_coefficients(h, cs.precode_conj(h, cfg), k)
            assert g.user_index == k
            expect = math.sqrt(cfg.etx / cfg.K) * np.linalg.norm(h.entries[:, k])
            assert g.g[k].real == pytest.approx(expect, rel=1e-13)
            assert abs(g.g[k].imag) <= 1e-13 * expect

    def test_dimension_mismatch(self, rng):
        cfg = config()
        h = cs.draw_channel(cfg, rng)
        p = cs.precode_conj(cs.draw_channel(SystemConfig(M=10, K=4), rng), SystemConfig(M=10, K=4))
        with pytest.raises(ValueError):
            cs.effective_coefficients(h, p)

    @pytest.mark.parametrize("precoder,csi", [("ConjBF", "Perfect"), ("ZFBF", "Perfect"),
                                              ("ConjBF", "PilotMMSE"), ("ZFBF", "PilotMMSE")])
    def test_fast_path_matches_explicit_precoder(self, precoder, csi):
        cfg = config(precoder, csi, snr_db=5.0, seed=9)
        fast = cs.simulate(cfg, samples=64).g
        rng = cs.block_rng(cfg.seed, 0)
        h = cs.draw_channel(cfg, rng, batch=(cs.BLOCK_SIZE,))
        hhat = cs.estimate_channel(h, cfg, rng) if csi == "PilotMMSE" else h
        for i in range(64):
            hi, hhi = ChannelMatrix(h.entries[i]), ChannelMatrix(hhat.entries[i])
            g = cs.effective_coefficients(hi, cs.precode(hhi, cfg), 0).g
            assert np.allclose(fast[i], g, rtol=1e-12, atol=1e-12)


class TestSimulation:
    N = N_SAMPLES

    def test_zf_useful_power(self, zf):
        p = np.abs(zf.useful()) ** 2
        assert within_sigma(p.mean(), 1.2, p.std(ddof=1) / math.sqrt(self.N))

    def test_zf_interference_nulled(self, zf):
        scale = math.sqrt(1.0 / 5)
        assert np.abs(zf.cross()).max() <= 1e-10 * scale

    def test_conj_cross_power(self, conj):
        p = np.abs(conj.cross()) ** 2
        se = p.std(axis=0, ddof=1) / math.sqrt(self.N)
        assert within_sigma(p.mean(axis=0), 1.0 / 5, se)

    def test_conj_useful_mean(self, conj):
        g = conj.useful().real
        assert within_sigma(g.mean(), math.sqrt(1 / 5) * gamma_ratio_half(10), g.std(ddof=1) / math.sqrt(self.N))

    def test_partition_invariance(self):
        cfg = config("ZFBF", "PilotMMSE", seed=3)
        whole = cs.simulate(cfg, samples=5000, workers=1).g
        for workers in (2, 4, 16):
            assert np.array_equal(cs.simulate(cfg, samples=5000, workers=workers).g, whole)
        pieces = [cs.simulate(cfg, samples=n, start=s).g for s, n in ((0, 700), (700, 2300), (3000, 2000))]
        assert np.array_equal(np.concatenate(pieces), whole)

    def test_snr_grid_shares_draws(self):
        cfg = config(seed=4)
        a, b = cs.simulate_snr_grid(cfg, [1.0, 100.0], samples=2000)
        assert np.allclose(b.g, 10.0 * a.g, rtol=1e-14, atol=0)

    def test_seed_changes_stream(self):
        a = cs.simulate(config(seed=1), samples=100).g
        b = cs.simulate(config(seed=2), samples=100).g
        assert not np.array_equal(a, b)

    @pytest.mark.parametrize("precoder", ["ConjBF", "ZFBF"])
    def test_pilot_converges_to_perfect(self, precoder):
        perfect = cs.simulate(config(precoder, "Perfect", snr_db=60.0, seed=8), samples=4000).g
        noisy = cs.simulate(config(precoder, "PilotMMSE", snr_db=60.0, seed=8), samples=4000).g
        rel = np.abs(noisy[:, 0] - perfect[:, 0]) / np.abs(perfect[:, 0])
        assert rel.max() <= 1e-2

    def test_singular_rate_limit(self, monkeypatch):
        cfg = config("ZFBF", seed=0)
        monkeypatch.setattr(cs, "ZF_COND_LIMIT", 1.5)
        with pytest.raises(SingularChannelError):
            cs.simulate(cfg, samples=2000)

    def test_singular_draws_dropped_below_limit(self, monkeypatch):
        cfg = config("ZFBF", M=5, K=5, seed=0)
        full = cs.simulate(cfg, samples=20_000)
        conds = []
        for b in range(20):
            h = cs._crandn(cs.block_rng(0, b), (cs.BLOCK_SIZE, 5, 5))
            conds.append(cs._gram_inverse(h)[2])
        conds = np.concatenate(conds)[:20_000]
        limit = float(np.sort(conds)[-2])  # the two worst draws reach the limit
        monkeypatch.setattr(cs, "ZF_COND_LIMIT", limit)
        monkeypatch.setattr(cs, "SINGULAR_RATE_LIMIT", 1e-3)
        dropped = cs.simulate(cfg, samples=20_000)
        keep = conds < limit
        assert dropped.n_singular == 2 == int((~keep).sum())
        assert dropped.n == 20_000 - 2
        assert np.allclose(dropped.g, full.g[keep], rtol=1e-13, atol=1e-15)
