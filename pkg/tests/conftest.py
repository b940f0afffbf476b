import numpy as np
import pytest

from ergobound.channel_sim import CSIModel, Precoding, SystemConfig


def within_sigma(estimate, truth, se, k=3.0, floor=0.0):
    """``|estimate - truth| <= k * se`` elementwise, with an absolute floor."""
    estimate, truth, se = np.broadcast_arrays(*(np.asarray(a) for a in (estimate, truth, se)))
    return bool(np.all(np.abs(estimate - truth) <= k * se + floor))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def config(precoder="ConjBF", csi="Perfect", M=10, K=5, snr_db=10.0, **kw):
    return SystemConfig(M=M, K=K, precoder=Precoding(precoder), csi=CSIModel(csi),
                        etx=10 ** (snr_db / 10), **kw)
