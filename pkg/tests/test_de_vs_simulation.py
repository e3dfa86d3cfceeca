import numpy as np
import pytest

from nsfaid.channel import channel_pmf, quantize, sigma_from_snr, transmit
from nsfaid.code import DegreeDistribution, lifted_girth_ok, random_qc_code
from nsfaid.decoder import Decoder, KernelSpec
from nsfaid.density import Pmf, de_iterate
from nsfaid.framing import RANDOMIZED, identity, parse_lut

FRAMES = 300


@pytest.fixture(scope="module")
def lifted():
    code = random_qc_code(np.ones((3, 6), dtype=bool), 512, girth=10, seed=1)
    assert lifted_girth_ok(code.base, code.z, 10)
    return code


@pytest.mark.parametrize("f,mu,snr", [
    (identity(7), 5.6, 1.0),
    (parse_lut("[0,1,1,3,3,3,7,7]"), 3.8, 0.8),
    (parse_lut("[+-1,1,1,1,1,6,6,6]", tie_mode=RANDOMIZED), 6.4, 1.2),
])
def test_first_iterations_match(lifted, f, mu, snr):
    # girth 10 keeps the depth-2 neighbourhood of every VN a tree
    spec = KernelSpec(f, mu=mu, max_iter=2, early_exit=False, tie_mode=f.tie_mode)
    dec = Decoder(lifted, spec)
    sigma = sigma_from_snr(snr)
    rate = np.zeros((FRAMES, 2))
    for k in range(FRAMES):
        rng = np.random.default_rng([77, k])
        y = transmit(np.zeros(lifted.N, dtype=np.uint8), sigma, rng)
        res = dec.decode(quantize(y, mu, 7), seed=k, trace=True)
        t = res.trace
        rate[k] = (t < 0).mean(axis=1) + 0.5 * (t == 0).mean(axis=1)
    ch = Pmf.centered(channel_pmf(sigma, mu, 7))
    de = de_iterate(DegreeDistribution.regular(3, 6), f, ch, 2)
    mean = rate.mean(axis=0)
    se = rate.std(axis=0, ddof=1) / np.sqrt(FRAMES)
    for it in (1, 2):
        assert abs(mean[it - 1] - de[it]) < 5 * se[it - 1], (it, mean, de, se)
