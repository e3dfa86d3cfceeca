import itertools
from dataclasses import replace

import numpy as np
import pytest

import reference
from nsfaid.channel import quantize, sigma_from_snr, transmit
from nsfaid.code import builtin_code, find_pipeline_row_order, parse_base_matrix
from nsfaid.decoder import (COMPRESSED, FLOODING, LAYERED, Decoder, KernelConfigError, KernelSpec,
                            cn_update, cn_update_compressed, decode_flooding, decode_layered,
                            extract, kernel_from_dict, load_kernel, syndrome, vn_update)
from nsfaid.framing import RANDOMIZED, Alphabet, identity, named_lut, parse_lut

F1 = parse_lut("[0,1,1,3,3,3,7,7]")
F2 = parse_lut("[+-1,1,3,3,4,4,4,7]")
REG = builtin_code("regular_3_6")
WX = builtin_code("wimax_r12")
WX_ORDER = tuple(find_pipeline_row_order(WX))
K433 = {2: named_lut(0), 3: named_lut(3), 6: named_lut(2)}


def noisy_llrs(code, snr, mu, seed, Q=7):
    rng = np.random.default_rng(seed)
    y = transmit(np.zeros(code.N, dtype=np.uint8), sigma_from_snr(snr), rng)
    return quantize(y, mu, Q)


def test_cn_update_examples():
    assert cn_update([3, -2, 5]) == -2
    assert cn_update([-1, -1]) == 1
    assert cn_update([0, 4]) == 0
    with pytest.raises(ValueError):
        cn_update([])


def test_compressed_examples():
    s = cn_update_compressed([3, 1, 2, 5])
    assert (s.min1, s.indx_min1, s.min2) == (1, 1, 2)
    assert extract(s, 1) == 2
    assert [extract(s, k) for k in (0, 2, 3)] == [1, 1, 1]
    s = cn_update_compressed([-4, 4, 4])
    assert s.min1 == s.min2 == 4
    assert {abs(extract(s, k)) for k in range(3)} == {4}
    s = cn_update_compressed([0, 3, -5])
    assert [extract(s, k) for k in (1, 2)] == [0, 0]


@pytest.mark.parametrize("Q", [1, 3])
@pytest.mark.parametrize("dc", [2, 3, 4])
def test_compressed_equivalence_exhaustive(Q, dc):
    for vals in itertools.product(range(-Q, Q + 1), repeat=dc):
        s = cn_update_compressed(vals)
        for k in range(dc):
            others = vals[:k] + vals[k + 1:]
            assert extract(s, k) == cn_update(others)


def test_vn_update_examples():
    assert vn_update(3, [7, 7], identity(7)) == 7
    assert vn_update(2, [1, 1], F1) == 3
    assert vn_update(-1, [1, 0], parse_lut("[+-1,1,1,1,1,6,6,6]")) == 1


def test_noiseless_converges_in_one_iteration():
    llr = np.full(REG.N, 7)
    for sched in (FLOODING, LAYERED):
        res = Decoder(REG, KernelSpec(F1, mu=3.8, schedule=sched)).decode(llr)
        assert res.converged and res.iterations_used == 1 and not res.bits.any()


@pytest.mark.parametrize("sched", [FLOODING, LAYERED])
def test_negation_symmetry(sched):
    spec = KernelSpec(F1, mu=3.8, schedule=sched, max_iter=15)
    dec = Decoder(REG, spec)
    llr = noisy_llrs(REG, 1.2, 3.8, 11)
    a = dec.decode(llr, trace=True, early_exit=False)
    b = dec.decode(-llr, trace=True, early_exit=False)
    assert np.array_equal(a.trace, -b.trace)
    nz = a.ap != 0
    assert np.array_equal(a.bits[nz], 1 - b.bits[nz])
    # every check has even degree, so the complement of a codeword is a codeword
    a = dec.decode(llr)
    b = dec.decode(-llr)
    assert a.iterations_used == b.iterations_used


def reference_luts(code, framings):
    degs = code.vn_degree_of()
    return [framings[int(d)].lut if isinstance(framings, dict) else framings.lut for d in degs]


@pytest.mark.parametrize("framings,mu", [(identity(7), 5.6), (F1, 3.8), (F2, 4.0)])
def test_flooding_matches_reference(framings, mu):
    H = REG.expand().to_dense().tolist()
    spec = KernelSpec(framings, mu=mu, max_iter=8)
    dec = Decoder(REG, spec)
    luts = reference_luts(REG, framings)
    for seed in range(3):
        llr = noisy_llrs(REG, 1.5, mu, seed)
        got = dec.decode(llr, trace=True, early_exit=False).trace
        want = reference.flooding(H, llr.tolist(), luts, 7, 31, 8)
        assert np.array_equal(got, np.array(want))


def test_layered_matches_reference_irregular():
    H = WX.expand().to_dense().tolist()
    z = WX.z
    layers = [list(range(r * z, (r + 1) * z)) for r in WX_ORDER]
    luts = reference_luts(WX, K433)
    for storage in ("uncompressed", "compressed"):
        spec = KernelSpec(K433, mu=2.8, schedule=LAYERED, cn_storage=storage, max_iter=6,
                          row_order=WX_ORDER)
        llr = noisy_llrs(WX, 1.0, 2.8, 4)
        got = Decoder(WX, spec).decode(llr, trace=True, early_exit=False).trace
        want = reference.layered(H, llr.tolist(), luts, 7, 31, 6, layers)
        assert np.array_equal(got, np.array(want))


def test_ms_ber_agrees_with_reference():
    H = REG.expand().to_dense().tolist()
    spec = KernelSpec.min_sum(mu=5.6, max_iter=20)
    dec = Decoder(REG, spec)
    luts = reference_luts(REG, identity(7))
    errs_fast = errs_ref = 0
    for seed in range(6):
        llr = noisy_llrs(REG, 2.5, 5.6, 1000 + seed)
        res = dec.decode(llr, early_exit=False)
        ref = reference.flooding(H, llr.tolist(), luts, 7, 31, 20)[-1]
        errs_fast += int(res.bits.sum())
        errs_ref += sum(1 for v in ref if v < 0)
        assert np.array_equal(res.ap, np.array(ref))
    assert errs_fast == errs_ref


@pytest.mark.parametrize("framings", [identity(7), F1, K433])
def test_compressed_storage_is_bit_exact(framings):
    code = WX
    spec = KernelSpec(framings, mu=3.0, schedule=LAYERED, max_iter=12, row_order=WX_ORDER)
    a = Decoder(code, spec)
    b = Decoder(code, replace(spec, cn_storage=COMPRESSED))
    for seed in range(5):
        llr = noisy_llrs(code, 1.2, 3.0, seed)
        ra = a.decode(llr, trace=True, early_exit=False)
        rb = b.decode(llr, trace=True, early_exit=False)
        assert np.array_equal(ra.trace, rb.trace)


def test_super_layers_equal_single_rows():
    base = KernelSpec(F1, mu=3.8, schedule=LAYERED, max_iter=10)
    one = Decoder(REG, replace(base, rpl=1))
    four = Decoder(REG, replace(base, rpl=4))
    for seed in range(3):
        llr = noisy_llrs(REG, 1.3, 3.8, seed)
        assert np.array_equal(one.decode(llr, trace=True, early_exit=False).trace,
                              four.decode(llr, trace=True, early_exit=False).trace)


def test_one_layered_sweep_equals_first_flooding_iteration():
    # every VN has degree 1, so one sweep sees the same inputs as the first flooding iteration
    toy = parse_base_matrix("2 6 5\n0 3 1 -1 -1 -1\n-1 -1 -1 2 0 4\n")
    rng = np.random.default_rng(3)
    for f in (identity(7), F1, F2):
        spec = KernelSpec(f, max_iter=1, early_exit=False)
        for _ in range(20):
            llr = rng.integers(-7, 8, toy.N)
            a = decode_flooding(toy, spec, llr)
            b = decode_layered(toy, spec, llr)
            assert np.array_equal(a.ap, b.ap)


def test_layered_improves_on_flooding_convergence():
    spec = KernelSpec.min_sum(mu=3.2, max_iter=50, row_order=WX_ORDER)
    fl = Decoder(WX, spec)
    la = Decoder(WX, replace(spec, schedule=LAYERED))
    it_f = it_l = 0
    for seed in range(10):
        llr = noisy_llrs(WX, 2.5, 3.2, seed)
        it_f += fl.decode(llr).iterations_used
        it_l += la.decode(llr).iterations_used
    assert it_l < it_f


def test_randomized_ties_reproducible():
    f = parse_lut("[+-1,1,1,1,1,6,6,6]", tie_mode=RANDOMIZED)
    spec = KernelSpec(f, mu=6.4, tie_mode=RANDOMIZED, schedule=LAYERED, max_iter=10)
    dec = Decoder(REG, spec)
    llr = noisy_llrs(REG, 1.5, 6.4, 0)
    a = dec.decode(llr, seed=5, trace=True, early_exit=False)
    b = dec.decode(llr, seed=5, trace=True, early_exit=False)
    c = dec.decode(llr, seed=6, trace=True, early_exit=False)
    assert np.array_equal(a.trace, b.trace)
    assert not np.array_equal(a.trace, c.trace)


def test_syndrome_and_input_checks():
    assert syndrome(REG, np.zeros(REG.N, dtype=np.uint8))
    bits = np.zeros(REG.N, dtype=np.uint8)
    bits[0] = 1
    assert not syndrome(REG, bits)
    dec = Decoder(REG, KernelSpec(F1))
    with pytest.raises(ValueError):
        dec.decode(np.zeros(5, dtype=int))
    with pytest.raises(ValueError):
        dec.decode(np.full(REG.N, 9))


def test_spec_validation():
    with pytest.raises(KernelConfigError):
        KernelSpec(F1, mu=0)
    with pytest.raises(KernelConfigError):
        KernelSpec(F1, schedule="zigzag")
    with pytest.raises(KernelConfigError):
        KernelSpec(F1, alphabet=Alphabet(3, 5))
    with pytest.raises(KernelConfigError):
        Decoder(WX, KernelSpec({3: F1}))
    with pytest.raises(KernelConfigError):
        kernel_from_dict({"lut": "[0,1,1,3,3,3,7,7]", "colour": 1})
    with pytest.raises(KernelConfigError):
        kernel_from_dict({"lut": "[0,2,1,3,3,3,7,7]"})


def test_kernel_files(tmp_path):
    p = tmp_path / "k.toml"
    p.write_text('mu = 2.8\nschedule = "layered"\n[luts]\n2 = "[0,1,2,3,4,5,6,7]"\n'
                 '3 = "[0,1,1,3,3,3,7,7]"\n6 = "[0,1,1,2,2,7,7,7]"\n')
    spec = load_kernel(p)
    assert spec.framing_for(3) == named_lut(3) and spec.mu == 2.8
    j = tmp_path / "k.json"
    j.write_text('{"lut": "[+-1,1,1,1,1,6,6,6]", "mu": 6.4}')
    assert load_kernel(j).framing_for(3).lam == 1
    bad = tmp_path / "bad.toml"
    bad.write_text("mu = = 3")
    with pytest.raises(KernelConfigError):
        load_kernel(bad)
