import numpy as np
import pytest

from nsfaid.code import builtin_code, parse_base_matrix
from nsfaid.decoder import KernelSpec
from nsfaid.framing import RANDOMIZED, parse_lut
from nsfaid.montecarlo import (BerPoint, GF2Encoder, SimPlan, ber_interval, frame_rng,
                               monotonicity_violations, random_codeword_mode, run, snr_at_ber,
                               write_csv)

REG = builtin_code("regular_3_6")
F1 = parse_lut("[0,1,1,3,3,3,7,7]")


def test_high_snr_is_error_free():
    plan = SimPlan(REG, KernelSpec(F1, mu=3.8), (40.0,), max_frames=64)
    (pt,) = run(plan)
    assert pt.frames == 64 and pt.bit_errors == 0 and pt.ber == 0.0
    assert pt.avg_iters == 1.0


def test_thread_count_does_not_change_results():
    spec = KernelSpec(F1, mu=3.8, schedule="layered")
    base = dict(code=REG, spec=spec, snrs=(1.4, 1.6), min_frame_errors=10, max_frames=400, seed=9, batch=8)
    one = run(SimPlan(threads=1, **base))
    four = run(SimPlan(threads=4, **base))
    assert one == four
    assert one[0].frame_errors >= 10


def test_seed_changes_results():
    spec = KernelSpec(F1, mu=3.8)
    a = run(SimPlan(REG, spec, (1.3,), max_frames=64, seed=1))
    b = run(SimPlan(REG, spec, (1.3,), max_frames=64, seed=2))
    assert a != b


def test_frame_rng_independent_of_order():
    a = frame_rng(3, 1.25, 10).standard_normal(4)
    frame_rng(3, 1.25, 11).standard_normal(4)
    assert np.array_equal(a, frame_rng(3, 1.25, 10).standard_normal(4))
    assert not np.array_equal(a, frame_rng(3, 1.5, 10).standard_normal(4))


def test_stopping_rule():
    plan = SimPlan(REG, KernelSpec(F1, mu=3.8), (0.5,), min_frame_errors=20, max_frames=10_000, batch=16)
    (pt,) = run(plan)
    assert pt.frame_errors >= 20 and pt.frames <= 20 + 16


def test_encoder_produces_codewords():
    enc = GF2Encoder(REG)
    assert enc.K == REG.N - enc.rank
    rng = np.random.default_rng(0)
    g = REG.expand()
    for _ in range(5):
        x = enc.encode(rng.integers(0, 2, enc.K))
        assert g.is_codeword(x)
    toy = parse_base_matrix("1 2 3\n0 0\n")
    assert GF2Encoder(toy).K == 3


def test_random_codewords_match_all_zero_statistics():
    spec = KernelSpec(F1, mu=3.8, schedule="layered")
    plan = SimPlan(REG, spec, (1.5,), min_frame_errors=10_000, max_frames=1500)
    (zero,) = run(plan)
    (rand,) = random_codeword_mode(plan)
    p = (zero.frame_errors + rand.frame_errors) / (2 * plan.max_frames)
    se = np.sqrt(2 * p * (1 - p) / plan.max_frames)
    assert abs(zero.fer - rand.fer) < 5 * se


def test_lambda_kernel_needs_symmetric_ties():
    # all-zero analysis holds for F(0) = +-1 only when the tie sign is random
    f = parse_lut("[+-1,1,1,1,1,6,6,6]")
    fe = {}
    for tie in ("always_positive", RANDOMIZED):
        spec = KernelSpec(f, mu=6.4, schedule="layered", tie_mode=tie)
        plan = SimPlan(REG, spec, (2.0,), min_frame_errors=10_000, max_frames=1500)
        if tie == RANDOMIZED:
            (zero,) = run(plan)
        else:
            with pytest.warns(UserWarning, match="random codewords"):
                (zero,) = run(plan)
        (rand,) = random_codeword_mode(plan)
        fe[tie] = zero.frame_errors, rand.frame_errors
    z, r = fe[RANDOMIZED]
    p = (z + r) / 3000
    assert abs(z - r) / 1500 < 5 * np.sqrt(2 * p * (1 - p) / 1500)
    z, r = fe["always_positive"]
    assert z < r / 2


def test_plan_validation():
    spec = KernelSpec(F1)
    with pytest.raises(ValueError):
        SimPlan(REG, spec, ())
    with pytest.raises(ValueError):
        SimPlan(REG, spec, (2.0, 1.0))
    with pytest.raises(ValueError):
        SimPlan(REG, spec, (1.0,), threads=0)


def test_curve_helpers(tmp_path):
    pts = [BerPoint(1.0, 100, 1000, 50, 1000, 900), BerPoint(1.5, 100, 100, 10, 1000, 500),
           BerPoint(2.0, 100, 1, 1, 1000, 300)]
    assert snr_at_ber(pts, 1e-3) == pytest.approx(1.5)
    assert 1.5 < snr_at_ber(pts, 1e-4) < 2.0
    with pytest.raises(ValueError):
        snr_at_ber(pts, 1e-9)
    assert monotonicity_violations(pts) == []
    bad = [pts[2], pts[0]]
    assert monotonicity_violations(bad) == [(2.0, 1.0)]
    lo, hi = ber_interval(pts[1])
    assert lo < pts[1].ber < hi
    write_csv(tmp_path / "b.csv", pts)
    assert (tmp_path / "b.csv").read_text().count("\n") == 4
