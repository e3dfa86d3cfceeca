import itertools
import math

import pytest

from nsfaid.code import DegreeDistribution, builtin_code
from nsfaid.framing import FramingFunction, enumerate_framings, identity, named_lut, parse_lut
from nsfaid.search import (UniformSet, best_per_lambda, candidate_record, count_irregular,
                           enumerate_irregular, evaluate_ensemble, images_admissible,
                           memory_reduction, search_regular, total_uniform_candidates,
                           widest_degree, write_records_csv, write_records_json)

WX = builtin_code("wimax_r12")
WX_DIST = WX.degree_distributions()


def toy_usets(Q=3):
    by_w = {}
    for W in range(1, Q + 2):
        w = math.ceil(math.log2(W)) + 1 if W > 1 else 1
        by_w.setdefault(w, []).extend(enumerate_framings(Q, W))
    # keep weights that fill their bit-length, as the real U-sets do
    sets = {}
    for w, fs in by_w.items():
        keep = [f for f in fs if f.weight == 2 ** (w - 1)]
        if keep:
            sets[w] = UniformSet(w, None, keep[::2] if len(keep) > 6 else keep, [None] * len(keep), len(fs))
    return sets


def brute_force_count(usets, degrees):
    """Every profile, every tuple, filtered by image inclusion into the widest framing."""
    n = 0
    for prof in itertools.product(sorted(usets), repeat=len(degrees)):
        pools = [usets[w].members for w in prof]
        for combo in itertools.product(*pools):
            if images_admissible(dict(zip(degrees, combo))):
                n += 1
    return n


def bit_count_oracle(code, w_profile, q):
    """Memory reductions from counting bits on the expanded graph, edge by edge and check by check."""
    g = code.expand()
    vn_deg = g.vn_degrees
    edge_vn = g.cn_vn
    full_vn = q * g.n_edges
    red_vn = sum(w_profile[int(vn_deg[n])] for n in edge_vn)
    wmax = max(w_profile[int(d)] for d in set(vn_deg.tolist()))
    full_cn = q * g.n_edges
    red_cn = wmax * g.n_edges
    full_cmp = red_cmp = 0
    for m in range(g.M):
        dc = int(g.cn_degrees[m])
        idx = math.ceil(math.log2(dc))
        full_cmp += dc + 2 * (q - 1) + idx
        red_cmp += dc + 2 * (wmax - 1) + idx
    return (red_vn / full_vn - 1, red_cn / full_cn - 1, red_cmp / full_cmp - 1)


def test_total_uniform_candidates():
    assert total_uniform_candidates(7, (2, 3, 4)) == 196 + 2450 + 1


def test_widest_degree_tie_rule():
    assert widest_degree({2: 3, 3: 3, 6: 2}) == 3
    assert widest_degree({2: 4, 3: 3, 6: 3}) == 2


@pytest.mark.parametrize("degrees", [(2, 3), (2, 3, 6)])
def test_count_matches_brute_force(degrees):
    usets = toy_usets()
    n = count_irregular(usets, degrees)
    assert n == brute_force_count(usets, degrees)
    assert n == sum(1 for _ in enumerate_irregular(usets, degrees))
    per = count_irregular(usets, degrees, by_profile=True)
    assert sum(per.values()) == n


def test_single_degree_reduces_to_uset_sizes():
    usets = toy_usets()
    assert count_irregular(usets, (3,)) == sum(len(s.members) for s in usets.values())


def test_enumerated_candidates_admissible():
    for cand in itertools.islice(enumerate_irregular(toy_usets(), (2, 3, 6)), 500):
        top = cand.framings[widest_degree(cand.w_profile)].image
        assert all(f.image <= top for f in cand.framings.values())


TABLE = {
    "444": ((4, 4, 4), (0.0, 0.0, 0.0)),
    "432": ((4, 3, 2), (-27.63, 0.0, 0.0)),
    "433": ((4, 3, 3), (-17.76, 0.0, 0.0)),
    "332": ((3, 3, 2), (-34.87, -25.0, -13.04)),
    "333": ((3, 3, 3), (-25.0, -25.0, -13.04)),
    "222": ((2, 2, 2), (-50.0, -50.0, -26.09)),
}


@pytest.mark.parametrize("label", list(TABLE))
def test_memory_reduction(label):
    ws, expect = TABLE[label]
    prof = dict(zip((2, 3, 6), ws))
    mem = memory_reduction(prof, WX_DIST, 4)
    assert mem.percentages() == expect
    oracle = bit_count_oracle(WX, prof, 4)
    for a, b in zip((mem.vn, mem.cn_uncompressed, mem.cn_compressed), oracle):
        assert abs(a - b) < 1e-4


def test_memory_needs_every_degree():
    with pytest.raises(ValueError):
        memory_reduction({2: 3, 3: 3}, WX_DIST, 4)


def test_search_regular_small_pool():
    reg = DegreeDistribution.regular(3, 6)
    pool = [identity(7), parse_lut("[0,1,1,3,3,3,7,7]"), FramingFunction((0,) * 8)]
    ranked = search_regular(reg, framings=pool, mu_grid=[3.8, 5.6])
    assert ranked[0].framing == pool[1]
    assert ranked[-1].threshold is None
    assert list(best_per_lambda(ranked)) == [0]


def test_evaluate_ensemble_and_records(tmp_path):
    cands = [c for c in enumerate_irregular(
        {3: UniformSet(3, 3.0, [named_lut(3), named_lut(4)], [None, None], 2),
         4: UniformSet(4, None, [identity(7)], [None], 1)}, (2, 3, 6), profile=(4, 3, 3))]
    assert len(cands) == 4
    table = evaluate_ensemble(cands, WX_DIST, eta=1e-4, budget=2, mu_grid=[2.8])
    assert table.partial and table.evaluated == 2
    best = table.best["433"]
    assert best.memory.percentages() == (-17.76, 0.0, 0.0)
    rec = candidate_record(best, ms_threshold_db=1.374)
    assert set(rec) == {"w_profile", "luts", "threshold_db", "mu", "gain_vs_ms_db",
                        "mem_vn", "mem_cn_u", "mem_cn_c"}
    write_records_json(tmp_path / "r.json", [rec])
    write_records_csv(tmp_path / "r.csv", [rec])
    assert (tmp_path / "r.csv").read_text().startswith("w_profile,")
