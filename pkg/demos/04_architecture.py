"""Layer schedules, VN-to-VNU mapping and throughput of the two decoder architectures."""

from nsfaid.code import builtin_code, find_pipeline_row_order, group_layers
from nsfaid.framing import named_lut
from nsfaid.schedule import (FULL_LAYER, PIPELINED, naive_mapping, optimize_vnu_mapping,
                             throughput_mbps)

reg = builtin_code("regular_3_6")
for rpl in (1, 4):
    s = group_layers(reg, rpl)
    print(f"(3,6) code, rpl={rpl}: L={s.L}, full layers={all(s.full_flags)}, pipeline ok={s.pipeline_ok}")

wx = builtin_code("wimax_r12")
print("WiMAX natural order pipeline ok:", group_layers(wx, 1).pipeline_ok)
order = find_pipeline_row_order(wx)
print("pipeline-compatible order:", order)

k433 = {2: named_lut(0), 3: named_lut(3), 6: named_lut(2)}
m = optimize_vnu_mapping(wx, order, k433)
print(m.report(wx.column_degrees))
print("naive cost", naive_mapping(wx, order, k433).cost, " optimized cost", m.cost)

# throughput = N f / (delta + L n_iter), 20 iterations
print("\n(3,6) code, N=1296")
for variant, L, freqs in ((PIPELINED, 12, [200, 222, 227, 175, 200, 208]),
                          (FULL_LAYER, 3, [151, 172, 192, 125, 147, 172])):
    print(f"  {variant:10s}", [throughput_mbps(1296, f, L, 20, variant) for f in freqs])
print("WiMAX code, N=2304, pipelined")
print("  ", [throughput_mbps(2304, f, 12, 20) for f in [175, 172, 178, 192, 192, 200, 161, 156, 161, 178, 178, 200]])
