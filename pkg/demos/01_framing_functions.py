"""Framing functions: what they are, how many exist, how they compress messages."""

from nsfaid.framing import (count_framings, enumerate_framings, format_lut, identity, named_lut,
                            oms_framing, pack_w, poms_framing)

Q = 7  # 4-bit messages

# a framing function is an odd, non-decreasing LUT over the message alphabet
F1 = named_lut(3)
print("F1 =", format_lut(F1), " weight", F1.weight, " bits", F1.bit_length)
print("image:", sorted(F1.image))
for m in range(-Q, Q + 1):
    print(f"  F1({m:+d}) = {F1(m):+d}   stored as {pack_w(F1, F1(m)):03b}")

# well-known decoders are special cases
print("min-sum       ", format_lut(identity(Q)))
print("offset min-sum", format_lut(oms_framing(Q, 1)))
print("partial offset", format_lut(poms_framing(Q)))

# the number of framings of each weight: C(Q, W-1) * C(Q+1, W)
for W in range(1, Q + 2):
    print(f"W={W}: {count_framings(Q, W):5d} framings")

print("first five of weight 2:")
for f in list(enumerate_framings(Q, 2))[:5]:
    print("  ", format_lut(f))
