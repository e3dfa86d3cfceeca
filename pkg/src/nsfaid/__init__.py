"""Non-surjective finite alphabet iterative decoders (NS-FAIDs) for LDPC codes."""

from .channel import ChannelParams, channel_pmf, quantize, sigma_from_snr, transmit
from .code import (DegreeDistribution, LayerSchedule, QcCode, TannerGraph, builtin_code,
                   find_pipeline_row_order, group_layers, load_base_matrix, parse_base_matrix)
from .decoder import DecodeResult, Decoder, KernelSpec, decode_flooding, decode_layered, load_kernel
from .density import Pmf, ThresholdResult, de_cn, de_iterate, de_vn, eta_threshold, optimize_mu
from .framing import Alphabet, FramingFunction, enumerate_framings, identity, parse_lut

__version__ = "0.1.0"
