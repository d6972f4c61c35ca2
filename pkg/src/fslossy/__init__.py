"""Finite-state lossy compression: d-semifaithful block codes, LZ78, and rate lower bounds."""

__version__ = "0.1.0"

from .bits import Bits, BitReader, BitWriter, elias_delta_decode, elias_delta_encode
from .core import (Alphabet, Budget, DistortionModel, EnumerationLimitError, FormatError,
                   FslossyError, Sequence, ball_contains, distortion, enumerate_ball)
from .lz78 import c_max, incremental_parse, k_eps, lz_code_length, lz_decode, lz_encode
from .universal import build_universal, neg_log_u_ball, u_ball_mass, u_sample
from .empirical import empirical_block_dist, empirical_entropy, type_index_decode, type_index_encode
from .fsm import (FsleSpec, FsreSpec, FsvqSpec, check_distortion_compliance,
                  check_information_lossless, fsle_run, fsre_run, fsvq_to_fsre)
from .bounds import best_bound, chain_report, generalized_kraft_check, lower_bound_1, lower_bound_2
from .schemes import (decode, encode, measure_rho, scheme_a_decode, scheme_a_encode,
                      scheme_b_decode, scheme_b_encode, scheme_c_decode, scheme_c_encode)
