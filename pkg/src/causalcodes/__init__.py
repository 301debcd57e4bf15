"""Codes for binary channels controlled by a causal adversary.

The package covers the capacity formulas, the parameter couplings of the
chunked stochastic construction, the reference trajectories used by the
decoder, brute-force decoders for the bit-flip and erasure channels, and a
seeded simulation harness.
"""

from .code import ERASURE, CodeSpec, derive_chunk, encode, sample_secrets, split_mega
from .decoder_erase import decode_erase, find_decode_point
from .decoder_flip import DecodeOutcome, decode_flip, goodness_check
from .harness import TrialConfig, run_experiment, run_trial
from .info_math import binary_entropy, erase_capacity, flip_capacity
from .params import derive_erase_params, derive_flip_params, validate_params
from .trajectory import AdversaryTrajectory, eval_reference, find_t_star, verify_claims

__version__ = "0.1.0"

__all__ = [
    "ERASURE", "AdversaryTrajectory", "CodeSpec", "DecodeOutcome", "TrialConfig",
    "binary_entropy", "decode_erase", "decode_flip", "derive_chunk", "derive_erase_params",
    "derive_flip_params", "encode", "erase_capacity", "eval_reference", "find_decode_point",
    "find_t_star", "flip_capacity", "goodness_check", "run_experiment", "run_trial",
    "sample_secrets", "split_mega", "validate_params", "verify_claims",
]
