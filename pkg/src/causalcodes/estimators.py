"""scikit-learn style wrappers around the encoder and decoders.

``fit`` derives the parameter set and the codebook description,
``transform`` encodes messages with fresh secrets, and ``predict`` decodes
received words (``-1`` marks a decoding failure).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted

from .code import CodeSpec, encode, sample_secrets
from .decoder_erase import decode_erase
from .decoder_flip import UNIQUE, decode_flip
from .params import DESK_SCALE, derive_erase_params, derive_flip_params


class _CausalCode(TransformerMixin, BaseEstimator):
    _channel = "flip"

    def __init__(self, n=64, p=0.0625, eps=0.1, num_chunks=8, msg_bits=4, secret_bits=1,
                 code_seed=0, random_state=None):
        self.n = n
        self.p = p
        self.eps = eps
        self.num_chunks = num_chunks
        self.msg_bits = msg_bits
        self.secret_bits = secret_bits
        self.code_seed = code_seed
        self.random_state = random_state

    def _derive(self):
        overrides = {"R": self.msg_bits / self.n, "S": self.secret_bits / self.n}
        if self.num_chunks is not None:
            overrides["num_chunks"] = self.num_chunks
        if self._channel == "flip":
            return derive_flip_params(self.n, self.p, self.eps, DESK_SCALE, overrides)
        return derive_erase_params(self.n, self.p, self.eps, DESK_SCALE, overrides)

    def fit(self, X=None, y=None):
        self.params_ = self._derive()
        self.spec_ = CodeSpec(int(self.code_seed), self.n, self.params_.num_chunks, self.msg_bits,
                              self.secret_bits, "prf")
        self.n_features_out_ = self.n
        return self

    def transform(self, X):
        """Encode each message in ``X`` (shape ``(n_samples,)`` or ``(n_samples, 1)``)."""
        check_is_fitted(self, "spec_")
        msgs = np.asarray(X).reshape(-1)
        rng = check_random_state(self.random_state)
        # sklearn's RandomState stands in for a Generator here
        gen = np.random.default_rng(rng.randint(0, 2**31 - 1))
        return np.stack([encode(self.spec_, int(m), sample_secrets(gen, self.spec_.num_chunks, self.secret_bits))
                         for m in msgs])

    def _decode_one(self, word):
        if self._channel == "flip":
            return decode_flip(self.spec_, self.params_, word)
        return decode_erase(self.spec_, self.params_, word)

    def predict(self, X):
        check_is_fitted(self, "spec_")
        Y = check_array(X, dtype=np.uint8)
        if Y.shape[1] != self.n:
            raise ValueError(f"expected words of length {self.n}, got {Y.shape[1]}")
        out = []
        for word in Y:
            res = self._decode_one(word)
            out.append(res.message if res.result == UNIQUE else -1)
        return np.asarray(out, dtype=np.int64)

    def score(self, X, y):
        """Fraction of received words in ``X`` decoded to the message in ``y``."""
        return float(np.mean(self.predict(X) == np.asarray(y).reshape(-1)))


class CausalFlipCode(_CausalCode):
    """Chunked stochastic code with the iterative bit-flip decoder."""

    _channel = "flip"


class CausalErasureCode(_CausalCode):
    """Chunked stochastic code with the single-shot erasure decoder."""

    _channel = "erase"

    def __init__(self, n=64, p=0.25, eps=0.25, num_chunks=16, msg_bits=4, secret_bits=1,
                 code_seed=0, random_state=None):
        super().__init__(n, p, eps, num_chunks, msg_bits, secret_bits, code_seed, random_state)
