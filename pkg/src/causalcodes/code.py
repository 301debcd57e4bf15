"""Chunked stochastic codebook.

Chunk ``i`` maps a message ``m`` and a per-chunk secret ``s`` to
``chunk_len`` bits. Nothing is stored: every chunk is recomputed from
``(master_seed, i, m, s)``.

Two families are available.

``prf``
    A keyed 64-bit BLAKE2b hash of the tuple, expanded to ``chunk_len`` bits
    in counter mode. This is the random code; decoders enumerate it.
``affine``
    Seeded random GF(2) affine maps ``A_i m + B_i s + c_i``. Each output bit
    is still uniform and pairwise independent over the seed, and the
    structure lets erasure decoding run by elimination when the message
    space is far too large to enumerate.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .gf2 import parity

PRF_VERSION = 1
FAMILIES = ("prf", "affine")
ERASURE = 2  # the erasure symbol inside uint8 received words


class CodeRangeError(ValueError):
    pass


class PositionError(ValueError):
    pass


@dataclass(frozen=True)
class CodeSpec:
    master_seed: int
    n: int
    num_chunks: int
    msg_bits: int
    secret_bits: int
    family: str = "prf"
    prf_version: int = PRF_VERSION

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise CodeRangeError("master_seed must be a 64-bit unsigned integer")
        if self.num_chunks < 1 or self.n % self.num_chunks:
            raise CodeRangeError(f"n={self.n} must be a positive multiple of num_chunks={self.num_chunks}")
        if self.msg_bits < 0 or self.secret_bits < 0:
            raise CodeRangeError("bit counts must be non-negative")
        if self.family not in FAMILIES:
            raise CodeRangeError(f"family must be one of {FAMILIES}")
        if self.prf_version != PRF_VERSION:
            raise CodeRangeError(f"unsupported prf_version {self.prf_version}")

    @property
    def chunk_len(self) -> int:
        return self.n // self.num_chunks

    @property
    def num_messages(self) -> int:
        return 1 << self.msg_bits

    @property
    def num_secrets(self) -> int:
        return 1 << self.secret_bits

    def to_dict(self) -> dict:
        d = asdict(self)
        d["chunk_len"] = self.chunk_len
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "CodeSpec":
        d = {k: v for k, v in d.items() if k != "chunk_len"}
        return cls(**d)

    @classmethod
    def from_params(cls, params, master_seed: int, family: str = "auto", cap_bits: int = 24) -> "CodeSpec":
        """Message and secret sizes ``ceil(nR)`` and ``ceil(nS)`` for a parameter set.

        ``auto`` picks the PRF family unless a message-plus-secrets enumeration
        would exceed ``cap_bits``.
        """
        msg_bits = max(math.ceil(params.n * params.R - 1e-9), 0)
        secret_bits = max(math.ceil(params.n * params.S - 1e-9), 0)
        if family == "auto":
            family = "prf" if msg_bits + params.num_chunks * secret_bits <= cap_bits else "affine"
        return cls(int(master_seed), params.n, params.num_chunks, msg_bits, secret_bits, family)


def _check(spec: CodeSpec, i: int, m: int, s: int) -> None:
    if not 1 <= i <= spec.num_chunks:
        raise CodeRangeError(f"chunk index {i} outside [1, {spec.num_chunks}]")
    if not 0 <= m < spec.num_messages:
        raise CodeRangeError(f"message {m} outside [0, 2^{spec.msg_bits})")
    if not 0 <= s < spec.num_secrets:
        raise CodeRangeError(f"secret {s} outside [0, 2^{spec.secret_bits})")


def _int_bytes(x: int) -> bytes:
    raw = x.to_bytes(max((x.bit_length() + 7) // 8, 1), "little")
    return len(raw).to_bytes(4, "little") + raw


_PRF_KEY = b"causalcodes/prf/v1"


def _prf_chunk(seed: int, i: int, m: int, s: int, chunk_len: int) -> np.ndarray:
    tag = seed.to_bytes(8, "little") + i.to_bytes(8, "little") + _int_bytes(m) + _int_bytes(s)
    h = hashlib.blake2b(tag, digest_size=8, key=_PRF_KEY).digest()
    need = (chunk_len + 7) // 8
    out = bytearray()
    counter = 0
    while len(out) < need:
        out += hashlib.blake2b(h + counter.to_bytes(8, "little"), digest_size=64).digest()
        counter += 1
    return np.unpackbits(np.frombuffer(bytes(out[:need]), dtype=np.uint8), bitorder="little")[:chunk_len]


@lru_cache(maxsize=4096)
def affine_rows(spec: CodeSpec, i: int) -> tuple[tuple[int, int, int], ...]:
    """Per-bit ``(message_row, secret_row, constant)`` triples of chunk ``i``."""
    rng = np.random.default_rng(np.random.SeedSequence([spec.master_seed, i, PRF_VERSION, 0xAFF1]))
    rows = []
    for _ in range(spec.chunk_len):
        a = _bits_to_int(rng.integers(0, 2, spec.msg_bits))
        b = _bits_to_int(rng.integers(0, 2, spec.secret_bits))
        rows.append((a, b, int(rng.integers(0, 2))))
    return tuple(rows)


def _bits_to_int(bits) -> int:
    x = 0
    for j, b in enumerate(bits):
        if b:
            x |= 1 << j
    return x


def derive_chunk(spec: CodeSpec, i: int, m: int, s: int) -> np.ndarray:
    """Bits of chunk ``i`` (1-based) for message ``m`` and secret ``s``, as uint8."""
    _check(spec, i, m, s)
    if spec.family == "prf":
        return _prf_chunk(spec.master_seed, i, m, s, spec.chunk_len)
    return np.array([parity(a & m) ^ parity(b & s) ^ c for a, b, c in affine_rows(spec, i)], dtype=np.uint8)


def encode(spec: CodeSpec, m: int, secrets: Sequence[int]) -> np.ndarray:
    if len(secrets) != spec.num_chunks:
        raise CodeRangeError(f"need {spec.num_chunks} secrets, got {len(secrets)}")
    return np.concatenate([derive_chunk(spec, j + 1, m, int(s)) for j, s in enumerate(secrets)])


def split_mega(word, t: int, chunk_len: int) -> tuple[np.ndarray, np.ndarray]:
    """Left (first t symbols) and right (remaining) mega sub-words at chunk end ``t``."""
    word = np.asarray(word)
    n = len(word)
    if t <= 0 or t >= n or t % chunk_len:
        raise PositionError(f"t={t} is not a chunk end for n={n}, chunk_len={chunk_len}")
    return word[:t], word[t:]


def random_bits(rng: np.random.Generator, bits: int) -> int:
    """One uniform integer in ``[0, 2^bits)``."""
    if bits == 0:
        return 0
    if bits <= 62:
        return int(rng.integers(0, 1 << bits))
    raw = rng.bytes((bits + 7) // 8)
    return int.from_bytes(raw, "little") & ((1 << bits) - 1)


def sample_secrets(rng: np.random.Generator, num: int, secret_bits: int) -> list[int]:
    return [random_bits(rng, secret_bits) for _ in range(num)]


def sample_message(rng: np.random.Generator, spec: CodeSpec) -> int:
    return random_bits(rng, spec.msg_bits)


@lru_cache(maxsize=16)
def chunk_table(spec: CodeSpec) -> np.ndarray:
    """All chunks as an array ``[message, chunk, secret, bit]`` (PRF decoding helper).

    Only for enumerable codes; the array has
    ``2^msg_bits * num_chunks * 2^secret_bits * chunk_len`` entries.
    """
    size = spec.num_messages * spec.num_chunks * spec.num_secrets * spec.chunk_len
    if size > 1 << 26:
        raise OverflowError(f"codebook table would hold {size} bits")
    out = np.empty((spec.num_messages, spec.num_chunks, spec.num_secrets, spec.chunk_len), dtype=np.uint8)
    for m in range(spec.num_messages):
        for i in range(spec.num_chunks):
            for s in range(spec.num_secrets):
                out[m, i, s] = derive_chunk(spec, i + 1, m, s)
    out.setflags(write=False)
    return out


def chunk_distances(spec: CodeSpec, received) -> np.ndarray:
    """``D[m, c, s]``: disagreements between chunk ``c`` of ``(m, s)`` and the received word.

    Erased positions never count as disagreements, so for erasure words
    ``D == 0`` means agreement on every unerased position.
    """
    y = np.asarray(received, dtype=np.uint8)
    if len(y) != spec.n:
        raise CodeRangeError(f"received length {len(y)} != n={spec.n}")
    table = chunk_table(spec)
    blocks = y.reshape(spec.num_chunks, spec.chunk_len)
    live = blocks != ERASURE
    diff = (table != blocks[None, :, None, :]) & live[None, :, None, :]
    return diff.sum(axis=3)
