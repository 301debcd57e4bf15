"""Single-shot decoder for the causal erasure channel.

Erasures are visible, so the decode point is pinned from the observed
erasure count instead of being searched for iteratively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .code import ERASURE, CodeSpec, affine_rows, chunk_distances, derive_chunk, random_bits
from .decoder_flip import (AMBIGUOUS, DEFAULT_CAP_BITS, NO_DECODE, UNIQUE, Consistency, DecodeOutcome,
                           MessageList, _guard)
from .gf2 import EchelonSystem, project_low
from .params import ErasureParams

_SLACK = 1e-9


class NoDecodePointError(RuntimeError):
    """No chunk end satisfies both decode-point conditions."""


@dataclass(frozen=True)
class ErasureDecodePoint:
    t_star: int
    lam: int

    def to_dict(self) -> dict:
        return {"t_star": self.t_star, "lambda": self.lam}


def decode_point_conditions(params: ErasureParams, t: int, lam: int) -> tuple[bool, bool]:
    n, th = params.n, params.theta
    first = params.R * n + lam + th * t <= t + _SLACK
    second = n * params.p - lam + (n - t) * th / 2.0 <= (n - t) / 2.0 + _SLACK
    return first, second


def find_decode_point(params: ErasureParams, received) -> ErasureDecodePoint:
    y = np.asarray(received)
    if len(y) != params.n:
        raise ValueError(f"received length {len(y)} != n={params.n}")
    erased = (y == ERASURE).reshape(params.num_chunks, params.chunk_len).sum(axis=1)
    lam = 0
    for k in range(1, params.num_chunks):
        lam += int(erased[k - 1])
        t = k * params.chunk_len
        if all(decode_point_conditions(params, t, lam)):
            return ErasureDecodePoint(t, lam)
    raise NoDecodePointError("no chunk end satisfies the decode-point conditions "
                             "(rate above 1 - 2p or budget exceeded)")


# -- affine family: elimination over GF(2) -------------------------------


def _affine_equations(spec: CodeSpec, y: np.ndarray, chunks: range):
    mb, sb, L = spec.msg_bits, spec.secret_bits, spec.chunk_len
    for c in chunks:
        shift = mb + c * sb
        for o, (a, b, const) in enumerate(affine_rows(spec, c + 1)):
            v = int(y[c * L + o])
            if v != ERASURE:
                yield a | (b << shift), v ^ const


def _affine_left(spec: CodeSpec, y: np.ndarray, k: int) -> MessageList:
    system = EchelonSystem().extend(_affine_equations(spec, y, range(k)))
    return MessageList(affine=project_low(system, spec.msg_bits))


def _affine_consistent(spec: CodeSpec, y: np.ndarray, k: int, mlist: MessageList):
    aff = mlist.affine
    if aff.empty:
        return aff
    system = EchelonSystem().extend(aff.constraints)
    system.extend(_affine_equations(spec, y, range(k, spec.num_chunks)))
    return project_low(system, spec.msg_bits)


def _as_affine(mlist: MessageList, spec: CodeSpec) -> MessageList:
    if mlist.affine is not None:
        return mlist
    raise ValueError("affine codebooks need lists produced by list_decode_erasures")


# -- public decoder -------------------------------------------------------


def list_decode_erasures(spec: CodeSpec, received, point: ErasureDecodePoint,
                         cap_bits: int = DEFAULT_CAP_BITS) -> MessageList:
    """Messages whose left codeword, for some secrets, matches every unerased prefix symbol."""
    y = np.asarray(received)
    k = point.t_star // spec.chunk_len
    if spec.family == "affine":
        return _affine_left(spec, y, k)
    _guard(spec, k, cap_bits)
    ok = (chunk_distances(spec, y)[:, :k] == 0).any(axis=2).all(axis=1)
    return MessageList.of(np.flatnonzero(ok))


def consistency_decode_right_erase(spec: CodeSpec, received, point: ErasureDecodePoint, mlist: MessageList,
                                   cap_bits: int = DEFAULT_CAP_BITS) -> Consistency:
    y = np.asarray(received)
    k = point.t_star // spec.chunk_len
    if mlist.size == 0:
        return Consistency("None", None, 0)
    if spec.family == "affine":
        sol = _affine_consistent(spec, y, k, _as_affine(mlist, spec))
        if sol.size == 0:
            return Consistency("None", None, 0)
        if sol.size == 1:
            return Consistency(UNIQUE, sol.particular(), 1)
        return Consistency(AMBIGUOUS, None, sol.size)
    _guard(spec, spec.num_chunks - k, cap_bits)
    right = (chunk_distances(spec, y)[:, k:] == 0).any(axis=2).all(axis=1)
    ok = [m for m in mlist if right[m]]
    if not ok:
        return Consistency("None", None, 0)
    if len(ok) == 1:
        return Consistency(UNIQUE, ok[0], 1)
    return Consistency(AMBIGUOUS, None, len(ok))


def decode_erase(spec: CodeSpec, params: ErasureParams, received,
                 cap_bits: int = DEFAULT_CAP_BITS) -> DecodeOutcome:
    y = np.asarray(received)
    if spec.n != params.n or spec.num_chunks != params.num_chunks:
        raise ValueError("code and parameters disagree on the chunk grid")
    point = find_decode_point(params, y)
    mlist = list_decode_erasures(spec, y, point, cap_bits)
    res = consistency_decode_right_erase(spec, y, point, mlist, cap_bits)
    out = DecodeOutcome(NO_DECODE, None, point.t_star, 1, [mlist.size])
    if res.kind == UNIQUE:
        out.result, out.message = UNIQUE, res.message
    elif res.kind == AMBIGUOUS:
        out.result = AMBIGUOUS
    return out


# -- consistency probability ---------------------------------------------


def consistency_probability(k: int, chunk_len: int) -> float:
    """(1/2)^(k chunk_len - k): one erasure-freed bit credited per chunk."""
    if k < 1 or chunk_len < 1:
        raise ValueError("k and chunk_len must be positive")
    return 0.5 ** (k * chunk_len - k)


def exact_consistency_probability(unerased: int) -> float:
    """Probability that an independent uniform word matches ``unerased`` fixed positions."""
    return 0.5 ** unerased


def sample_consistency_frequency(k: int, chunk_len: int, samples: int, rng: np.random.Generator,
                                 erased_per_chunk: int = 1) -> tuple[float, int]:
    """Monte-Carlo frequency with which a fresh random code's codeword is consistent with a fixed word.

    The fixed word has ``erased_per_chunk`` erasures at the start of each of
    its ``k`` chunks; each sample draws a new master seed. Returns the
    frequency and the number of unerased positions.
    """
    word = rng.integers(0, 2, k * chunk_len).astype(np.uint8)
    for c in range(k):
        word[c * chunk_len: c * chunk_len + erased_per_chunk] = ERASURE
    live = word != ERASURE
    hits = 0
    for _ in range(samples):
        spec = CodeSpec(random_bits(rng, 64), k * chunk_len, k, 1, 1)
        cw = np.concatenate([derive_chunk(spec, c + 1, 1, 0) for c in range(k)])
        hits += bool(np.all(cw[live] == word[live]))
    return hits / samples, int(live.sum())
