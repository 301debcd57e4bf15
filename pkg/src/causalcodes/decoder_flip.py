"""Iterative decoder for the causal bit-flip channel and the goodness counting checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np
from scipy.special import gammaln, logsumexp

from .code import ERASURE, CodeSpec, chunk_distances
from .gf2 import AffineSet
from .params import ErasureParams, FlipParams
from .trajectory import eval_reference

UNIQUE = "Unique"
AMBIGUOUS = "Ambiguous"
NO_DECODE = "NoDecode"
DEFAULT_CAP_BITS = 24
_RADIUS_SLACK = 1e-9
_LN2 = math.log(2.0)


class ComplexityError(RuntimeError):
    """Brute-force enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class MessageList:
    """A decoded list, either explicit or as an affine subspace of messages."""

    messages: frozenset[int] | None = None
    affine: AffineSet | None = None

    @classmethod
    def of(cls, items: Iterable[int]) -> "MessageList":
        return cls(messages=frozenset(int(m) for m in items))

    @property
    def size(self) -> int:
        return len(self.messages) if self.messages is not None else self.affine.size

    def __contains__(self, m: int) -> bool:
        if self.messages is not None:
            return m in self.messages
        return self.affine.contains(m)

    def __iter__(self) -> Iterator[int]:
        if self.messages is not None:
            return iter(sorted(self.messages))
        return iter(self.affine.enumerate())


@dataclass(frozen=True)
class Consistency:
    kind: str  # Unique | None | Ambiguous
    message: int | None
    consistent: int

    @property
    def is_none(self) -> bool:
        return self.kind == "None"


@dataclass
class DecodeOutcome:
    result: str
    message: int | None = None
    t_stop: int | None = None
    iterations: int = 0
    list_sizes: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        msg = self.message
        # messages wider than a double mantissa are written as strings
        if msg is not None and msg >= 2**53:
            msg = str(msg)
        return {"result": self.result, "message": msg, "t_stop": self.t_stop,
                "iterations": self.iterations, "list_sizes": list(self.list_sizes)}


def _guard(spec: CodeSpec, chunks: int, cap_bits: int) -> None:
    bits = spec.msg_bits + chunks * spec.secret_bits
    if spec.family != "prf":
        raise ComplexityError("brute-force decoding needs the prf codebook family")
    if bits > cap_bits:
        raise ComplexityError(f"enumeration over {bits} bits exceeds the cap of {cap_bits}")


def _check_grid(spec: CodeSpec, t: int) -> int:
    if t <= 0 or t >= spec.n or t % spec.chunk_len:
        raise ValueError(f"t={t} is not a chunk end")
    return t // spec.chunk_len


def best_distances(spec: CodeSpec, received) -> np.ndarray:
    """``B[m, c]``: distance from chunk c of the received word to the closest chunk of message m."""
    return chunk_distances(spec, received).min(axis=2)


def list_decode_left(spec: CodeSpec, received, t: int, radius: float,
                     cap_bits: int = DEFAULT_CAP_BITS, _best: np.ndarray | None = None) -> MessageList:
    """Messages with some secret tuple whose left codeword lies within ``radius`` of the prefix.

    The minimum over secret tuples splits into independent per-chunk minima,
    so the search costs one pass over the chunk tables.
    """
    k = _check_grid(spec, t)
    _guard(spec, k, cap_bits)
    best = best_distances(spec, received) if _best is None else _best
    left = best[:, :k].sum(axis=1)
    return MessageList.of(np.flatnonzero(left <= radius + _RADIUS_SLACK))


def consistency_decode_right(spec: CodeSpec, received, t: int, mlist: MessageList, radius: float,
                             cap_bits: int = DEFAULT_CAP_BITS, _best: np.ndarray | None = None) -> Consistency:
    k = _check_grid(spec, t)
    _guard(spec, spec.num_chunks - k, cap_bits)
    if mlist.size == 0:
        return Consistency("None", None, 0)
    best = best_distances(spec, received) if _best is None else _best
    right = best[:, k:].sum(axis=1)
    ok = [m for m in mlist if right[m] <= radius + _RADIUS_SLACK]
    if not ok:
        return Consistency("None", None, 0)
    if len(ok) == 1:
        return Consistency(UNIQUE, ok[0], 1)
    return Consistency(AMBIGUOUS, None, len(ok))


def list_radius(params: FlipParams, t: int) -> float:
    return t * eval_reference(params, t).p_hat_t


def consistency_radius(params: FlipParams, t: int) -> float:
    return (params.n - t) / 2.0 - (params.n - t) * params.eps**2 / 8.0


def decode_flip(spec: CodeSpec, params: FlipParams, received, cap_bits: int = DEFAULT_CAP_BITS) -> DecodeOutcome:
    """Scan chunk ends from t0; stop at the first unique or ambiguous consistency result."""
    y = np.asarray(received)
    if np.any(y == ERASURE) or np.any(y > 1):
        raise ValueError("bit-flip decoder expects a word over {0, 1}")
    if spec.n != params.n or spec.num_chunks != params.num_chunks:
        raise ValueError("code and parameters disagree on the chunk grid")
    best = best_distances(spec, y)
    out = DecodeOutcome(NO_DECODE)
    for t in range(params.t0, params.n, params.chunk_len):
        out.iterations += 1
        mlist = list_decode_left(spec, y, t, list_radius(params, t), cap_bits, _best=best)
        out.list_sizes.append(mlist.size)
        res = consistency_decode_right(spec, y, t, mlist, consistency_radius(params, t), cap_bits, _best=best)
        if res.kind == UNIQUE:
            out.result, out.message, out.t_stop = UNIQUE, res.message, t
            return out
        if res.kind == AMBIGUOUS:
            out.result, out.t_stop = AMBIGUOUS, t
            return out
    return out


# -- goodness counting ----------------------------------------------------


def log2_binomial_tail(N: int, r: float) -> float:
    """log2 of sum_{i <= r} C(N, i), by log-gamma terms and a log-sum-exp."""
    top = math.floor(r + _RADIUS_SLACK)
    if top < 0:
        return float("-inf")
    top = min(top, N)
    i = np.arange(top + 1, dtype=float)
    terms = gammaln(N + 1.0) - gammaln(i + 1.0) - gammaln(N - i + 1.0)
    return float(logsumexp(terms) / _LN2)


@dataclass
class GoodnessReport:
    channel: str
    t: int
    radius: float
    counting_lhs: float
    counting_rhs: float
    counting_holds: bool
    exponent_sign: int
    exponent_log2_abs: float
    exponent_bound_log2: float
    exponent_holds: bool

    @property
    def counting_margin(self) -> float:
        return self.counting_rhs - self.counting_lhs

    @property
    def passed(self) -> bool:
        return self.counting_holds and self.exponent_holds

    def failures(self) -> list[str]:
        out = []
        if not self.counting_holds:
            out.append(f"counting at t={self.t}: lhs {self.counting_lhs!r} > rhs {self.counting_rhs!r}")
        if not self.exponent_holds:
            sign = "+" if self.exponent_sign > 0 else "-"
            out.append(f"partition exponent at t={self.t}: sign {sign}, log2|value| {self.exponent_log2_abs!r}"
                       f" vs -n^3 (log2 {self.exponent_bound_log2!r})")
        return out

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["counting_margin"] = self.counting_margin
        d["passed"] = self.passed
        return d


def goodness_check(params: FlipParams | ErasureParams, t: int, list_size_cap: int | None = None,
                   delta: float | None = None) -> GoodnessReport:
    """Log-domain checks of the forbidden-region count and the secret-partition exponent.

    Counting: log2 L + log2 sum_{i<=r} C(n-t, i) <= (n-t)(1-delta), where
    L = 2^(nS l) * cap and l is the number of right chunks.

    Partition: 2^(nS) (H(sigma) - n theta delta sigma) < -n^3. The product is
    kept as a sign and a log2 magnitude so huge 2^(nS) factors do not overflow.
    """
    n = params.n
    if t <= 0 or t >= n or t % params.chunk_len:
        raise ValueError(f"t={t} is not a chunk end")
    if list_size_cap is None:
        list_size_cap = math.ceil(8.0 / params.eps)
    d = params.delta if delta is None else float(delta)
    N = n - t
    if isinstance(params, FlipParams):
        radius = N / 2.0 - N * params.eps**2 / 8.0
    else:
        radius = N / 2.0 - N * params.theta / 2.0
    l = N // params.chunk_len
    lhs = n * params.S * l + math.log2(list_size_cap) + log2_binomial_tail(N, radius)
    rhs = N * (1.0 - d)

    # 2^(nS) (H(sigma) - c sigma) = 2^(3nS/4) * B with sigma = 2^(-nS/4) and
    # B = log2(1/sigma) + g(sigma) - c, where g(sigma) = -(1-sigma) log2(1-sigma) / sigma
    log_inv_sigma = n * params.S / 4.0
    sigma = 2.0 ** -log_inv_sigma
    if sigma == 0.0:
        g = 1.0 / _LN2
    elif sigma == 1.0:
        g = 0.0
    else:
        g = -(1.0 - sigma) * math.log1p(-sigma) / (sigma * _LN2)
    B = log_inv_sigma + g - params.chunk_len * d
    bound = 3.0 * math.log2(n)
    sign = (B > 0) - (B < 0)
    mag = 0.75 * n * params.S + math.log2(abs(B)) if B else float("-inf")
    holds = sign < 0 and mag > bound
    return GoodnessReport(params.channel, t, radius, lhs, rhs, lhs <= rhs, sign, mag, bound, holds)
