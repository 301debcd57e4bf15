"""Causal adversaries for the bit-flip and erasure channels.

A strategy is asked, bit by bit, whether to corrupt the current symbol. It
sees the transmitted prefix ``x[:i+1]``, the received prefix ``y[:i]``, its
remaining budget and the public parameters, and nothing else. The channel
wrapper enforces the budget.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Callable, Protocol, Sequence

import numpy as np

from .code import ERASURE, CodeSpec, chunk_table
from .trajectory import AdversaryTrajectory

log = logging.getLogger(__name__)

FLIP = "flip"
ERASE = "erase"
CHANNELS = (FLIP, ERASE)
STRATEGY_NAMES = ("front", "back", "uniform", "traj:<file>", "greedy")


class StrategyError(ValueError):
    """Unknown or malformed strategy description."""


class Strategy(Protocol):
    name: str

    def reset(self, n: int, chunk_len: int, budget: int, channel: str, rng: np.random.Generator) -> None: ...

    def wants_corruption(self, i: int, x_prefix: np.ndarray, y_prefix: np.ndarray, remaining: int) -> bool: ...


class _Base:
    name = "base"

    def reset(self, n, chunk_len, budget, channel, rng=None):
        self.n, self.chunk_len, self.budget, self.channel = n, chunk_len, budget, channel
        self.rng = rng

    def to_dict(self) -> dict:
        return {"name": self.name}


class FrontLoad(_Base):
    """Spend the whole budget on the first bits."""

    name = "front"

    def wants_corruption(self, i, x_prefix, y_prefix, remaining):
        return i < self.budget


class BackLoad(_Base):
    """Keep the budget for the last bits."""

    name = "back"

    def wants_corruption(self, i, x_prefix, y_prefix, remaining):
        return i >= self.n - self.budget


class Uniform(_Base):
    """Spread the budget evenly: bit i is hit when floor((i+1)b/n) steps up."""

    name = "uniform"

    def wants_corruption(self, i, x_prefix, y_prefix, remaining):
        b, n = self.budget, self.n
        return (i + 1) * b // n > i * b // n


class TrajectoryFollower(_Base):
    """Match target cumulative counts at the chunk ends, corrupting early in each chunk."""

    name = "traj"

    def __init__(self, target: Sequence[int], source: str | None = None):
        self.target = [int(c) for c in target]
        self.source = source

    def reset(self, n, chunk_len, budget, channel, rng=None):
        super().reset(n, chunk_len, budget, channel, rng)
        if len(self.target) != n // chunk_len:
            raise StrategyError(f"target has {len(self.target)} chunk ends, expected {n // chunk_len}")
        self.used = 0

    def wants_corruption(self, i, x_prefix, y_prefix, remaining):
        want = self.used < self.target[i // self.chunk_len]
        if want and remaining > 0:
            self.used += 1
        return want

    def to_dict(self):
        return {"name": self.name, "source": self.source, "target": self.target}


class GreedyConfuser(_Base):
    """Corrupt bit i when that brings the received prefix closer to another message.

    Distance to a message is the minimum over its secret tuples of the
    Hamming distance between the prefixes (erased symbols count as matches).
    Ties keep the bit. Requires an enumerable codebook.
    """

    name = "greedy"

    def __init__(self, spec: CodeSpec, message: int):
        if spec.family != "prf":
            raise StrategyError("greedy strategy needs an enumerable (prf) codebook")
        self.spec = spec
        self.message = message

    def reset(self, n, chunk_len, budget, channel, rng=None):
        super().reset(n, chunk_len, budget, channel, rng)
        self.table = chunk_table(self.spec)
        others = np.ones(self.spec.num_messages, dtype=bool)
        others[self.message] = False
        self.others = np.flatnonzero(others)
        self.done = np.zeros(len(self.others), dtype=np.int64)
        self.cur = np.zeros((len(self.others), self.spec.num_secrets), dtype=np.int64)
        self.seen = 0

    def _cost(self, y: int, c: int, o: int) -> np.ndarray:
        if y == ERASURE:
            return np.zeros((len(self.others), self.spec.num_secrets), dtype=np.int64)
        return (self.table[self.others, c, :, o] != y).astype(np.int64)

    def wants_corruption(self, i, x_prefix, y_prefix, remaining):
        if len(self.others) == 0:
            return False
        self._sync(y_prefix)
        c, o = divmod(i, self.chunk_len)
        x = int(x_prefix[i])
        bad = ERASURE if self.channel == ERASE else 1 - x
        keep = (self.done + (self.cur + self._cost(x, c, o)).min(axis=1)).min()
        hit = (self.done + (self.cur + self._cost(bad, c, o)).min(axis=1)).min()
        return bool(hit < keep)

    def _sync(self, y_prefix):
        L = self.chunk_len
        while self.seen < len(y_prefix):
            j = self.seen
            c, o = divmod(j, L)
            self.cur += self._cost(int(y_prefix[j]), c, o)
            self.seen += 1
            if self.seen % L == 0:
                self.done += self.cur.min(axis=1)
                self.cur[:] = 0

    def to_dict(self):
        return {"name": self.name}


def adversary_step(strategy, i: int, x_prefix: np.ndarray, y_prefix: np.ndarray,
                   remaining: int, channel: str) -> tuple[int, bool]:
    """Output symbol for bit ``i`` and whether it was corrupted.

    A corruption request with no budget left is refused and logged; the bit
    passes through unchanged.
    """
    if remaining < 0:
        raise ValueError("remaining budget cannot be negative")
    if len(x_prefix) != i + 1 or len(y_prefix) != i:
        raise ValueError("prefix lengths are inconsistent with position i")
    x = int(x_prefix[i])
    if not strategy.wants_corruption(i, x_prefix, y_prefix, remaining):
        return x, False
    if remaining == 0:
        log.debug("strategy %s asked to corrupt bit %d with no budget left", strategy.name, i)
        return x, False
    return (ERASURE if channel == ERASE else 1 - x), True


class ChunkSource(Protocol):
    def chunk(self, j: int) -> np.ndarray: ...


class _ArraySource:
    def __init__(self, word, chunk_len):
        self.word = np.asarray(word, dtype=np.uint8)
        self.chunk_len = chunk_len

    def chunk(self, j):
        return self.word[j * self.chunk_len:(j + 1) * self.chunk_len]


def run_channel(source, strategy, n: int, chunk_len: int, budget: int, channel: str,
                rng: np.random.Generator | None = None) -> tuple[np.ndarray, AdversaryTrajectory]:
    """Stream a codeword through the adversary.

    ``source`` is either the full codeword or an object whose ``chunk(j)``
    returns chunk ``j`` (0-based); chunks are requested only when their first
    bit is about to be sent, so a source can draw each secret at that moment.
    """
    if channel not in CHANNELS:
        raise ValueError(f"channel must be one of {CHANNELS}")
    if not hasattr(source, "chunk"):
        if len(source) != n:
            raise ValueError(f"codeword length {len(source)} != n={n}")
        source = _ArraySource(source, chunk_len)
    strategy.reset(n, chunk_len, budget, channel, rng if rng is not None else np.random.default_rng(0))
    x = np.zeros(n, dtype=np.uint8)
    y = np.zeros(n, dtype=np.uint8)
    counts = []
    used = 0
    for j in range(n // chunk_len):
        block = np.asarray(source.chunk(j), dtype=np.uint8)
        if len(block) != chunk_len:
            raise ValueError(f"chunk {j} has length {len(block)}")
        base = j * chunk_len
        for o in range(chunk_len):
            i = base + o
            x[i] = block[o]
            sym, hit = adversary_step(strategy, i, x[: i + 1], y[:i], budget - used, channel)
            y[i] = sym
            used += hit
        counts.append(used)
    return y, AdversaryTrajectory.from_counts(counts, chunk_len)


def read_trajectory_file(path: str | Path) -> list[int]:
    """Cumulative counts from a CSV; takes the last column, skipping '#' lines and headers."""
    counts = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                counts.append(int(float(row[-1])))
            except ValueError:
                continue
    if not counts:
        raise StrategyError(f"no counts found in {path}")
    return counts


StrategyFactory = Callable[[CodeSpec, int], Strategy]


def parse_strategy(name: str) -> StrategyFactory:
    """Turn a CLI strategy string into a factory ``(spec, message) -> strategy``."""
    if name == "front":
        return lambda spec, m: FrontLoad()
    if name == "back":
        return lambda spec, m: BackLoad()
    if name == "uniform":
        return lambda spec, m: Uniform()
    if name == "greedy":
        return lambda spec, m: GreedyConfuser(spec, m)
    if name.startswith("traj:") and len(name) > 5:
        path = name[5:]
        target = read_trajectory_file(path)
        return lambda spec, m: TrajectoryFollower(target, path)
    raise StrategyError(f"unknown adversary {name!r}; expected one of {', '.join(STRATEGY_NAMES)}")
