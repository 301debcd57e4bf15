"""Tiny GF(2) linear algebra on Python-int bit rows.

Each equation is a pair ``(row, rhs)`` where bit ``j`` of ``row`` is the
coefficient of variable ``j``. Elimination keeps an echelon basis keyed by
the highest set bit, so variables with higher indices are eliminated first.
Placing secret variables above message variables therefore exposes the
message-only constraints directly (see :func:`project_low`).
"""

from __future__ import annotations

from dataclasses import dataclass, field


def parity(x: int) -> int:
    return bin(x).count("1") & 1


@dataclass
class EchelonSystem:
    basis: dict[int, tuple[int, int]] = field(default_factory=dict)
    consistent: bool = True

    def add(self, row: int, rhs: int) -> None:
        rhs &= 1
        while row:
            hb = row.bit_length() - 1
            hit = self.basis.get(hb)
            if hit is None:
                self.basis[hb] = (row, rhs)
                return
            row ^= hit[0]
            rhs ^= hit[1]
        if rhs:
            self.consistent = False

    def extend(self, equations) -> "EchelonSystem":
        for row, rhs in equations:
            self.add(row, rhs)
        return self

    def copy(self) -> "EchelonSystem":
        return EchelonSystem(dict(self.basis), self.consistent)

    @property
    def rank(self) -> int:
        return len(self.basis)


@dataclass(frozen=True)
class AffineSet:
    """Solutions of the projected system on the low ``num_vars`` variables."""

    num_vars: int
    constraints: tuple[tuple[int, int], ...]  # echelon rows, all below num_vars
    empty: bool

    @property
    def dimension(self) -> int:
        return -1 if self.empty else self.num_vars - len(self.constraints)

    @property
    def size(self) -> int:
        return 0 if self.empty else 1 << self.dimension

    def particular(self) -> int | None:
        if self.empty:
            return None
        x = 0
        for row, rhs in sorted(self.constraints, key=lambda e: e[0].bit_length()):
            hb = row.bit_length() - 1
            rest = row & ~(1 << hb)
            if parity(rest & x) ^ rhs:
                x |= 1 << hb
        return x

    def contains(self, x: int) -> bool:
        return not self.empty and all(parity(row & x) == rhs for row, rhs in self.constraints)

    def enumerate(self, limit: int = 1 << 16) -> list[int]:
        if self.empty:
            return []
        if self.size > limit:
            raise OverflowError(f"affine set has {self.size} elements, above limit {limit}")
        pivots = {row.bit_length() - 1 for row, _ in self.constraints}
        free = [j for j in range(self.num_vars) if j not in pivots]
        out = []
        for mask in range(1 << len(free)):
            x = 0
            for b, j in enumerate(free):
                if mask >> b & 1:
                    x |= 1 << j
            # resolve pivots from low to high so each sees settled lower bits
            for row, rhs in sorted(self.constraints, key=lambda e: e[0].bit_length()):
                hb = row.bit_length() - 1
                x &= ~(1 << hb)
                if parity((row & ~(1 << hb)) & x) ^ rhs:
                    x |= 1 << hb
            out.append(x)
        return sorted(out)


def project_low(system: EchelonSystem, num_vars: int) -> AffineSet:
    """Set of assignments to variables ``0..num_vars-1`` that extend to a full solution."""
    if not system.consistent:
        return AffineSet(num_vars, (), True)
    low = tuple((r, b) for hb, (r, b) in system.basis.items() if hb < num_vars)
    return AffineSet(num_vars, low, False)
