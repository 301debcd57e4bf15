"""Binary entropy, the entropy-gap bounds and the two capacity formulas."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

DEFAULT_TOL = 1e-9
GRID_STEP = 1e-6
_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


class MinimandPoint(NamedTuple):
    p_bar_opt: float
    alpha: float
    value: float


class EntropyGap(NamedTuple):
    lhs: float
    rhs_log: float
    rhs_sqrt: float
    holds_log: bool
    holds_sqrt: bool


def _entropy(q):
    q = np.asarray(q, dtype=float)
    out = np.zeros_like(q)
    inner = (q > 0.0) & (q < 1.0)
    qi = q[inner]
    out[inner] = -qi * np.log2(qi) - (1.0 - qi) * np.log2(1.0 - qi)
    return out


def binary_entropy(q):
    """H(q) in bits with 0 log 0 = 0. Accepts scalars or arrays."""
    arr = np.asarray(q, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"binary entropy is defined on [0, 1], got {q!r}")
    out = _entropy(arr)
    if out.ndim == 0:
        return float(out)
    return out


def entropy_gap_check(q: float, gamma: float) -> EntropyGap:
    """Evaluate H(q+g) against H(q) + 2g log(1/g) and H(q) + 2 sqrt(g).

    The square-root form is only a valid bound for ``gamma < 1/16``; the flag
    is still reported outside that range.
    """
    if not 0.0 <= q < 0.5:
        raise ValueError(f"q must lie in [0, 1/2), got {q}")
    if not 0.0 < gamma < 0.5:
        raise ValueError(f"gamma must lie in (0, 1/2), got {gamma}")
    if q + gamma > 1.0:
        raise ValueError("q + gamma must not exceed 1")
    lhs = binary_entropy(q + gamma)
    hq = binary_entropy(q)
    rhs_log = hq + 2.0 * gamma * np.log2(1.0 / gamma)
    rhs_sqrt = hq + 2.0 * np.sqrt(gamma)
    return EntropyGap(lhs, float(rhs_log), float(rhs_sqrt), bool(lhs < rhs_log), bool(lhs < rhs_sqrt))


def _minimand(p: float, p_bar):
    alpha = 1.0 - 4.0 * (p - p_bar)
    return alpha * (1.0 - _entropy(p_bar / alpha))


def flip_minimand(p: float, p_bar_opt: float) -> MinimandPoint:
    if not 0.0 <= p < 0.25:
        raise ValueError(f"minimand requires 0 <= p < 1/4, got {p}")
    if not 0.0 <= p_bar_opt <= p:
        raise ValueError(f"p_bar_opt must lie in [0, p], got {p_bar_opt}")
    alpha = 1.0 - 4.0 * (p - p_bar_opt)
    value = alpha * (1.0 - binary_entropy(p_bar_opt / alpha))
    return MinimandPoint(float(p_bar_opt), float(alpha), float(value))


def _golden(f, lo: float, hi: float, xtol: float) -> float:
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def flip_capacity(p: float, tol: float = DEFAULT_TOL) -> tuple[float, MinimandPoint | None]:
    """Capacity of the causal bit-flip channel and the minimizing point.

    A dense grid over ``[0, p]`` locates the bracket holding the global
    minimum, which golden-section search then refines. Both endpoints are
    always evaluated.
    """
    if p < 0.0:
        raise ValueError(f"p must be non-negative, got {p}")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if p >= 0.25:
        return 0.0, None
    if p == 0.0:
        return 1.0, flip_minimand(0.0, 0.0)

    num = max(int(np.ceil(p / GRID_STEP)), 2) + 1
    grid = np.linspace(0.0, p, num)
    values = _minimand(p, grid)
    i = int(np.argmin(values))
    best_x, best_v = float(grid[i]), float(values[i])

    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, num - 1)]
    scalar = lambda x: float(_minimand(p, np.asarray(x)))
    # f'' is O(1) in the bracket, so an x-tolerance of sqrt(tol) is enough
    x = _golden(scalar, float(lo), float(hi), xtol=min(np.sqrt(tol), GRID_STEP) * 1e-3)
    v = scalar(x)
    if v < best_v:
        best_x, best_v = x, v
    point = flip_minimand(p, min(max(best_x, 0.0), p))
    return point.value, point


def erase_capacity(p: float) -> float:
    if p < 0.0:
        raise ValueError(f"p must be non-negative, got {p}")
    if p >= 0.5:
        return 0.0
    return 1.0 - 2.0 * p
