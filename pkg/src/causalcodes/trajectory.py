"""Reference trajectories, trajectory classification and the t* search.

All positions ``t`` are bit counts; chunk ends are the multiples of
``chunk_len`` strictly below ``n``. Below the benchmark region the decoding
and energy-bounding trajectories are clamped to zero while ``p_bar`` is
reported raw (it may be negative there).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from .info_math import binary_entropy, flip_capacity
from .params import FlipParams


class PositionError(ValueError):
    """Raised for positions that are not chunk ends."""


class ClaimViolation(RuntimeError):
    """Raised when a guaranteed object (such as t*) is not found."""


class ReferencePoint(NamedTuple):
    t: int
    p_bar_t: float
    p_hat_t: float
    p_tilde_t: float
    alpha_t: float


def _check_position(params: FlipParams, t: int) -> None:
    if t <= 0 or t >= params.n or t % params.chunk_len:
        raise PositionError(f"t={t} is not a chunk end for n={params.n}, chunk_len={params.chunk_len}")


def _in_region(params: FlipParams, t) -> np.ndarray | bool:
    # t0 is the first chunk end >= n(1-4p'), so on the grid this matches the
    # definition without comparing against a rounded float threshold
    return np.asarray(t) >= params.t0


def reference_arrays(params: FlipParams, t) -> dict[str, np.ndarray]:
    """Vectorized p_bar, p_hat (both forms), p_tilde and alpha at positions ``t``."""
    t = np.asarray(t, dtype=float)
    n, pp, eps = float(params.n), params.p_prime, params.eps
    p_bar = pp - 0.25 + t / (4.0 * n)
    alpha = t / n
    region = _in_region(params, t)
    e2 = eps * eps
    two_term = p_bar / alpha + e2 / (16.0 * alpha**2)
    closed = (n * n * e2 / 16.0) / t**2 - n * (1.0 - 4.0 * pp) / (4.0 * t) + 0.25
    tilde = p_bar / alpha + (n - t) * e2 / (16.0 * t)
    return {
        "t": t,
        "p_bar": p_bar,
        "alpha": alpha,
        "p_hat": np.where(region, two_term, 0.0),
        "p_hat_closed": np.where(region, closed, 0.0),
        "p_tilde": np.where(region, tilde, 0.0),
    }


def eval_reference(params: FlipParams, t: int, allow_off_grid: bool = False) -> ReferencePoint:
    if not allow_off_grid:
        _check_position(params, t)
    a = reference_arrays(params, [t])
    return ReferencePoint(int(t), float(a["p_bar"][0]), float(a["p_hat"][0]),
                          float(a["p_tilde"][0]), float(a["alpha"][0]))


@dataclass(frozen=True)
class AdversaryTrajectory:
    """Cumulative corruption counts at every chunk boundary j * chunk_len, j = 1..num_chunks."""

    counts: tuple[int, ...]
    chunk_len: int

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 1 or len(c) == 0:
            raise ValueError("counts must be a non-empty 1-d sequence")
        inc = np.diff(np.concatenate([[0], c]))
        if np.any(inc < 0):
            raise ValueError("cumulative counts must be nondecreasing")
        if np.any(inc > self.chunk_len):
            raise ValueError("a chunk cannot hold more corruptions than its length")

    @classmethod
    def from_counts(cls, counts: Iterable[int], chunk_len: int) -> "AdversaryTrajectory":
        return cls(tuple(int(c) for c in counts), int(chunk_len))

    @classmethod
    def from_pattern(cls, corrupted, chunk_len: int) -> "AdversaryTrajectory":
        """Build from a per-bit 0/1 corruption indicator."""
        mask = np.asarray(corrupted, dtype=np.int64)
        per_chunk = mask.reshape(-1, chunk_len).sum(axis=1)
        return cls.from_counts(np.cumsum(per_chunk), chunk_len)

    @property
    def n(self) -> int:
        return len(self.counts) * self.chunk_len

    @property
    def total(self) -> int:
        return self.counts[-1]

    def count_at(self, t: int) -> int:
        if t == 0:
            return 0
        if t % self.chunk_len or not 0 < t <= self.n:
            raise PositionError(f"t={t} is not a chunk boundary")
        return self.counts[t // self.chunk_len - 1]

    def fraction_at(self, t: int) -> float:
        return self.count_at(t) / t

    def within_budget(self, budget_bits: int) -> bool:
        return self.total <= budget_bits


def classify_type(traj: AdversaryTrajectory, params: FlipParams) -> str:
    """``"High"`` if p_{t0} >= p_tilde_{t0}, else ``"Low"``."""
    ref = eval_reference(params, params.t0)
    return "High" if traj.fraction_at(params.t0) >= ref.p_tilde_t else "Low"


def find_t_star(traj: AdversaryTrajectory, params: FlipParams) -> int:
    """Chunk end at which the decoding trajectory first dominates the realized one.

    Low type trajectories stop at t0. For High type the first chunk end
    t >= t0 with p_t <= p_hat_t is returned; when t > t0 its predecessor
    satisfies p > p_hat by construction of the scan.
    """
    if traj.n != params.n or traj.chunk_len != params.chunk_len:
        raise ValueError("trajectory does not match the parameter grid")
    if classify_type(traj, params) == "Low":
        return params.t0
    ends = np.arange(params.t0, params.n, params.chunk_len)
    ref = reference_arrays(params, ends)
    counts = np.asarray(traj.counts, dtype=float)[ends // params.chunk_len - 1]
    below = counts / ends <= ref["p_hat"]
    hit = np.flatnonzero(below)
    if len(hit) == 0:
        raise ClaimViolation("no intersection with the decoding trajectory before n - chunk_len")
    return int(ends[hit[0]])


def suffix_fraction(traj: AdversaryTrajectory, params: FlipParams, t: int) -> float:
    """Largest fraction of the last n - t bits the adversary can still corrupt."""
    _check_position(params, t)
    return (params.budget_bits - traj.count_at(t)) / (params.n - t)


def energy_threshold(params: FlipParams) -> float:
    return 0.25 - params.eps**2 / 16.0


# -- random trajectories --------------------------------------------------


def sample_trajectories(params: FlipParams, count: int, rng: np.random.Generator,
                        kind: str = "mixed") -> np.ndarray:
    """Random within-budget cumulative-count arrays, shape ``(count, num_chunks)``.

    ``uniform-increments`` draws i.i.d. per-chunk increments from
    ``{0..chunk_len}`` and truncates at the budget; at full-scale sizes this
    spends the whole budget long before t0, so ``mixed`` alternates it with
    a family whose per-chunk rate, start chunk and budget share are random,
    which produces both High and Low types.
    """
    N, L, B = params.num_chunks, params.chunk_len, params.budget_bits
    if kind == "uniform-increments":
        inc = rng.integers(0, L + 1, size=(count, N))
    elif kind == "scaled":
        caps = rng.integers(0, L + 1, size=(count, 1))
        starts = rng.integers(0, N, size=(count, 1))
        u = rng.random((count, N))
        inc = np.floor(u * (caps + 1)).astype(np.int64)
        inc[np.arange(N)[None, :] < starts] = 0
        share = rng.random((count, 1))
        budgets = np.floor(share * B).astype(np.int64)
        cum = np.minimum(np.cumsum(inc, axis=1), budgets)
        return cum
    elif kind == "mixed":
        half = count // 2
        a = sample_trajectories(params, half, rng, "uniform-increments")
        b = sample_trajectories(params, count - half, rng, "scaled")
        return np.concatenate([a, b])
    else:
        raise ValueError(f"unknown trajectory sampler {kind!r}")
    return np.minimum(np.cumsum(inc, axis=1), B)


# -- claim verification ---------------------------------------------------


@dataclass
class CheckResult:
    claim: str
    passed: bool
    margin: float
    t: int | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"claim": self.claim, "passed": self.passed, "margin": self.margin,
                "t": self.t, "detail": self.detail}


@dataclass
class ClaimReport:
    params: dict
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"params": self.params, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks]}


def _worst(claim: str, ends: np.ndarray, margins: np.ndarray, tol: float = 0.0) -> CheckResult:
    i = int(np.argmin(margins))
    ok = bool(np.all(margins >= -tol))
    bad = np.flatnonzero(margins < -tol)
    detail = f"{len(ends)} chunk ends"
    if len(bad):
        detail += f"; first failure at t={int(ends[bad[0]])}"
        i = int(bad[0])
    return CheckResult(claim, ok, float(margins[i]), int(ends[i]), detail)


def claim2_margin_exact(params: FlipParams) -> Fraction:
    """p_hat_{n-L} (n-L) - n p' in exact rational arithmetic on the stored floats."""
    n = Fraction(params.n)
    t = n - params.chunk_len
    e2 = Fraction(params.eps) ** 2
    pp = Fraction(params.p_prime)
    p_hat = n * n * e2 / 16 / (t * t) - n * (1 - 4 * pp) / (4 * t) + Fraction(1, 4)
    return p_hat * t - n * pp


def verify_claims(params: FlipParams, capacity_tol: float = 1e-9) -> ClaimReport:
    """Evaluate the list-decoding, energy-bounding, intersection and gap conditions.

    Every chunk end from t0 to n - chunk_len is checked; the report carries
    the worst margin of each condition and the first failing position.
    """
    report = ClaimReport(params.to_dict())
    n, eps = params.n, params.eps
    ends = np.arange(params.t0, n, params.chunk_len)
    if len(ends) == 0:
        report.checks.append(CheckResult("grid", False, float("nan"), None, "no chunk end >= t0"))
        return report
    ref = reference_arrays(params, ends)
    t = ref["t"]
    p_hat = ref["p_hat"]

    con1 = t * (1.0 - binary_entropy(p_hat)) - n * eps / 2.0 - n * params.R
    report.checks.append(_worst("con-1 list decoding", ends, con1))

    con2 = (n - t) / 4.0 - (n * params.p_prime - t * p_hat + (n - t) * eps**2 / 16.0)
    report.checks.append(_worst("con-2 energy bounding", ends, con2))

    m2 = claim2_margin_exact(params)
    report.checks.append(CheckResult("claim-2 intersection", m2 >= 0, float(m2), n - params.chunk_len,
                                     f"exact margin {m2.numerator}/{m2.denominator}"))

    k = ends / params.chunk_len
    u = 1.0 / (k * params.theta)
    identity = eps**2 / 16.0 * (u * u - u + 1.0)
    diff = np.abs((p_hat - ref["p_tilde"]) - identity)
    report.checks.append(CheckResult("gap identity", bool(np.all(diff <= 1e-12)), float(diff.max()),
                                     int(ends[int(np.argmax(diff))]), "|p_hat - p_tilde - identity|"))
    report.checks.append(_worst("p_hat > p_tilde", ends, p_hat - ref["p_tilde"] - 1e-300))

    forms = np.abs(p_hat - ref["p_hat_closed"])
    report.checks.append(CheckResult("closed form", bool(np.all(forms <= 1e-12)), float(forms.max()),
                                     int(ends[int(np.argmax(forms))]), "two-term vs closed form"))

    # Low type at t0: worst case p_{t0} = 0
    t0 = params.t0
    low = (n - t0) / 4.0 - (n * params.p + (n - t0) * eps**2 / 16.0)
    report.checks.append(CheckResult("claim-5 low type at t0", low >= 0, float(low), t0))
    return report


def default_claim_grid() -> list[tuple[float, float]]:
    p_primes = [round(0.02 + 0.03 * i, 2) for i in range(8)] + [0.24]
    return [(pp, e) for pp in p_primes for e in (0.01, 0.02, 0.05)]


def grid_params(p_prime: float, eps: float, chunk_len: int = 1) -> FlipParams | None:
    """Fully coupled parameters with the smallest compatible n, or None if infeasible."""
    from .params import ParameterError, derive_flip_params

    if not eps < 1.0 - 4.0 * p_prime:
        return None
    theta = eps**2 * (1.0 - 4.0 * p_prime) / 4.0
    n = int(round(1.0 / theta)) * chunk_len
    try:
        params = derive_flip_params(n, eps=eps, p_prime=p_prime)
    except ParameterError:
        return None
    if params.R <= 0:
        return None
    return params


def trajectory_table(params: FlipParams, extra: dict[str, np.ndarray] | None = None) -> dict[str, np.ndarray]:
    ends = np.asarray(params.chunk_ends)
    ref = reference_arrays(params, ends)
    table = {"t": ends, "p_bar": ref["p_bar"], "p_hat": ref["p_hat"], "p_tilde": ref["p_tilde"]}
    for name, counts in (extra or {}).items():
        table[name] = np.asarray(counts, dtype=float)[ends // params.chunk_len - 1] / ends
    return table


def capacity_at(p_prime: float) -> float:
    return flip_capacity(p_prime)[0]
