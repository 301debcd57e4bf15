"""Scheme parameters for the bit-flip and erasure constructions.

``paper-exact`` mode derives every quantity from ``(n, p, eps)`` using the
standard couplings. ``desk-scale`` mode accepts overrides for the chunk count
and the message/secret rates so that brute-force decoding stays tractable;
such parameter sets are labeled as such wherever they are serialized.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Mapping

from .info_math import flip_capacity

PAPER_EXACT = "paper-exact"
DESK_SCALE = "desk-scale"
MODES = (PAPER_EXACT, DESK_SCALE)
OVERRIDABLE = ("num_chunks", "R", "S")

# absorbs float noise such as 0.1246 * 40000 = 4983.999...
_SNAP = 1e-9


class ParameterError(ValueError):
    """Raised when a parameter precondition or coupling cannot be met."""


class DivisibilityError(ParameterError):
    pass


def _snap_floor(x: float) -> int:
    return int(math.floor(x + _SNAP))


def _snap_ceil(x: float) -> int:
    return int(math.ceil(x - _SNAP))


@dataclass(frozen=True)
class FlipParams:
    n: int
    p: float
    eps: float
    p_prime: float
    theta: float
    num_chunks: int
    chunk_len: int
    R: float
    S: float
    sigma: float
    delta: float
    t0: int
    budget_bits: int
    mode: str
    overridden: tuple[str, ...] = ()

    channel = "flip"

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["overridden"] = list(self.overridden)
        d["channel"] = self.channel
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @property
    def chunk_ends(self) -> list[int]:
        return chunk_grid(self.n, self.chunk_len)


@dataclass(frozen=True)
class ErasureParams:
    n: int
    p: float
    eps: float
    theta: float
    num_chunks: int
    chunk_len: int
    R: float
    S: float
    sigma: float
    delta: float
    budget_bits: int
    mode: str
    overridden: tuple[str, ...] = ()

    channel = "erase"

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["overridden"] = list(self.overridden)
        d["channel"] = self.channel
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @property
    def chunk_ends(self) -> list[int]:
        return chunk_grid(self.n, self.chunk_len)


def chunk_grid(n: int, chunk_len: int) -> list[int]:
    """Chunk ends available to the decoder: chunk_len, 2 chunk_len, ..., n - chunk_len."""
    return list(range(chunk_len, n, chunk_len))


def params_from_dict(d: Mapping[str, Any]) -> FlipParams | ErasureParams:
    d = dict(d)
    channel = d.pop("channel", "flip" if "p_prime" in d else "erase")
    cls = FlipParams if channel == "flip" else ErasureParams
    names = {f.name for f in fields(cls)}
    kwargs = {k: v for k, v in d.items() if k in names}
    kwargs["overridden"] = tuple(kwargs.get("overridden", ()))
    return cls(**kwargs)


def params_from_json(text: str) -> FlipParams | ErasureParams:
    return params_from_dict(json.loads(text))


def _check_mode(mode: str, overrides: Mapping[str, Any] | None) -> dict[str, Any]:
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(OVERRIDABLE)
    if unknown:
        raise ParameterError(f"cannot override {sorted(unknown)}; allowed: {OVERRIDABLE}")
    if overrides and mode == PAPER_EXACT:
        raise ParameterError("overrides are only accepted in desk-scale mode")
    return overrides


def _chunking(n: int, theta_raw: float, overrides: dict[str, Any]) -> tuple[int, int, float]:
    if "num_chunks" in overrides:
        num_chunks = int(overrides["num_chunks"])
    else:
        num_chunks = max(int(round(1.0 / theta_raw)), 1)
    if num_chunks < 1:
        raise ParameterError("num_chunks must be positive")
    if n % num_chunks:
        raise DivisibilityError(f"n={n} is not divisible by num_chunks={num_chunks}")
    return num_chunks, n // num_chunks, 1.0 / num_chunks


def derive_flip_params(
    n: int,
    p: float | None = None,
    eps: float = 0.08,
    mode: str = PAPER_EXACT,
    overrides: Mapping[str, Any] | None = None,
    *,
    p_prime: float | None = None,
    tol: float = 1e-9,
) -> FlipParams:
    """Derive the bit-flip parameter set.

    ``p`` is the adversary's actual budget fraction; ``p_prime = p + eps**2/16``
    is the inflated value the construction is designed for. Exactly one of
    the two may be given.
    """
    overrides = _check_mode(mode, overrides)
    if (p is None) == (p_prime is None):
        raise ParameterError("give exactly one of p or p_prime")
    if eps <= 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    if p_prime is None:
        p_prime = p + eps**2 / 16.0
    else:
        p = p_prime - eps**2 / 16.0
    if n <= 0:
        raise ParameterError("n must be positive")
    if not 0.0 < p < 0.25:
        raise ParameterError(f"budget fraction p must lie in (0, 1/4), got {p}")
    if not p_prime < 0.25:
        raise ParameterError(f"p' = p + eps^2/16 must be below 1/4, got {p_prime}")
    if not eps < 1.0 - 4.0 * p_prime:
        raise ParameterError(f"eps={eps} must be below 1 - 4p' = {1.0 - 4.0 * p_prime}")

    theta_raw = eps**2 * (1.0 - 4.0 * p_prime) / 4.0
    num_chunks, chunk_len, theta = _chunking(n, theta_raw, overrides)

    R = float(overrides["R"]) if "R" in overrides else flip_capacity(p_prime, tol)[0] - eps
    S = float(overrides["S"]) if "S" in overrides else theta**3 / 8.0
    k0 = _snap_ceil((1.0 - 4.0 * p_prime) / theta)
    return FlipParams(
        n=n,
        p=float(p),
        eps=float(eps),
        p_prime=float(p_prime),
        theta=theta,
        num_chunks=num_chunks,
        chunk_len=chunk_len,
        R=R,
        S=S,
        sigma=2.0 ** (-n * S / 4.0),
        delta=theta**2 / 4.0,
        t0=k0 * chunk_len,
        budget_bits=_snap_floor(p * n),
        mode=mode,
        overridden=tuple(k for k in OVERRIDABLE if k in overrides),
    )


def derive_erase_params(
    n: int,
    p: float,
    eps: float,
    mode: str = PAPER_EXACT,
    overrides: Mapping[str, Any] | None = None,
) -> ErasureParams:
    overrides = _check_mode(mode, overrides)
    if n <= 0:
        raise ParameterError("n must be positive")
    if not 0.0 <= p < 0.5:
        raise ParameterError(f"erasure fraction p must lie in [0, 1/2), got {p}")
    if not 0.0 < eps < 1.0 - 2.0 * p:
        raise ParameterError(f"eps={eps} must lie in (0, 1 - 2p) = (0, {1.0 - 2.0 * p})")

    num_chunks, chunk_len, theta = _chunking(n, eps / 4.0, overrides)
    R = float(overrides["R"]) if "R" in overrides else 1.0 - 2.0 * p - eps
    S = float(overrides["S"]) if "S" in overrides else theta**3 / 8.0
    return ErasureParams(
        n=n,
        p=float(p),
        eps=float(eps),
        theta=theta,
        num_chunks=num_chunks,
        chunk_len=chunk_len,
        R=R,
        S=S,
        sigma=2.0 ** (-n * S / 4.0),
        delta=theta**2 / 4.0,
        budget_bits=_snap_floor(p * n),
        mode=mode,
        overridden=tuple(k for k in OVERRIDABLE if k in overrides),
    )


@dataclass(frozen=True)
class CouplingStatus:
    name: str
    status: str  # exact | rounded | overridden | red
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "red"


@dataclass(frozen=True)
class ValidationReport:
    mode: str
    couplings: tuple[CouplingStatus, ...]

    @property
    def all_green(self) -> bool:
        return all(c.ok for c in self.couplings)

    def by_name(self) -> dict[str, CouplingStatus]:
        return {c.name: c for c in self.couplings}

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "all_green": self.all_green,
            "couplings": [asdict(c) for c in self.couplings],
        }


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-15)


def validate_params(params: FlipParams | ErasureParams, tol: float = 1e-9) -> ValidationReport:
    """Re-check each coupling of the parameter table against the stored fields."""
    out: list[CouplingStatus] = []
    over = set(params.overridden)

    def add(name: str, holds: bool, rounded: bool = False, detail: str = "") -> None:
        if name in over:
            out.append(CouplingStatus(name, "overridden", detail))
        elif not holds:
            out.append(CouplingStatus(name, "red", detail))
        else:
            out.append(CouplingStatus(name, "rounded" if rounded else "exact", detail))

    p = params
    add("chunking", p.num_chunks * p.chunk_len == p.n, detail=f"{p.num_chunks} x {p.chunk_len}")
    add("budget_bits", p.budget_bits == _snap_floor(p.p * p.n))
    add("S", _close(p.S, p.theta**3 / 8.0), detail=f"S={p.S!r}")
    add("sigma", _close(p.sigma, 2.0 ** (-p.n * p.S / 4.0)))
    add("delta", _close(p.delta, p.theta**2 / 4.0))

    if isinstance(p, FlipParams):
        add("p_prime", _close(p.p_prime, p.p + p.eps**2 / 16.0))
        theta_raw = p.eps**2 * (1.0 - 4.0 * p.p_prime) / 4.0
        exact = _close(theta_raw, p.theta)
        ok = "num_chunks" in over or p.num_chunks == max(int(round(1.0 / theta_raw)), 1)
        add("num_chunks", ok and _close(p.theta * p.num_chunks, 1.0), rounded=not exact,
            detail=f"theta_raw={theta_raw!r}")
        add("R", _close(p.R, flip_capacity(p.p_prime, tol)[0] - p.eps), detail=f"R={p.R!r}")
        k0 = _snap_ceil((1.0 - 4.0 * p.p_prime) / p.theta)
        lo = p.n * (1.0 - 4.0 * p.p_prime)
        add("t0", p.t0 == k0 * p.chunk_len and p.t0 >= lo - _SNAP * p.n and p.t0 % p.chunk_len == 0,
            detail=f"t0={p.t0}, n(1-4p')={lo!r}")
        margin = 1.0 - 4.0 * p.p_prime - p.eps
        out.append(CouplingStatus("eps_precondition", "exact" if margin > 0 else "red",
                                  f"1-4p'-eps={margin!r}"))
        out.append(CouplingStatus("rate_positive", "exact" if p.R > 0 else "red", f"R={p.R!r}"))
    else:
        exact = _close(p.theta, p.eps / 4.0)
        ok = "num_chunks" in over or p.num_chunks == max(int(round(4.0 / p.eps)), 1)
        add("num_chunks", ok, rounded=not exact, detail=f"theta={p.theta!r}, eps/4={p.eps / 4.0!r}")
        add("R", _close(p.R, 1.0 - 2.0 * p.p - p.eps), detail=f"R={p.R!r}")
        margin = 1.0 - 2.0 * p.p - p.eps
        out.append(CouplingStatus("eps_precondition", "exact" if margin > 0 and p.eps > 0 else "red",
                                  f"1-2p-eps={margin!r}"))
    return ValidationReport(p.mode, tuple(out))
