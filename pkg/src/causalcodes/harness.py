"""Seeded Monte-Carlo experiments, goodness estimation and figure tables."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .adversary import parse_strategy, run_channel
from .code import CodeSpec, derive_chunk, random_bits, sample_message
from .decoder_erase import decode_erase
from .decoder_flip import AMBIGUOUS, UNIQUE, DecodeOutcome, decode_flip
from .info_math import binary_entropy, erase_capacity, flip_capacity
from .params import ErasureParams, FlipParams, params_from_dict
from .trajectory import (ClaimViolation, find_t_star, reference_arrays,
                         sample_trajectories)

FORMAT_VERSION = 1
CATEGORIES = ("unique-correct", "unique-wrong", "ambiguous", "no-decode", "error")


def _jsonable_int(x: int | None):
    return str(x) if x is not None and x >= 2**53 else x


@dataclass(frozen=True)
class TrialConfig:
    channel: str
    params: FlipParams | ErasureParams
    spec: CodeSpec
    strategy: str
    trial_count: int
    master_rng_seed: int
    cap_bits: int = 24
    adversary_budget: int | None = None  # None: the full budget_bits of params

    def __post_init__(self):
        if self.channel not in ("flip", "erase"):
            raise ValueError("channel must be 'flip' or 'erase'")
        if self.params.channel != self.channel:
            raise ValueError("parameter set belongs to the other channel")
        if self.spec.n != self.params.n or self.spec.num_chunks != self.params.num_chunks:
            raise ValueError("code and parameters disagree on the chunk grid")
        if self.trial_count < 0:
            raise ValueError("trial_count must be non-negative")
        if self.adversary_budget is not None and not 0 <= self.adversary_budget <= self.params.budget_bits:
            raise ValueError("adversary_budget must lie in [0, budget_bits]")
        parse_strategy(self.strategy)  # fail fast on bad names

    @property
    def budget(self) -> int:
        return self.params.budget_bits if self.adversary_budget is None else self.adversary_budget

    def to_dict(self) -> dict:
        return {"channel": self.channel, "params": self.params.to_dict(), "spec": self.spec.to_dict(),
                "strategy": self.strategy, "trial_count": self.trial_count,
                "master_rng_seed": self.master_rng_seed, "cap_bits": self.cap_bits,
                "adversary_budget": self.budget}

    @classmethod
    def from_dict(cls, d: dict) -> "TrialConfig":
        return cls(d["channel"], params_from_dict(d["params"]), CodeSpec.from_dict(d["spec"]),
                   d["strategy"], int(d["trial_count"]), int(d["master_rng_seed"]), int(d.get("cap_bits", 24)),
                   d.get("adversary_budget"))


class _CausalSource:
    """Hands out chunks one at a time, drawing each secret only when asked."""

    def __init__(self, spec: CodeSpec, message: int, rng: np.random.Generator):
        self.spec, self.message, self.rng = spec, message, rng
        self.secrets: list[int] = []

    def chunk(self, j: int) -> np.ndarray:
        if j != len(self.secrets):
            raise RuntimeError("chunks must be requested in order")
        s = random_bits(self.rng, self.spec.secret_bits)
        self.secrets.append(s)
        return derive_chunk(self.spec, j + 1, self.message, s)


def _category(outcome: DecodeOutcome, message: int) -> str:
    if outcome.result == UNIQUE:
        return "unique-correct" if outcome.message == message else "unique-wrong"
    if outcome.result == AMBIGUOUS:
        return "ambiguous"
    return "no-decode"


def run_trial(config: TrialConfig, trial_index: int) -> dict:
    """One end-to-end transmission. Errors are recorded in the record, not raised."""
    ss = np.random.SeedSequence([config.master_rng_seed, trial_index])
    msg_ss, secret_ss, adv_ss = ss.spawn(3)
    spec, params = config.spec, config.params
    message = sample_message(np.random.default_rng(msg_ss), spec)
    source = _CausalSource(spec, message, np.random.default_rng(secret_ss))
    strategy = parse_strategy(config.strategy)(spec, message)
    received, realized = run_channel(source, strategy, params.n, params.chunk_len, config.budget,
                                     config.channel, np.random.default_rng(adv_ss))
    record: dict[str, Any] = {"trial_index": trial_index, "message": _jsonable_int(message),
                              "corruptions": realized.total, "realized": list(realized.counts)}
    try:
        if config.channel == "flip":
            outcome = decode_flip(spec, params, received, config.cap_bits)
        else:
            outcome = decode_erase(spec, params, received, config.cap_bits)
    except Exception as exc:  # noqa: BLE001 - recorded for the report
        record.update(category="error", outcome=None, error=f"{type(exc).__name__}: {exc}")
        return record
    record.update(category=_category(outcome, message), outcome=outcome.to_dict(), error=None)
    if config.channel == "flip":
        try:
            record["analysis_t_star"] = find_t_star(realized, params)
        except (ClaimViolation, ValueError):
            record["analysis_t_star"] = None
    return record


def _run_range(args) -> list[dict]:
    config, indices = args
    return [run_trial(config, i) for i in indices]


@dataclass
class ExperimentReport:
    config: dict
    trials: list[dict]
    wall_time: float | None = None
    format_version: int = FORMAT_VERSION

    def counts(self) -> dict[str, int]:
        out = {c: 0 for c in CATEGORIES}
        for t in self.trials:
            out[t["category"]] += 1
        return out

    def rates(self) -> dict[str, float]:
        n = len(self.trials)
        return {c: (v / n if n else 0.0) for c, v in self.counts().items()}

    def standard_errors(self) -> dict[str, float]:
        n = len(self.trials)
        return {c: (math.sqrt(r * (1 - r) / n) if n else 0.0) for c, r in self.rates().items()}

    def trajectory_summary(self) -> dict[str, float]:
        totals = [t["corruptions"] for t in self.trials]
        if not totals:
            return {"mean_corruptions": 0.0, "min_corruptions": 0, "max_corruptions": 0}
        return {"mean_corruptions": float(np.mean(totals)), "min_corruptions": int(min(totals)),
                "max_corruptions": int(max(totals))}

    def to_dict(self) -> dict:
        d = {"format_version": self.format_version, "config": self.config, "counts": self.counts(),
             "rates": self.rates(), "standard_errors": self.standard_errors(),
             "trajectory_summary": self.trajectory_summary(), "trials": self.trials}
        if self.wall_time is not None:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @staticmethod
    def merge(reports: Sequence["ExperimentReport"]) -> "ExperimentReport":
        if not reports:
            raise ValueError("nothing to merge")
        first = reports[0].config
        if any(r.config != first for r in reports):
            raise ValueError("cannot merge reports of different configurations")
        trials = sorted((t for r in reports for t in r.trials), key=lambda t: t["trial_index"])
        idx = [t["trial_index"] for t in trials]
        if len(set(idx)) != len(idx):
            raise ValueError("overlapping trial indices")
        wall = None
        if all(r.wall_time is not None for r in reports):
            wall = sum(r.wall_time for r in reports)
        return ExperimentReport(first, trials, wall)


def run_experiment(config: TrialConfig, start: int = 0, stop: int | None = None, workers: int = 1,
                   timing: bool = False) -> ExperimentReport:
    """Run trials ``start..stop-1`` (default: all). Output is independent of ``workers``."""
    stop = config.trial_count if stop is None else stop
    indices = list(range(start, stop))
    t0 = time.perf_counter()
    if workers <= 1 or len(indices) < 2:
        trials = _run_range((config, indices))
    else:
        step = math.ceil(len(indices) / (workers * 4))
        parts = [(config, indices[i:i + step]) for i in range(0, len(indices), step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trials = [r for part in pool.map(_run_range, parts) for r in part]
    trials.sort(key=lambda t: t["trial_index"])
    wall = time.perf_counter() - t0 if timing else None
    return ExperimentReport(config.to_dict(), trials, wall)


# -- empirical goodness ---------------------------------------------------


def goodness_radius(params: FlipParams | ErasureParams, t: int) -> float:
    N = params.n - t
    if isinstance(params, FlipParams):
        return N / 2.0 - N * params.eps**2 / 8.0
    return N / 2.0 - N * params.theta / 2.0


def right_codeword(spec: CodeSpec, m: int, t: int, secrets: Sequence[int]) -> np.ndarray:
    k = t // spec.chunk_len
    return np.concatenate([derive_chunk(spec, k + j + 1, m, int(s)) for j, s in enumerate(secrets)])


def estimate_goodness(spec: CodeSpec, params: FlipParams | ErasureParams, t: int, decoy_list,
                      samples: int, rng: np.random.Generator, message: int = 0) -> float:
    """Fraction of sampled right secret tuples whose codeword is farther than the radius from every decoy."""
    if t <= 0 or t >= spec.n or t % spec.chunk_len:
        raise ValueError(f"t={t} is not a chunk end")
    decoys = [np.asarray(d, dtype=np.uint8) for d in decoy_list]
    if not decoys:
        return 1.0
    if any(len(d) != spec.n - t for d in decoys):
        raise ValueError("decoys must have length n - t")
    D = np.stack(decoys)
    r = goodness_radius(params, t)
    l = (spec.n - t) // spec.chunk_len
    good = 0
    for _ in range(samples):
        secrets = [random_bits(rng, spec.secret_bits) for _ in range(l)]
        x = right_codeword(spec, message, t, secrets)
        dist = (D != x[None, :]).sum(axis=1)
        good += bool(np.all(dist > r + 1e-9))
    return good / samples


# -- figure tables --------------------------------------------------------


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


def curve_tables(kind: str, **args) -> dict[str, np.ndarray]:
    """Column tables for the capacity and trajectory figures."""
    if kind in ("capacity_flip", "capacity_erase"):
        ps = _grid(args.get("p_min", 0.0), args.get("p_max", 0.5), args.get("step", 0.01))
        tol = args.get("tol", 1e-9)
        if kind == "capacity_flip":
            cap = np.array([flip_capacity(float(p), tol)[0] for p in ps])
        else:
            cap = np.array([erase_capacity(float(p)) for p in ps])
        one_minus_h = np.array([1.0 - binary_entropy(float(p)) if p <= 0.5 else 0.0 for p in ps])
        return {"p": ps, "capacity": cap, "one_minus_H": one_minus_h, "one_minus_p": np.clip(1.0 - ps, 0, 1)}
    if kind == "trajectories":
        params: FlipParams = args["params"]
        ends = np.asarray(params.chunk_ends)
        ref = reference_arrays(params, ends)
        table = {"t": ends, "p_bar": ref["p_bar"], "p_hat": ref["p_hat"], "p_tilde": ref["p_tilde"]}
        table.update(named_trajectories(params, seed=args.get("seed", 0)))
        return table
    raise ValueError(f"unknown table kind {kind!r}")


def named_trajectories(params: FlipParams, seed: int = 0) -> dict[str, np.ndarray]:
    """p_t at each decoder chunk end for the front, typical, back and uniform adversaries."""
    n, L, B = params.n, params.chunk_len, params.budget_bits
    ends = np.asarray(params.chunk_ends)
    front = np.minimum(ends, B)
    back = np.maximum(0, ends - (n - B))
    uniform = ends * B // n
    typical = sample_trajectories(params, 1, np.random.default_rng(seed), "scaled")[0]
    typical = typical[ends // L - 1]
    return {"front": front / ends, "typical": typical / ends, "back": back / ends, "uniform": uniform / ends}


def table_to_csv(table: dict[str, np.ndarray], echo: dict[str, Any]) -> str:
    """CSV text: '#' lines with the format version and the parameter echo, then header and rows."""
    lines = [f"# format_version={FORMAT_VERSION}"]
    lines += [f"# {k}={json.dumps(echo[k], sort_keys=True)}" for k in sorted(echo)]
    cols = list(table)
    lines.append(",".join(cols))
    arrays = [np.asarray(table[c]) for c in cols]
    for row in zip(*arrays):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (np.integer, int)):
        return str(int(v))
    return repr(float(v))
