"""Command-line entry point.

Exit codes: 0 on success, 1 when a verification suite finds a failure,
2 for argument or parameter errors. Relative ``--out`` paths are resolved
against ``$CAUSALCODES_OUT_DIR`` when it is set.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shlex
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .adversary import STRATEGY_NAMES, StrategyError, parse_strategy
from .code import CodeSpec, random_bits
from .decoder_flip import goodness_check
from .harness import (TrialConfig, curve_tables, estimate_goodness, goodness_radius, run_experiment,
                      table_to_csv)
from .info_math import entropy_gap_check
from .params import DESK_SCALE, PAPER_EXACT, ParameterError, derive_erase_params, derive_flip_params
from .trajectory import (AdversaryTrajectory, claim2_margin_exact, default_claim_grid, energy_threshold,
                         find_t_star, grid_params, sample_trajectories, suffix_fraction, verify_claims)

OUT_DIR_ENV = "CAUSALCODES_OUT_DIR"
SUITES = ("conditions", "lemma", "intersection", "goodness-bounds", "t-star")

CAPACITY_HELP = "CSV columns: p, capacity, one_minus_H (1-H(p)), one_minus_p (1-p)."
TRAJ_HELP = ("CSV columns: t, p_bar, p_hat, p_tilde, then p_t for the front, typical, back and uniform "
             "adversaries, one row per chunk end.")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _out_path(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _emit(text: str, path: str | None) -> None:
    target = _out_path(path)
    if target is None:
        sys.stdout.write(text)
        return
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text)


def _command_echo(argv: Sequence[str]) -> str:
    return "causalcodes " + " ".join(shlex.quote(a) for a in argv)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="causalcodes", description="Causal adversarial channel codes: capacity, "
                 "trajectories, claim verification, goodness checks and simulation.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("capacity", help="capacity curve table", description=CAPACITY_HELP)
    c.add_argument("--channel", choices=("flip", "erase"), required=True)
    c.add_argument("--p-min", type=float, default=0.0)
    c.add_argument("--p-max", type=float, default=0.5)
    c.add_argument("--step", type=float, default=0.01)
    c.add_argument("--tol", type=float, default=1e-9)
    c.add_argument("--out")

    t = sub.add_parser("trajectories", help="reference trajectory table", description=TRAJ_HELP)
    t.add_argument("--n", type=int, default=40000)
    t.add_argument("--p-prime", type=float, default=0.125)
    t.add_argument("--eps", type=float, default=0.08)
    t.add_argument("--seed", type=int, default=0, help="seed of the 'typical' adversary column")
    t.add_argument("--out")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", choices=SUITES, required=True)
    v.add_argument("--n", type=int, default=40000)
    v.add_argument("--p", type=float)
    v.add_argument("--p-prime", type=float)
    v.add_argument("--eps", type=float, default=0.08)
    v.add_argument("--grid", action="store_true", help="sweep the default (p', eps) grid instead of one point")
    v.add_argument("--samples", type=int, default=10000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")

    g = sub.add_parser("goodness", help="analytic and empirical goodness at one position")
    g.add_argument("--channel", choices=("flip", "erase"), default="flip")
    g.add_argument("--n", type=int, default=40000)
    g.add_argument("--p", type=float)
    g.add_argument("--p-prime", type=float)
    g.add_argument("--eps", type=float, default=0.08)
    g.add_argument("--t", type=int, help="chunk end (default t0 for flip, n/2 rounded for erase)")
    g.add_argument("--list-size", type=int, help="decoy count and list-size cap (default ceil(8/eps))")
    g.add_argument("--samples", type=int, default=200)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")

    s = sub.add_parser("simulate", help="seeded end-to-end trials")
    s.add_argument("--channel", choices=("flip", "erase"), required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--chunks", type=int)
    s.add_argument("--msg-bits", type=int)
    s.add_argument("--secret-bits", type=int)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--adversary", default="uniform", help=f"one of {', '.join(STRATEGY_NAMES)}")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--code-seed", type=int, help="codebook master seed (default: derived from --seed)")
    s.add_argument("--family", choices=("auto", "prf", "affine"), default="auto")
    s.add_argument("--adversary-budget", type=int, help="cap the adversary below floor(p n); the decoder still assumes p")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--timing", action="store_true", help="add wall time to the report (breaks byte-identity)")
    s.add_argument("--out")
    return ap


def _flip_params(args, overrides=None, mode=PAPER_EXACT):
    if args.p is None and args.p_prime is None:
        return derive_flip_params(args.n, p_prime=0.125, eps=args.eps, mode=mode, overrides=overrides)
    if args.p is not None and args.p_prime is not None:
        raise ParameterError("give --p or --p-prime, not both")
    return derive_flip_params(args.n, args.p, args.eps, mode, overrides, p_prime=args.p_prime)


def cmd_capacity(args, argv) -> int:
    table = curve_tables(f"capacity_{args.channel}", p_min=args.p_min, p_max=args.p_max,
                         step=args.step, tol=args.tol)
    _emit(table_to_csv(table, {"command": _command_echo(argv)}), args.out)
    return 0


def cmd_trajectories(args, argv) -> int:
    params = derive_flip_params(args.n, eps=args.eps, p_prime=args.p_prime)
    table = curve_tables("trajectories", params=params, seed=args.seed)
    _emit(table_to_csv(table, {"command": _command_echo(argv), "params": params.to_dict()}), args.out)
    return 0


def _lemma_suite() -> dict:
    fails, checked = [], 0
    for qi in range(50):
        for gi in range(1, 50):
            q, g = qi / 100, gi / 100
            if q + g > 1:
                continue
            r = entropy_gap_check(q, g)
            checked += 1
            if not r.holds_log:
                fails.append({"claim": "lemma-log", "q": q, "gamma": g, "margin": r.rhs_log - r.lhs})
            if g < 1 / 16 and not r.holds_sqrt:
                fails.append({"claim": "lemma-sqrt", "q": q, "gamma": g, "margin": r.rhs_sqrt - r.lhs})
    return {"suite": "lemma", "checked": checked, "failures": fails}


def _points(args):
    if args.grid:
        return [p for p in (grid_params(pp, e) for pp, e in default_claim_grid()) if p is not None]
    return [_flip_params(args)]


def _conditions_suite(args) -> dict:
    fails, points = [], []
    for params in _points(args):
        rep = verify_claims(params)
        points.append({"n": params.n, "p_prime": params.p_prime, "eps": params.eps, "passed": rep.passed})
        fails += [dict(c.to_dict(), p_prime=params.p_prime, eps=params.eps) for c in rep.failures()]
    return {"suite": "conditions", "points": points, "failures": fails}


def _intersection_suite(args) -> dict:
    fails, points = [], []
    for params in _points(args):
        m = claim2_margin_exact(params)
        points.append({"n": params.n, "p_prime": params.p_prime, "eps": params.eps, "margin": float(m)})
        if m < 0:
            fails.append({"claim": "claim-2 intersection", "t": params.n - params.chunk_len,
                          "margin": float(m), "p_prime": params.p_prime, "eps": params.eps})
    return {"suite": "intersection", "points": points, "failures": fails}


def _goodness_suite(args) -> dict:
    params = _flip_params(args)
    fails, reports = [], []
    for t in (params.t0, params.n - params.chunk_len):
        rep = goodness_check(params, t)
        reports.append(rep.to_dict())
        fails += [{"claim": "goodness", "t": t, "detail": f} for f in rep.failures()]
    return {"suite": "goodness-bounds", "reports": reports, "failures": fails}


def _t_star_suite(args) -> dict:
    params = _flip_params(args)
    rng = np.random.default_rng(args.seed)
    counts = sample_trajectories(params, args.samples, rng)
    limit = energy_threshold(params)
    fails, worst = [], -math.inf
    for row in counts:
        traj = AdversaryTrajectory.from_counts(row, params.chunk_len)
        try:
            ts = find_t_star(traj, params)
        except Exception as exc:  # noqa: BLE001
            fails.append({"claim": "t-star existence", "detail": str(exc)})
            continue
        frac = suffix_fraction(traj, params, ts)
        worst = max(worst, frac)
        if not frac < limit:
            fails.append({"claim": "suffix energy", "t": ts, "margin": limit - frac})
    return {"suite": "t-star", "samples": args.samples, "worst_suffix_fraction": worst,
            "threshold": limit, "failures": fails[:50], "failure_count": len(fails)}


def cmd_verify(args, argv) -> int:
    if args.suite == "lemma":
        out = _lemma_suite()
    elif args.suite == "conditions":
        out = _conditions_suite(args)
    elif args.suite == "intersection":
        out = _intersection_suite(args)
    elif args.suite == "goodness-bounds":
        out = _goodness_suite(args)
    else:
        out = _t_star_suite(args)
    ok = not out["failures"]
    out.update(passed=ok, command=_command_echo(argv))
    _emit(json.dumps(out, sort_keys=True, indent=1) + "\n", args.out)
    if not ok:
        for f in out["failures"][:20]:
            print(f"FAIL {json.dumps(f, sort_keys=True)}", file=sys.stderr)
    return 0 if ok else 1


def cmd_goodness(args, argv) -> int:
    if args.channel == "flip":
        params = _flip_params(args)
        t = params.t0 if args.t is None else args.t
    else:
        params = derive_erase_params(args.n, 0.0 if args.p is None else args.p, args.eps)
        t = (params.num_chunks // 2) * params.chunk_len if args.t is None else args.t
    cap = math.ceil(8.0 / params.eps) if args.list_size is None else args.list_size
    report = goodness_check(params, t, cap)
    rng = np.random.default_rng(args.seed)
    spec = CodeSpec(random_bits(rng, 64), params.n, params.num_chunks, 1,
                    max(math.ceil(params.n * params.S - 1e-9), 0))
    decoys = [rng.integers(0, 2, params.n - t).astype(np.uint8) for _ in range(cap)]
    frac = estimate_goodness(spec, params, t, decoys, args.samples, rng)
    r = goodness_radius(params, t)
    from scipy.stats import binom

    single = float(binom.sf(math.floor(r + 1e-9), params.n - t, 0.5))
    out = {"command": _command_echo(argv), "params": params.to_dict(), "t": t, "analytic": report.to_dict(),
           "empirical_fraction": frac, "predicted_fraction": single**cap, "decoys": cap,
           "samples": args.samples}
    _emit(json.dumps(out, sort_keys=True, indent=1) + "\n", args.out)
    return 0


def _sim_params(args):
    """Desk-scale parameters; only flags that differ from the derived values become overrides."""
    derive = derive_flip_params if args.channel == "flip" else derive_erase_params
    overrides = {}
    if args.chunks is not None and args.chunks != max(round(1.0 / _raw_theta(args)), 1):
        overrides["num_chunks"] = args.chunks
    base = derive(args.n, args.p, args.eps, DESK_SCALE, overrides)
    if args.msg_bits is not None and args.msg_bits != math.ceil(base.n * base.R - 1e-9):
        overrides["R"] = args.msg_bits / args.n
    if args.secret_bits is not None and args.secret_bits != math.ceil(base.n * base.S - 1e-9):
        overrides["S"] = args.secret_bits / args.n
    return derive(args.n, args.p, args.eps, DESK_SCALE, overrides)


def _raw_theta(args) -> float:
    if args.channel == "flip":
        pp = args.p + args.eps**2 / 16
        return args.eps**2 * (1 - 4 * pp) / 4
    return args.eps / 4


def cmd_simulate(args, argv, parser) -> int:
    try:
        parse_strategy(args.adversary)
    except (StrategyError, OSError) as exc:
        parser.error(f"--adversary: {exc}")
    params = _sim_params(args)
    code_seed = args.code_seed
    if code_seed is None:
        code_seed = int(np.random.SeedSequence([args.seed, 0xC0DE]).generate_state(1, np.uint64)[0])
    spec = CodeSpec.from_params(params, code_seed, args.family)
    config = TrialConfig(args.channel, params, spec, args.adversary, args.trials, args.seed,
                         adversary_budget=args.adversary_budget)
    report = run_experiment(config, workers=args.workers, timing=args.timing)
    d = report.to_dict()
    d["command"] = _command_echo(argv)
    _emit(json.dumps(d, sort_keys=True, indent=1) + "\n", args.out)
    rates = report.rates()
    print(" ".join(f"{k}={rates[k]:.4f}" for k in sorted(rates)), file=sys.stderr)
    return 0


def run_cli(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "capacity":
            return cmd_capacity(args, argv)
        if args.command == "trajectories":
            return cmd_trajectories(args, argv)
        if args.command == "verify":
            return cmd_verify(args, argv)
        if args.command == "goodness":
            return cmd_goodness(args, argv)
        return cmd_simulate(args, argv, parser)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except (ParameterError, ValueError) as exc:
        print(f"causalcodes: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
