"""Command-line experiment runner.

    qnt witness   --k 9
    qnt count     --k 15 --p 16 --r 1 --reps 20 --seed 3
    qnt primality --k 15 --p 8 --r 2 --seed 1
    qnt pnt       --n 16 --p 8 --q 16 --reps 50 --seed 7
    qnt hl        --two-n 16 --p 8 --q 16 --reps 50 --seed 7
    qnt sweep pnt --n 16 --p 8,16,32 --q 16 --format csv

Exit codes: 0 success, 2 configuration error, 3 dimension-cap error.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from typing import Any, Callable

import numpy as np

from . import counting, hl, ntcore, pnt, primality
from . import statevec as sv

SCHEMA_VERSION = 1
MAX_SWEEP_ROWS = 10_000
EXIT_OK, EXIT_CONFIG, EXIT_CAP = 0, 2, 3
SUCCESS_FLOOR = 8 / math.pi**2


class ConfigError(ValueError):
    pass


def _check(name: str, value, bound, passed: bool | None, relation: str) -> dict:
    return {"name": name, "value": value, "bound": bound, "relation": relation, "pass": passed}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


# ------------------------------------------------------------------ commands
#
# Each command is split in two: ``validate`` turns parsed flags into a
# config (raising before any state is allocated) and ``execute`` runs it.


def _validate_witness(p) -> dict:
    if p.k is None or p.k < 2:
        raise ConfigError("witness needs --k >= 2")
    if p.k > ntcore.MAX_INT:
        raise ConfigError(f"--k must be <= {ntcore.MAX_INT}")
    return {"k": p.k}


def _run_witness(cfg: dict, seed: int, dump) -> dict:
    k = cfg["k"]
    t = ntcore.count_witnesses(k)
    liars = ntcore.liars(k)
    prime = ntcore.is_prime(k)
    checks = []
    if prime:
        checks.append(_check("prime_soundness", t, 0, t == 0, "=="))
    elif k % 2:
        checks.append(_check("witness_gap", t, 3 * (k - 1) / 4, t >= 3 * (k - 1) / 4, ">="))
    return {
        "truth": {"k": k, "is_prime": prime},
        "estimate": {"t_k": t, "liars": liars, "witness_fraction": t / (k - 1) if k > 1 else 0.0},
        "checks": checks,
    }


def _validate_count(p) -> dict:
    if p.k is None or p.k < 2:
        raise ConfigError("count needs --k >= 2")
    P, R = p.p or 16, p.r or 1
    try:
        setup = counting.CountSetup(p.k, P, R, counting.first_t_predicate(0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if P**R * p.k > sv.max_dim():
        raise sv.SimulationCapError(f"P^R*k = {P**R * p.k} exceeds the dimension cap {sv.max_dim()}")
    reps = p.reps or 20
    if reps < 1:
        raise ConfigError("--reps must be >= 1")
    return {"k": p.k, "P": setup.P, "R": setup.R, "repetitions": reps}


def _run_count(cfg: dict, seed: int, dump) -> dict:
    k, P, R, reps = cfg["k"], cfg["P"], cfg["R"], cfg["repetitions"]
    state, setup = primality.prepare_state(k, P, R)
    t = ntcore.count_witnesses(k)
    simulated = sv.marginal_probabilities(state, setup.ancillas)
    analytic = counting.predict_distribution(k, t, P, R)
    gap = float(np.abs(simulated - analytic).max())
    flat = simulated.reshape(-1) / simulated.sum()
    outcomes = []
    for i in range(reps):
        joint = int(np.random.default_rng([seed, i]).choice(flat.size, p=flat))
        outcomes.extend(int(v) for v in np.unravel_index(joint, simulated.shape))
    est = counting.interpolated_estimate(outcomes, P, k)
    maj = counting.majority_estimate([counting.estimate_from_outcome(o, P, k) for o in outcomes])
    delta = abs(est.t - t)
    out = {
        "truth": {"t_k": t, "f": counting.phase_fraction(k, t, P)},
        "estimate": {**est.as_dict(), "majority_raw": maj.as_dict(), "outcomes": outcomes},
        "checks": [
            _check("oracle_equivalence", gap, 1e-8, gap <= 1e-8, "<="),
            _check("count_error", delta, est.error_bound, delta <= est.error_bound, "<="),
        ],
    }
    if dump is not None:
        out["state_dump"] = sv.dump_state(state, dump)
    return out


def _validate_primality(p) -> dict:
    try:
        cfg = primality.PrimalityConfig(p.k if p.k is not None else 0, p.p or 8, p.r or 1, p.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return {"k": cfg.k, "P": cfg.P, "R": cfg.R}


def _run_primality(cfg: dict, seed: int, dump) -> dict:
    k, P, R = cfg["k"], cfg["P"], cfg["R"]
    outcome = primality.run_primality(primality.PrimalityConfig(k, P, R, seed))
    f = primality.f_k(k, P)
    closed = primality.alpha(k, P) ** (2 * R)
    prime = ntcore.is_prime(k)
    checks = [_check("zero_probability_closed_form", outcome.zero_probability, closed,
                     abs(outcome.zero_probability - closed) <= 1e-10, "~=")]
    if prime:
        checks.append(_check("prime_exactness", outcome.zero_probability, 1.0,
                             abs(outcome.zero_probability - 1) <= 1e-10, "~="))
    else:
        applicable = f >= P / 3
        checks.append(_check("composite_bound", outcome.zero_probability, outcome.error_probability_bound,
                             outcome.zero_probability <= outcome.error_probability_bound if applicable else None, "<="))
    out = {
        "truth": {"k": k, "is_prime": prime, "t_k": ntcore.count_witnesses(k), "f_k": f},
        "estimate": {
            "verdict": outcome.verdict.value,
            "measured": list(outcome.measured),
            "zero_probability": outcome.zero_probability,
            "error_probability_bound": outcome.error_probability_bound,
        },
        "checks": checks,
    }
    if dump is not None:
        out["state_dump"] = sv.dump_state(primality.prepare_state(k, P, R)[0], dump)
    return out


def _validate_pnt(p) -> dict:
    try:
        cfg = pnt.PntConfig(p.n if p.n is not None else 16, p.p or 8, p.q or 16, p.reps or 50, p.seed,
                            0.5 if p.delta is None else p.delta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return {"N": cfg.N, "P": cfg.P, "Q": cfg.Q, "repetitions": cfg.repetitions, "delta": cfg.delta}


def _counting_checks(run: pnt.CountingRun, delta_exp: float, bound: float) -> list[dict]:
    b = run.budget
    success = run.success_probability()
    return [
        _check("residual_norm", b.e_norm_sq, b.e_bound, b.e_norm_sq <= b.e_bound, "<="),
        _check("success_probability", success, SUCCESS_FLOOR - b.w_err, success >= SUCCESS_FLOOR - b.w_err, ">="),
        _check("w_err", b.w_err, b.w_err_bound, b.w_err <= b.w_err_bound, "<="),
        _check("w_err_last_iterate", b.w_err, b.w_err_bound_last_iterate, b.w_err <= b.w_err_bound_last_iterate, "<="),
        _check("estimate_error", delta_exp, bound, delta_exp <= bound, "<="),
    ]


def _run_pnt(cfg: dict, seed: int, dump) -> dict:
    config = pnt.PntConfig(cfg["N"], cfg["P"], cfg["Q"], cfg["repetitions"], seed, cfg["delta"])
    result = pnt.run_pnt(config)
    report = pnt.check_pnt(result)
    t_true, primes = ntcore.sieve_pi(config.N)
    out = {
        "truth": {"t_N": t_true, "primes": primes, "n_over_ln_n": report["n_over_ln_n"], "f_Q": report["f_Q"]},
        "estimate": {
            **result.estimate.as_dict(),
            "majority_raw": result.majority.as_dict(),
            "outcomes": list(result.estimate.members),
        },
        "report": report,
        "budget": result.budget.as_dict(),
        "success_probability": result.run.success_probability(),
        "checks": _counting_checks(result.run, report["delta_t_exp"], report["delta_t_exp_bound"]),
    }
    if dump is not None:
        out["state_dump"] = sv.dump_state(result.run.state, dump)
    return out


def _validate_hl(p) -> dict:
    try:
        cfg = hl.HlConfig(p.two_n if p.two_n is not None else 16, p.p or 8, p.q or 16, p.reps or 50, p.seed,
                          0.5 if p.nu is None else p.nu, 2.0 if p.mu is None else p.mu)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return {"two_n": cfg.two_n, "P": cfg.P, "Q": cfg.Q, "repetitions": cfg.repetitions, "nu": cfg.nu, "mu": cfg.mu}


def _run_hl(cfg: dict, seed: int, dump) -> dict:
    config = hl.HlConfig(cfg["two_n"], cfg["P"], cfg["Q"], cfg["repetitions"], seed, cfg["nu"], cfg["mu"])
    result = hl.run_hl(config)
    report = hl.check_hl(result)
    out = {
        "truth": {"r2": report["r2_true"], "hl_scale": report["hl_scale"], "f_Q": report["f_Q"]},
        "estimate": {
            **result.estimate.as_dict(),
            "majority_raw": result.majority.as_dict(),
            "outcomes": list(result.estimate.members),
        },
        "report": report,
        "budget": result.budget.as_dict(),
        "success_probability": result.run.success_probability(),
        "checks": _counting_checks(result.run, report["delta_r2_exp"], report["delta_r2_exp_bound"]),
    }
    if dump is not None:
        out["state_dump"] = sv.dump_state(result.run.state, dump)
    return out


COMMANDS: dict[str, tuple[Callable, Callable]] = {
    "witness": (_validate_witness, _run_witness),
    "count": (_validate_count, _run_count),
    "primality": (_validate_primality, _run_primality),
    "pnt": (_validate_pnt, _run_pnt),
    "hl": (_validate_hl, _run_hl),
}

# Stable CSV columns per command (documented in the README).
CSV_COLUMNS = {
    "witness": ["k", "is_prime", "t_k", "witness_fraction", "all_checks_pass"],
    "count": ["k", "P", "R", "repetitions", "t_k", "t_est", "error_bound", "oracle_gap", "all_checks_pass"],
    "primality": ["k", "P", "R", "verdict", "zero_probability", "error_probability_bound", "f_k", "all_checks_pass"],
    "pnt": ["N", "P", "Q", "repetitions", "t_N", "t_est", "error_bound", "e_norm_sq", "e_bound",
            "success_probability", "w_err", "status", "all_checks_pass"],
    "hl": ["two_n", "P", "Q", "repetitions", "r2", "r2_est", "error_bound", "e_norm_sq", "e_bound",
           "success_probability", "w_err", "status", "all_checks_pass"],
}


def _all_pass(report: dict) -> bool:
    return all(c["pass"] is not False for c in report["checks"])


def _csv_row(command: str, cfg: dict, report: dict) -> dict:
    est, truth = report["estimate"], report["truth"]
    row: dict[str, Any] = dict(cfg)
    if command == "witness":
        row.update(is_prime=truth["is_prime"], t_k=est["t_k"], witness_fraction=est["witness_fraction"])
    elif command == "count":
        row.update(t_k=truth["t_k"], t_est=est["t_est"], error_bound=est["error_bound"],
                   oracle_gap=report["checks"][0]["value"])
    elif command == "primality":
        row.update(verdict=est["verdict"], zero_probability=est["zero_probability"],
                   error_probability_bound=est["error_probability_bound"], f_k=truth["f_k"])
    else:
        budget = report["budget"]
        key_true, key_est = ("t_N", "t_est") if command == "pnt" else ("r2", "r2_est")
        row.update({key_true: truth["t_N" if command == "pnt" else "r2"], key_est: est["t_est"]})
        row.update(error_bound=est["error_bound"], e_norm_sq=budget["e_norm_sq"], e_bound=budget["e_bound"],
                   success_probability=report["success_probability"], w_err=budget["w_err"],
                   status=report["report"]["status"])
    row["all_checks_pass"] = _all_pass(report)
    return {col: row.get(col) for col in CSV_COLUMNS[command]}


def _render_csv(command: str, rows: list[dict], extra: list[str] = ()) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(extra) + CSV_COLUMNS[command], lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def build_report(command: str, cfg: dict, seed: int, dump=None) -> dict:
    body = COMMANDS[command][1](cfg, seed, dump)
    return _clean({"schema": SCHEMA_VERSION, "command": command, "config": cfg, "seed": seed, **body})


def run(args: argparse.Namespace) -> tuple[int, str]:
    """Execute one command; returns ``(exit code, rendered report)``."""
    validate, _ = COMMANDS[args.command]
    cfg = validate(args)
    report = build_report(args.command, cfg, args.seed, args.dump_state_threshold)
    if args.format == "csv":
        return EXIT_OK, _render_csv(args.command, [_csv_row(args.command, cfg, report)])
    return EXIT_OK, json.dumps(report, indent=2, sort_keys=True) + "\n"


# -------------------------------------------------------------------- sweeps

SWEEPABLE = ("k", "n", "two_n", "p", "q", "r", "reps")


def parse_range(text: str) -> list[int]:
    """``"8,16,32"`` or ``"start:stop[:step]"`` (half-open) or a single integer."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = parts[:2]
            step = parts[2] if len(parts) == 3 else 1
            if step <= 0:
                raise ConfigError(f"range step must be positive: {text!r}")
            return list(range(start, stop, step))
        if text == "":
            return []
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse range {text!r}") from None


def sweep(args: argparse.Namespace) -> tuple[int, str]:
    """One CSV row per configuration in the cartesian product, seed = seed + row."""
    command = args.command
    validate, _ = COMMANDS[command]
    axes = {}
    for name in SWEEPABLE:
        raw = getattr(args, name)
        if raw is not None:
            axes[name] = parse_range(raw)
    names = list(axes)
    total = math.prod(len(v) for v in axes.values()) if axes else 1
    if total > MAX_SWEEP_ROWS:
        raise ConfigError(f"sweep has {total} rows, cap is {MAX_SWEEP_ROWS}")
    configs = []
    for combo in itertools.product(*(axes[n] for n in names)):
        ns = argparse.Namespace(**vars(args))
        for name, value in zip(names, combo):
            setattr(ns, name, value)
        configs.append(validate(ns))
    rows = []
    for index, cfg in enumerate(configs):
        seed = args.seed + index
        report = build_report(command, cfg, seed)
        rows.append({"row": index, "seed": seed, **_csv_row(command, cfg, report)})
    return EXIT_OK, _render_csv(command, rows, ["row", "seed"])


# ---------------------------------------------------------------------- main


def _add_common(parser: argparse.ArgumentParser, sweeping: bool) -> None:
    number = str if sweeping else int
    parser.add_argument("--k", type=number)
    parser.add_argument("--n", type=number)
    parser.add_argument("--two-n", dest="two_n", type=number)
    parser.add_argument("--p", type=number)
    parser.add_argument("--q", type=number)
    parser.add_argument("--r", type=number)
    parser.add_argument("--reps", type=number)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--nu", type=float)
    parser.add_argument("--mu", type=float)
    parser.add_argument("--format", choices=("json", "csv"), default="csv" if sweeping else "json")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--dump-state-threshold", dest="dump_state_threshold", type=float,
                        help="include amplitudes with |amp|^2 above this value in the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qnt", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_common(sub.add_parser(name), sweeping=False)
    sweep_parser = sub.add_parser("sweep", help="CSV over parameter ranges")
    sweep_sub = sweep_parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sweep_sub.add_parser(name)
        _add_common(p, sweeping=True)
        p.set_defaults(sweeping=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "sweeping", False):
            if args.format != "csv":
                raise ConfigError("sweeps only emit CSV")
            code, text = sweep(args)
        else:
            code, text = run(args)
    except sv.SimulationCapError as exc:
        print(f"qnt: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ConfigError, ValueError) as exc:
        print(f"qnt: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
