"""Command-line entry point: ``irsofdm <verb> ...`` or ``python -m irsofdm``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .config import load_config
from .exceptions import IrsOfdmError
from .experiments import (
    derive_rng,
    design_pattern,
    emit_report,
    emit_trials,
    run_convergence_trace,
    run_power_sweep,
    run_resolution_sweep,
    write_trace_csv,
)
from .reflection import CircuitParams, PatternMatrix


def _common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--profile", choices=("desk", "paper"), help="default parameter profile (default: desk)")
    p.add_argument("--m", type=int, help="number of IRS elements")
    p.add_argument("--n", type=int, help="number of subcarriers")
    p.add_argument("--bits", type=int, help="phase resolution in bits")
    p.add_argument("--smax", type=int, help="AO sweeps")
    p.add_argument("--seed", type=int, help="root seed")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    p.add_argument("--alpha-file", help="JSON file with the 7 response coefficients")


def _config(args):
    cfg = load_config(args.config, args.profile)
    over = {}
    if args.m is not None:
        over.setdefault("design", {})["m_elements"] = args.m
    if args.bits is not None:
        over.setdefault("design", {})["bits"] = args.bits
    if args.smax is not None:
        over.setdefault("design", {})["s_max"] = args.smax
    if args.n is not None:
        over.setdefault("grid", {})["n_subcarriers"] = args.n
    if args.seed is not None:
        over.setdefault("sweep", {})["seed"] = args.seed
    if args.trials is not None:
        over.setdefault("sweep", {})["trials"] = args.trials
    if args.alpha_file:
        params = CircuitParams.from_file(args.alpha_file)
        over["response_model"] = params.to_dict()
    if getattr(args, "power_dbm", None):
        over.setdefault("sweep", {})["power_dbm"] = args.power_dbm
    return cfg.replace(**over) if over else cfg


def cmd_design(args):
    cfg = _config(args)
    res = design_pattern(cfg, args.algorithm)
    meta = {
        "algorithm": res.algorithm,
        "objective": res.objective,
        "eval_count": res.eval_count,
        "alpha_set": cfg.params.name,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        **{k: v for k, v in res.info.items() if k != "wall_time"},
    }
    res.pattern.save(args.out, meta=meta)
    if args.trace_out:
        write_trace_csv(res, args.trace_out)
    print(f"{res.algorithm}: objective {res.objective:.6g} after {res.eval_count} evaluations -> {args.out}")
    return 0


def cmd_estimate(args):
    from .estimation import NoiseModel, error_terms, estimate_channel, generate_pilots, simulate_reception
    from .channel import dbm_to_watt, realize_channels
    from .reflection import IDEAL, expand_pattern

    cfg = _config(args)
    if args.pattern:
        pattern = PatternMatrix.load(args.pattern)
    else:
        pattern = design_pattern(cfg, args.algorithm).pattern
    if pattern.m_elements != cfg.m_elements:
        raise IrsOfdmError(f"pattern has {pattern.m_elements} elements, config has {cfg.m_elements}")
    pt = float(dbm_to_watt(args.power))
    noise = NoiseModel(float(dbm_to_watt(cfg.sigma2_dbm)))
    truth = expand_pattern(pattern, cfg.params, cfg.grid, cfg.response_mode)
    mode = cfg.response_mode if args.estimator == "practical" else IDEAL
    assumed = expand_pattern(pattern, cfg.params, cfg.grid, mode)
    num = den = 0.0
    rows = []
    for t in range(cfg.trials):
        ch = realize_channels(derive_rng(cfg.seed, t, 0), cfg.geometry, cfg.grid, cfg.m_elements, cfg.pdp,
                              cfg.pdp_decay)
        pilots = generate_pilots(derive_rng(cfg.seed, t, 1), cfg.grid, cfg.m_elements + 1, pt)
        y = simulate_reception(ch, truth, pilots, noise, derive_rng(cfg.seed, t, 2))
        a, b = error_terms(estimate_channel(y, pilots, assumed, cfg.design.cond_threshold), ch.g_hat)
        num += a
        den += b
        rows.append({"seed": cfg.seed, "trial": t, "power_dbm": args.power, "bits": pattern.bits,
                     "algorithm": f"{args.estimator}:{args.pattern or args.algorithm}", "nmse_num": a,
                     "nmse_den": b})
    out = {"nmse": num / den / cfg.grid.n_subcarriers, "trials": cfg.trials, "config_hash": cfg.config_hash()}
    text = json.dumps(out, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    if args.trials_out:
        from .experiments import ExperimentReport

        emit_trials(ExperimentReport("estimate", [], [], trial_rows=rows), args.trials_out)
    return 0


def cmd_sweep_power(args):
    cfg = _config(args)
    algos = [a for a in args.algorithms.split(",") if a]
    report = run_power_sweep(cfg, algos, record_trials=bool(args.trials_out))
    emit_report(report, args.out, args.format)
    if args.trials_out:
        emit_trials(report, args.trials_out)
    bad = [r for r in report.rows if r["status"] != "ok"]
    for r in report.rows:
        nmse = "-" if r["nmse"] is None else f"{r['nmse']:.4g}"
        print(f"{r['power_dbm']:6.1f} dBm  {r['algorithm']:<20} nmse {nmse}  {r['status']}")
    return 2 if bad and args.strict else 0


def cmd_trace(args):
    cfg = _config(args)
    report = run_convergence_trace(cfg, sweeps=args.sweeps)
    emit_report(report, args.out, args.format)
    for r in report.rows:
        print(f"sweep {r['sweep']}: {r['objective']:.6g}")
    return 0


def cmd_sweep_bits(args):
    cfg = _config(args)
    report = run_resolution_sweep(cfg, range(1, args.max_bits + 1))
    emit_report(report, args.out, args.format)
    for r in report.rows:
        print(f"b={r['bits']} ({r['algorithm']}): {r['objective']:.6g}  evals {r['eval_count']}")
    return 0


def cmd_validate(args):
    cfg = _config(args)
    print(f"ok: profile={cfg.profile} M={cfg.m_elements} N={cfg.grid.n_subcarriers} "
          f"alpha_set={cfg.params.name} hash={cfg.config_hash()}")
    if args.dump:
        print(json.dumps(cfg.to_dict(), indent=2))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="irsofdm", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("design", help="design a training reflection pattern")
    _common(p)
    p.add_argument("--algorithm", choices=("ao", "highres", "dft"), default="ao")
    p.add_argument("--out", required=True, help="pattern JSON output")
    p.add_argument("--trace-out", help="objective trace CSV output")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("estimate", help="Monte Carlo NMSE of one pattern at one power")
    _common(p)
    p.add_argument("--pattern", help="pattern JSON (default: design one with --algorithm)")
    p.add_argument("--algorithm", choices=("ao", "highres", "dft"), default="dft")
    p.add_argument("--estimator", choices=("practical", "mismatched"), default="practical")
    p.add_argument("--power", type=float, default=30.0, help="transmit power in dBm")
    p.add_argument("--out", help="aggregated JSON output")
    p.add_argument("--trials-out", help="per-trial CSV output")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep-power", help="NMSE versus transmit power")
    _common(p)
    p.add_argument("--algorithms", default="practical:dft,mismatched:dft,practical:ao")
    p.add_argument("--power-dbm", type=float, nargs="+", help="transmit powers in dBm")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--trials-out", help="per-trial CSV output")
    p.add_argument("--strict", action="store_true", help="exit nonzero if any cell is infeasible")
    p.set_defaults(func=cmd_sweep_power)

    p = sub.add_parser("trace-convergence", help="AO objective per sweep")
    _common(p)
    p.add_argument("--sweeps", type=int, default=6)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("sweep-bits", help="designed objective versus phase resolution")
    _common(p)
    p.add_argument("--max-bits", type=int, default=6)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_sweep_bits)

    p = sub.add_parser("validate-config", help="load and validate a config")
    _common(p)
    p.add_argument("--dump", action="store_true", help="print the resolved config")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IrsOfdmError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
