"""Monte Carlo experiments: NMSE power sweeps, AO convergence and resolution sweeps.

Every random draw comes from a generator derived from the root seed and a
tuple of counters (trial, stream), so results do not depend on the order in
which cells are evaluated and every row can be regenerated from
``(config, seed)`` alone.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .channel import dbm_to_watt, mean_channel_energy, realize_channels
from .design import DesignConfig, ao_design, baseline_design, high_res_design
from .estimation import (
    NoiseModel,
    error_terms,
    estimate_channel,
    generate_pilots,
    simulate_reception,
    theoretical_nmse,
)
from .exceptions import DesignInfeasibleError, EstimationInfeasibleError
from .reflection import IDEAL, PRACTICAL, expand_pattern

ESTIMATORS = ("practical", "mismatched")
PATTERNS = ("dft", "ao", "highres")

# generator streams within one trial
_CHANNEL, _PILOTS, _NOISE, _ENERGY = range(4)


def derive_rng(seed, *keys):
    """Generator keyed by ``(seed, *keys)``; independent across distinct keys."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def parse_algorithm(name):
    """``"practical:ao"`` -> ``("practical", "ao")``; a bare pattern name means practical."""
    est, _, pat = name.rpartition(":")
    est = est or "practical"
    if est not in ESTIMATORS or pat not in PATTERNS:
        raise ValueError(f"unknown algorithm {name!r}; use <{'|'.join(ESTIMATORS)}>:<{'|'.join(PATTERNS)}>")
    return est, pat


@dataclass
class ExperimentReport:
    kind: str
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)
    trial_rows: list = field(default_factory=list)

    def to_dict(self):
        return {
            "kind": self.kind,
            "columns": list(self.columns),
            "rows": self.rows,
            "metadata": self.metadata,
            "trial_rows": self.trial_rows,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], d["columns"], d["rows"], d.get("metadata", {}), d.get("trial_rows", []))


TIMING_COLUMNS = ("wall_time",)
TRIAL_COLUMNS = ("seed", "trial", "power_dbm", "bits", "algorithm", "nmse_num", "nmse_den")


def _metadata(config, **extra):
    return {
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
        "code_version": __version__,
        "alpha_set": config.params.name,
        "cond_threshold": config.design.cond_threshold,
        **extra,
    }


def design_pattern(config, pattern, bits=None):
    """Design the training pattern named ``pattern`` for the config's IRS.

    ``"highres"`` starts from a 2-bit AO design and refines it up to
    ``bits``.
    """
    bits = config.design.bits if bits is None else bits
    M = config.m_elements
    args = (config.params, config.grid, config.response_mode)
    thr = config.design.cond_threshold
    t0 = time.perf_counter()
    if pattern == "dft":
        result = baseline_design(M, bits, *args, cond_threshold=thr)
    elif pattern == "ao":
        init = baseline_design(M, bits, *args, cond_threshold=thr)
        result = ao_design(init.pattern, _with_bits(config.design, bits), *args)
        result.info.update(init.info)
    elif pattern == "highres":
        init = baseline_design(M, 2, *args, cond_threshold=thr)
        base = ao_design(init.pattern, _with_bits(config.design, 2), *args)
        result = high_res_design(base, bits, config.design, *args)
        result.info.update(init.info, base_eval_count=base.eval_count)
    else:
        raise ValueError(f"unknown pattern design {pattern!r}")
    result.info["wall_time"] = time.perf_counter() - t0
    return result


def _with_bits(design, bits):
    d = design.to_dict()
    d["bits"] = bits
    return DesignConfig(**d)


def channel_energy(config):
    """``sum_n E||g_hat[n]||^2`` per the config's denominator mode."""
    M = config.m_elements
    if config.denominator == "analytic":
        return mean_channel_energy(config.geometry, config.grid, M)
    rng = derive_rng(config.seed, 0, _ENERGY)
    total = 0.0
    for _ in range(config.energy_draws):
        total += realize_channels(rng, config.geometry, config.grid, M, config.pdp, config.pdp_decay).energy()
    return total / config.energy_draws


def _ratio_se(num, den, N):
    num, den = np.asarray(num), np.asarray(den)
    r = num.sum() / den.sum()
    T = len(num)
    if T < 2:
        return None
    resid = num - r * den
    return float(np.sqrt(np.var(resid, ddof=1) / T) / np.mean(den) / N)


def run_power_sweep(config, algorithms, record_trials=False):
    """Empirical and closed-form NMSE versus transmit power.

    ``algorithms`` are ``"<estimator>:<pattern>"`` names, e.g.
    ``"practical:ao"`` or ``"mismatched:dft"``. All algorithms see the same
    channel, pilot and noise draws in a given trial. A pattern whose design
    fails is reported with ``status`` set and no NMSE; the sweep continues.
    """
    if not algorithms:
        raise ValueError("at least one algorithm is required")
    parsed = [(a, *parse_algorithm(a)) for a in algorithms]
    grid, M, N = config.grid, config.m_elements, config.grid.n_subcarriers
    noise = NoiseModel(float(dbm_to_watt(config.sigma2_dbm)))

    designs, status = {}, {}
    for _, _, pat in parsed:
        if pat in designs or pat in status:
            continue
        try:
            designs[pat] = design_pattern(config, pat)
        except (DesignInfeasibleError, ValueError) as exc:
            status[pat] = f"infeasible: {exc}"

    truth = {p: expand_pattern(d.pattern, config.params, grid, config.response_mode) for p, d in designs.items()}
    assumed = {}
    for name, est, pat in parsed:
        if pat in designs:
            mode = config.response_mode if est == "practical" else IDEAL
            assumed[name] = expand_pattern(designs[pat].pattern, config.params, grid, mode)

    energy = channel_energy(config)
    est_status = {}
    rows, trial_rows = [], []
    for p_dbm in config.power_dbm:
        pt = float(dbm_to_watt(p_dbm))
        nums = {name: [] for name, _, _ in parsed}
        dens = {name: [] for name, _, _ in parsed}
        t0 = time.perf_counter()
        for t in range(config.trials):
            ch = realize_channels(derive_rng(config.seed, t, _CHANNEL), config.geometry, grid, M,
                                  config.pdp, config.pdp_decay)
            pilots = generate_pilots(derive_rng(config.seed, t, _PILOTS), grid, M + 1, pt)
            g = ch.g_hat
            received = {}
            for name, est, pat in parsed:
                if name not in assumed:
                    continue
                if pat not in received:
                    received[pat] = simulate_reception(ch, truth[pat], pilots, noise,
                                                       derive_rng(config.seed, t, _NOISE))
                try:
                    est_g = estimate_channel(received[pat], pilots, assumed[name], config.design.cond_threshold)
                except EstimationInfeasibleError as exc:
                    est_status[name] = f"infeasible: {exc}"
                    assumed.pop(name)
                    continue
                a, b = error_terms(est_g, g)
                nums[name].append(a)
                dens[name].append(b)
                if record_trials:
                    trial_rows.append({
                        "seed": config.seed, "trial": t, "power_dbm": p_dbm, "bits": designs[pat].pattern.bits,
                        "algorithm": name, "nmse_num": a, "nmse_den": b,
                    })
        elapsed = time.perf_counter() - t0
        for name, est, pat in parsed:
            d = designs.get(pat)
            row = {
                "power_dbm": p_dbm,
                "algorithm": name,
                "estimator": est,
                "pattern": pat,
                "bits": d.pattern.bits if d else config.design.bits,
                "trials": len(nums[name]),
                "nmse": None,
                "nmse_se": None,
                "nmse_theory": None,
                "objective": d.objective if d else None,
                "eval_count": d.eval_count if d else None,
                "status": est_status.get(name) or status.get(pat, "ok"),
                "wall_time": elapsed,
            }
            if name in assumed and nums[name]:
                row["nmse"] = float(np.sum(nums[name]) / np.sum(dens[name]) / N)
                row["nmse_se"] = _ratio_se(nums[name], dens[name], N)
                if est == "practical" or config.response_mode == IDEAL:
                    row["nmse_theory"] = theoretical_nmse(truth[pat], noise, pt, energy)
            rows.append(row)

    meta = _metadata(
        config,
        algorithms=list(algorithms),
        channel_energy=energy,
        designs={p: {"objective": d.objective, "eval_count": d.eval_count, "bits": d.pattern.bits, **d.info}
                 for p, d in designs.items()},
        nmse_estimator="ratio-of-sums",
        baseline_note="dft/hadamard baseline is a quantized-DFT (or Sylvester Hadamard) construction",
    )
    columns = ["power_dbm", "algorithm", "estimator", "pattern", "bits", "trials", "nmse", "nmse_se",
               "nmse_theory", "objective", "eval_count", "status", "wall_time"]
    return ExperimentReport("power_sweep", columns, rows, meta, trial_rows)


def run_convergence_trace(config, sweeps=6):
    """AO objective after each full sweep, starting from the baseline (sweep 0)."""
    bits = config.design.bits
    d = config.design.to_dict()
    d["s_max"] = sweeps
    cfg = DesignConfig(**d)
    init = baseline_design(config.m_elements, bits, config.params, config.grid, config.response_mode,
                           cfg.cond_threshold)
    t0 = time.perf_counter()
    res = ao_design(init.pattern, cfg, config.params, config.grid, config.response_mode)
    elapsed = time.perf_counter() - t0
    rows = []
    prev = None
    for s, obj in enumerate(res.stage_objectives):
        rows.append({
            "sweep": s,
            "objective": obj,
            "relative_change": None if prev is None else (prev - obj) / prev,
            "eval_count": s * config.m_elements * (config.m_elements + 1) * 2**bits,
            "wall_time": elapsed if s == len(res.stage_objectives) - 1 else None,
        })
        prev = obj
    meta = _metadata(config, bits=bits, sweeps=sweeps, construction=init.info["construction"],
                     coordinate_trace=res.objective_trace)
    return ExperimentReport("convergence", ["sweep", "objective", "relative_change", "eval_count", "wall_time"],
                            rows, meta)


def run_resolution_sweep(config, bits_range=range(1, 7)):
    """Designed objective per phase resolution.

    Bits 1 and 2 use AO from the baseline; higher resolutions refine the
    2-bit AO design one bit at a time with the neighbour search.
    """
    bits_range = list(bits_range)
    if not bits_range or bits_range[0] != 1:
        raise ValueError("bits_range must start at 1")
    args = (config.params, config.grid, config.response_mode)
    M = config.m_elements
    rows = []
    base2 = None
    for b in (b for b in bits_range if b <= 2):
        t0 = time.perf_counter()
        res = design_pattern(config, "ao", bits=b)
        rows.append({"bits": b, "algorithm": "ao", "objective": res.objective, "eval_count": res.eval_count,
                     "wall_time": time.perf_counter() - t0})
        if b == 2:
            base2 = res
    high = [b for b in bits_range if b >= 3]
    if high:
        if base2 is None:
            raise ValueError("bits_range must include 2 to refine above it")
        t0 = time.perf_counter()
        res = high_res_design(base2, max(high), config.design, *args)
        elapsed = time.perf_counter() - t0
        for level, b in enumerate(range(3, max(high) + 1), start=1):
            if b in high:
                rows.append({"bits": b, "algorithm": "highres", "objective": res.stage_objectives[level],
                             "eval_count": 3 * M * (M + 1) * level, "wall_time": elapsed})
    prev = None
    for row in rows:
        row["relative_improvement"] = None if prev is None else (prev - row["objective"]) / prev
        prev = row["objective"]
    meta = _metadata(config, bits_range=bits_range)
    return ExperimentReport("resolution_sweep",
                            ["bits", "algorithm", "objective", "eval_count", "relative_improvement", "wall_time"],
                            rows, meta)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_report(report, path, fmt="csv", include_timing=False):
    """Write a report as CSV (rows only) or JSON (rows, metadata, trial rows).

    CSV omits wall-clock columns unless ``include_timing`` so that equal
    ``(config, seed)`` give byte-identical files.
    """
    if not report.rows:
        raise ValueError("report has no rows")
    try:
        if fmt == "csv":
            cols = [c for c in report.columns if include_timing or c not in TIMING_COLUMNS]
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(cols)
                for row in report.rows:
                    w.writerow([_fmt(row.get(c)) for c in cols])
        elif fmt == "json":
            with open(path, "w") as fh:
                json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        else:
            raise ValueError(f"unknown report format {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def emit_trials(report, path):
    """Per-trial CSV: seed, trial, power_dbm, bits, algorithm, nmse_num, nmse_den."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_COLUMNS)
        for row in report.trial_rows:
            w.writerow([_fmt(row[c]) for c in TRIAL_COLUMNS])


def load_report(path):
    with open(path) as fh:
        return ExperimentReport.from_dict(json.load(fh))


def write_trace_csv(result, path):
    """Objective trace of a design as ``update_index, objective`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["update_index", "objective"])
        w.writerow([0, repr(result.initial_objective)])
        for i, obj in enumerate(result.objective_trace, start=1):
            w.writerow([i, repr(obj)])
