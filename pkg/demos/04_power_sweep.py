"""
NMSE versus transmit power, end to end
======================================

The experiment runner designs every pattern once, then shares channel,
pilot and noise draws across all algorithms in each trial. The same run is
available from the shell as ``irsofdm sweep-power``.
"""

# %%
from irsofdm import profile_config, run_power_sweep, run_resolution_sweep

# 2-bit phases: at 1 bit the desk baseline is already a coordinate-descent
# fixed point, so AO would return it unchanged.
cfg = profile_config("desk", design={"bits": 2}, sweep={"trials": 300})
report = run_power_sweep(cfg, ["practical:dft", "mismatched:dft", "practical:ao"])

print(f"config {report.metadata['config_hash']}  alpha set {report.metadata['alpha_set']}")
print("  Pt dBm  algorithm            NMSE        closed form")
for r in report.rows:
    th = "-" if r["nmse_theory"] is None else f"{r['nmse_theory']:.3e}"
    print(f"  {r['power_dbm']:6.1f}  {r['algorithm']:<18}  {r['nmse']:.3e}   {th}")

# %%
res = run_resolution_sweep(cfg, range(1, 7))
print("\n  bits  designer  objective  evaluations")
for r in res.rows:
    print(f"  {r['bits']:4d}  {r['algorithm']:<8}  {r['objective']:9.3f}  {r['eval_count']}")
