"""
Least-squares channel estimation with a practical IRS
=====================================================

Train for K = M + 1 slots, divide out the pilots, and solve one small linear
system per subcarrier. The closed-form NMSE predicts the Monte Carlo result.
"""

# %%
import numpy as np

from irsofdm import (
    DEFAULT_PARAMS,
    LinkGeometry,
    NoiseModel,
    OfdmGrid,
    baseline_design,
    dbm_to_watt,
    empirical_nmse,
    expand_pattern,
    generate_pilots,
    mean_channel_energy,
    realize_channels,
    run_estimate,
    run_mismatched_estimate,
    theoretical_nmse,
)

grid = OfdmGrid(16, 0.2e9, 2.4e9, tap_count=8, cp_length=16)
geometry = LinkGeometry()
M = 8
pattern = baseline_design(M, 1, DEFAULT_PARAMS, grid).pattern
rng = np.random.default_rng(0)

# %%
# Noise-free: the estimate is exact up to rounding.
ch = realize_channels(rng, geometry, grid, M)
pilots = generate_pilots(rng, grid, M + 1, 1.0)
est = run_estimate(ch, pattern, DEFAULT_PARAMS, grid, pilots, NoiseModel(0.0), rng)
print("noise-free relative error:", np.linalg.norm(est - ch.g_hat) / np.linalg.norm(ch.g_hat))

# %%
# With noise, Monte Carlo vs closed form, and the estimator that wrongly
# assumes an ideal, frequency-flat IRS.
noise = NoiseModel(float(dbm_to_watt(-80)))
energy = mean_channel_energy(geometry, grid, M)
expanded = expand_pattern(pattern, DEFAULT_PARAMS, grid)
print("\n  Pt dBm   practical MC   closed form   mismatched MC")
for p_dbm in (20, 30, 40, 50):
    pt = float(dbm_to_watt(p_dbm))
    good, bad = [], []
    for _ in range(300):
        ch = realize_channels(rng, geometry, grid, M)
        pilots = generate_pilots(rng, grid, M + 1, pt)
        state = rng.bit_generator.state
        good.append((run_estimate(ch, pattern, DEFAULT_PARAMS, grid, pilots, noise, rng), ch.g_hat))
        rng.bit_generator.state = state  # same noise for both receivers
        bad.append((run_mismatched_estimate(ch, pattern, DEFAULT_PARAMS, grid, pilots, noise, rng), ch.g_hat))
    th = theoretical_nmse(expanded, noise, pt, energy)
    print(f"  {p_dbm:6d}   {empirical_nmse(good):.3e}      {th:.3e}     {empirical_nmse(bad):.3e}")
