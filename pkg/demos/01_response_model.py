"""
How a practical IRS element responds across an OFDM band
========================================================

An element is programmed with a phase at the carrier. Off the carrier its
amplitude drops and its phase drifts, by an amount that depends on the
programmed phase itself.
"""

# %%
import numpy as np

from irsofdm import DEFAULT_PARAMS, OfdmGrid, amplitude_response, build_codebook, phase_response

grid = OfdmGrid(n_subcarriers=64, bandwidth_hz=0.2e9, carrier_hz=2.4e9, tap_count=8, cp_length=16)
f = grid.frequencies
print(f"subcarriers {f[0] / 1e9:.7f} .. {f[-1] / 1e9:.7f} GHz")

# %%
# The 2-bit codebook and what each phase turns into at the band edges and centre.
cb = build_codebook(2)
edges = np.array([f[0], grid.carrier_hz, f[-1]])
print("\nprogrammed  |  amplitude (low / fc / high)  |  phase rad (low / fc / high)")
for phi in cb.values:
    a = amplitude_response(DEFAULT_PARAMS, phi, edges)
    w = phase_response(DEFAULT_PARAMS, phi, edges)
    print(f"{phi:9.4f}   |  {a[0]:.3f} {a[1]:.3f} {a[2]:.3f}"
          f"          |  {w[0]:+.3f} {w[1]:+.3f} {w[2]:+.3f}")

# %%
# Phase spread across the band: this is why a pattern designed for the
# carrier alone is not the right pattern for every subcarrier.
phi = build_codebook(4).values[:, None]
w = phase_response(DEFAULT_PARAMS, phi, f[None, :])
spread = np.ptp(w, axis=1)
print(f"\nin-band phase drift per programmed phase: min {spread.min():.3f}, max {spread.max():.3f} rad")
