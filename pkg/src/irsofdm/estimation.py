"""K-slot pilot training and least-squares recovery of the IRS channel.

Per subcarrier ``n`` and slot ``k`` the AP receives

    y[n, k] = conj(g_hat[n]) @ Psi_n[:, k] * x[n, k] + v[n, k]

Dividing by the pilot gives ``z[n, k]``; conjugating and stacking the K
slots gives ``Psi_n^H g_hat[n] + noise``, which is solved for ``g_hat[n]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import DEFAULT_COND_THRESHOLD, condition_numbers
from .exceptions import EstimationInfeasibleError
from .reflection import IDEAL, PRACTICAL, expand_pattern


@dataclass(frozen=True)
class NoiseModel:
    """Receiver noise power in watts. Zero gives noise-free reception."""

    sigma2: float

    def __post_init__(self):
        if not self.sigma2 >= 0:
            raise ValueError(f"sigma2 must be nonnegative, got {self.sigma2}")


@dataclass
class PilotBlock:
    symbols: np.ndarray  # (N, K)
    total_power: float

    @property
    def per_subcarrier_power(self):
        return self.total_power / self.symbols.shape[0]


def generate_pilots(rng, grid, K, total_power):
    """Constant-modulus pilots ``sqrt(Pt / N) exp(j w)`` with ``w`` uniform on [0, 2 pi)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if not total_power > 0:
        raise ValueError("total_power must be positive")
    N = grid.n_subcarriers
    w = rng.uniform(0.0, 2 * np.pi, size=(N, K))
    return PilotBlock(np.sqrt(total_power / N) * np.exp(1j * w), float(total_power))


def complex_noise(rng, sigma2, shape):
    return np.sqrt(sigma2 / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def simulate_reception(realization, expanded, pilots, noise, rng):
    """Received training samples, shape (N, K)."""
    g = realization.g_hat  # (N, M+1)
    Psi = expanded.matrices  # (N, M+1, K)
    if Psi.shape[:2] != g.shape:
        raise ValueError(f"pattern expansion {Psi.shape} does not match channel {g.shape}")
    if pilots.symbols.shape != (Psi.shape[0], Psi.shape[2]):
        raise ValueError(f"pilot block {pilots.symbols.shape} does not match {Psi.shape[0]} x {Psi.shape[2]}")
    clean = np.einsum("nm,nmk->nk", g.conj(), Psi) * pilots.symbols
    if noise.sigma2 == 0:
        return clean
    return clean + complex_noise(rng, noise.sigma2, clean.shape)


def per_slot_estimate(received, pilots):
    """``z[n, k] = y[n, k] / x[n, k]``."""
    x = pilots.symbols
    if np.any(x == 0):
        raise ValueError("pilot block contains a zero symbol")
    return np.asarray(received) / x


def aggregate(z):
    """Stack the per-slot estimates as ``Psi_n^H g_hat[n] + noise`` (the conjugate)."""
    return np.conj(z)


def ls_solve(z_aggregated, expanded, cond_threshold=DEFAULT_COND_THRESHOLD):
    """Solve ``Psi_n^H g = z_n`` for every subcarrier; returns (N, M+1).

    Uses an LU solve per subcarrier. Raises :class:`EstimationInfeasibleError`
    if any training matrix is not square or its condition number exceeds
    ``cond_threshold``.
    """
    Psi = expanded.matrices
    N, R, K = Psi.shape
    if R != K:
        raise EstimationInfeasibleError(f"training matrices are {R} x {K}; LS needs K = M + 1")
    cond = condition_numbers(Psi)
    if np.any(~(cond <= cond_threshold)):
        worst = int(np.argmax(np.where(np.isfinite(cond), cond, np.inf)))
        raise EstimationInfeasibleError(
            f"training matrix of subcarrier {worst + 1} has condition number {cond[worst]:.3g} "
            f"> {cond_threshold:.3g}"
        )
    A = np.conj(np.swapaxes(Psi, -1, -2))
    return np.linalg.solve(A, np.asarray(z_aggregated)[..., None])[..., 0]


def estimate_channel(received, pilots, expanded, cond_threshold=DEFAULT_COND_THRESHOLD):
    """Full receiver chain: pilot division, aggregation and LS solve."""
    return ls_solve(aggregate(per_slot_estimate(received, pilots)), expanded, cond_threshold)


def inverse_trace_sum(expanded):
    """``sum_n tr(inv(Psi_n)^H inv(Psi_n))`` via explicit inverses."""
    inv = np.linalg.inv(expanded.matrices)
    return float(np.sum(np.abs(inv) ** 2))


def theoretical_nmse(expanded, noise, total_power, channel_energy):
    """Closed-form LS NMSE ``(sigma2 / Pt) * sum_n tr(inv(Psi_n)^H inv(Psi_n)) / channel_energy``.

    ``channel_energy`` is ``sum_n E||g_hat[n]||^2``, either
    :func:`irsofdm.channel.mean_channel_energy` or an average of
    :meth:`ChannelRealization.energy` over draws.
    """
    if not channel_energy > 0:
        raise ValueError("channel_energy must be positive")
    return noise.sigma2 / total_power * inverse_trace_sum(expanded) / channel_energy


def error_terms(estimate, truth):
    """Per-trial (squared error, channel energy) summed over subcarriers."""
    num = float(np.sum(np.abs(np.asarray(estimate) - truth) ** 2))
    den = float(np.sum(np.abs(truth) ** 2))
    return num, den


def empirical_nmse(trials):
    """Ratio-of-sums NMSE over ``(estimate, g_hat)`` pairs, both shaped (N, M+1).

    Computes ``(1/N) * sum ||est - g||^2 / sum ||g||^2`` with both sums over
    trials and subcarriers.
    """
    num = den = 0.0
    N = None
    for est, truth in trials:
        a, b = error_terms(est, truth)
        num += a
        den += b
        N = np.shape(truth)[0]
    if N is None:
        raise ValueError("need at least one trial")
    if den == 0:
        raise ZeroDivisionError("all channels are zero")
    return num / den / N


def empirical_nmse_mean_of_ratios(trials):
    """Mean over trials of the per-trial normalised error (alternative estimator)."""
    ratios = []
    for est, truth in trials:
        a, b = error_terms(est, truth)
        if b == 0:
            raise ZeroDivisionError("zero channel in a trial")
        ratios.append(a / b / np.shape(truth)[0])
    if not ratios:
        raise ValueError("need at least one trial")
    return float(np.mean(ratios))


def run_estimate(realization, pattern, params, grid, pilots, noise, rng, mode=PRACTICAL,
                 cond_threshold=DEFAULT_COND_THRESHOLD):
    """Simulate one training block through the practical IRS and estimate.

    The receiver solves against the expansion selected by ``mode``:
    ``"practical"`` matches the true response, ``"ideal"`` assumes unit
    amplitude and the carrier phase at every subcarrier.
    """
    truth = expand_pattern(pattern, params, grid, PRACTICAL)
    assumed = truth if mode == PRACTICAL else expand_pattern(pattern, params, grid, mode)
    received = simulate_reception(realization, truth, pilots, noise, rng)
    return estimate_channel(received, pilots, assumed, cond_threshold)


def run_mismatched_estimate(realization, pattern, params, grid, pilots, noise, rng,
                            cond_threshold=DEFAULT_COND_THRESHOLD):
    """Estimate assuming an ideal, frequency-flat IRS while the true IRS is practical."""
    return run_estimate(realization, pattern, params, grid, pilots, noise, rng, IDEAL, cond_threshold)
