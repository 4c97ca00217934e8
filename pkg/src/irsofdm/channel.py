"""Quasi-static frequency-selective Rayleigh channels for the IRS link.

Three scalar links are modelled per IRS element: AP-IRS, IRS-user and the
direct AP-user link. Each is an L-tap impulse response with i.i.d.
circularly-symmetric Gaussian taps whose total power follows a power-law
path loss; frequency responses are zero-padded N-point DFTs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

AP_IRS = "ap_irs"
IRS_USER = "irs_user"
AP_USER = "ap_user"
LINKS = (AP_IRS, IRS_USER, AP_USER)

PROFILES = ("uniform", "exponential")


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


@dataclass(frozen=True)
class LinkGeometry:
    """Distances (m), path-loss exponents and the 1 m reference gain (dB)."""

    dist_ap_irs_m: float = 50.0
    dist_irs_user_m: float = 2.0
    dist_ap_user_m: float = 50.0
    ple_ap_irs: float = 2.2
    ple_irs_user: float = 2.4
    ple_ap_user: float = 3.5
    ref_gain_db: float = -30.0

    def __post_init__(self):
        for name in ("dist_ap_irs_m", "dist_irs_user_m", "dist_ap_user_m"):
            if not getattr(self, name) >= 1.0:
                raise ValueError(f"{name} must be at least 1 m, got {getattr(self, name)}")
        for name in ("ple_ap_irs", "ple_irs_user", "ple_ap_user"):
            if not 1.5 <= getattr(self, name) <= 6.0:
                raise ValueError(f"{name} must lie in [1.5, 6], got {getattr(self, name)}")
        if not np.isfinite(self.ref_gain_db):
            raise ValueError("ref_gain_db must be finite")

    def link(self, link):
        """(distance, exponent) of ``link``."""
        if link == AP_IRS:
            return self.dist_ap_irs_m, self.ple_ap_irs
        if link == IRS_USER:
            return self.dist_irs_user_m, self.ple_irs_user
        if link == AP_USER:
            return self.dist_ap_user_m, self.ple_ap_user
        raise ValueError(f"unknown link {link!r}, expected one of {LINKS}")

    def to_dict(self):
        return {k: float(v) for k, v in self.__dict__.items()}


def path_gain(geometry, link):
    """Linear average power gain of one link: ``ref_gain * d**(-exponent)``."""
    d, ple = geometry.link(link)
    return float(db_to_linear(geometry.ref_gain_db) * d ** (-ple))


def power_delay_profile(L, profile="uniform", decay=1.0):
    """Per-tap power fractions summing to one.

    ``"exponential"`` weights tap ``l`` by ``exp(-l / decay)``.
    """
    if L < 1:
        raise ValueError("need at least one tap")
    if profile == "uniform":
        w = np.ones(L)
    elif profile == "exponential":
        w = np.exp(-np.arange(L) / decay)
    else:
        raise ValueError(f"unknown power delay profile {profile!r}")
    return w / w.sum()


def sample_taps(rng, L, total_gain, size=(), profile="uniform", decay=1.0):
    """Draw Rayleigh taps; trailing axis has length ``L``.

    Tap ``l`` is CN(0, total_gain * pdp[l]); with the default uniform
    profile every tap has variance ``total_gain / L``.
    """
    if total_gain < 0:
        raise ValueError("total_gain must be nonnegative")
    shape = tuple(np.atleast_1d(size)) + (L,) if size != () else (L,)
    scale = np.sqrt(total_gain * power_delay_profile(L, profile, decay) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def taps_to_cfr(taps, N):
    """Frequency response ``sum_l taps[l] exp(-2j pi n l / N)``, n = 0..N-1, on the last axis."""
    taps = np.asarray(taps)
    if taps.shape[-1] > N:
        raise ValueError(f"{taps.shape[-1]} taps do not fit in an {N}-point DFT")
    return np.fft.fft(taps, n=N, axis=-1)


@dataclass
class ChannelRealization:
    """Frequency responses of one channel draw.

    ``h_d`` has shape (N,), ``H_a``, ``H_u`` and ``G`` shape (M, N). The
    received training sample is modelled as ``conj(g_hat[n]) @ psi`` with
    ``g_hat[n] = [h_d[n], G[:, n]]``.
    """

    h_d: np.ndarray
    H_a: np.ndarray
    H_u: np.ndarray

    @property
    def G(self):
        return self.H_u * self.H_a

    @property
    def g_hat(self):
        """Stacked per-subcarrier channel, shape (N, M+1)."""
        return np.concatenate([self.h_d[:, None], self.G.T], axis=1)

    @property
    def m_elements(self):
        return self.H_a.shape[0]

    @property
    def n_subcarriers(self):
        return self.h_d.shape[0]

    def energy(self):
        """sum_n ||g_hat[n]||^2."""
        return float(np.sum(np.abs(self.g_hat) ** 2))

    def to_dict(self):
        def c(a):
            return {"re": np.real(a).tolist(), "im": np.imag(a).tolist()}

        return {"h_d": c(self.h_d), "H_a": c(self.H_a), "H_u": c(self.H_u)}

    @classmethod
    def from_dict(cls, d):
        def c(x):
            return np.asarray(x["re"]) + 1j * np.asarray(x["im"])

        return cls(h_d=c(d["h_d"]), H_a=c(d["H_a"]), H_u=c(d["H_u"]))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def realize_channels(rng, geometry, grid, M, profile="uniform", decay=1.0):
    """Draw the 2M + 1 independent links and return their frequency responses."""
    L, N = grid.tap_count, grid.n_subcarriers
    a = sample_taps(rng, L, path_gain(geometry, AP_IRS), size=M, profile=profile, decay=decay)
    u = sample_taps(rng, L, path_gain(geometry, IRS_USER), size=M, profile=profile, decay=decay)
    d = sample_taps(rng, L, path_gain(geometry, AP_USER), profile=profile, decay=decay)
    return ChannelRealization(h_d=taps_to_cfr(d, N), H_a=taps_to_cfr(a, N), H_u=taps_to_cfr(u, N))


def mean_channel_energy(geometry, grid, M):
    """Analytic ``sum_n E||g_hat[n]||^2 = N (g_direct + M g_ap_irs g_irs_user)``."""
    cascade = path_gain(geometry, AP_IRS) * path_gain(geometry, IRS_USER)
    return grid.n_subcarriers * (path_gain(geometry, AP_USER) + M * cascade)
