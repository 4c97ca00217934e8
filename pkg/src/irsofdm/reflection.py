"""Frequency-dependent reflection response of an IRS element.

An element is configured by the phase shift it applies at the carrier
frequency. Away from the carrier its amplitude and phase drift according to
a resonant-circuit response curve parameterised by seven coefficients
``alpha[0] .. alpha[6]``:

    D1(p) = a1 tan(p / 3) + a2 sin(p) + a6
    D2(p) = a3 p + a7
    A(p, f) = 1 - (a4 p + a5) / ((0.05 (f/1e9 - D1(p)))**2 + 4)
    W(p, f) = -2 arctan(D2(p) (f/1e9 - D1(p)))

Frequencies are always given in Hz at the public interface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ModelValidityError

TWO_PI = 2.0 * np.pi

# Resolution of the phase grid used when validating a coefficient set.
# Every codebook with bits <= this value is a subset of the grid.
_VALIDATION_BITS = 12

PRACTICAL = "practical"
IDEAL = "ideal"
MODES = (PRACTICAL, IDEAL)


@dataclass(frozen=True)
class CircuitParams:
    """Seven response-curve coefficients of one reflecting element.

    ``alpha[0]`` multiplies ``tan(p / 3)``, which has a pole at ``p = 3 pi / 2``
    (a 2-bit codebook value). In floating point ``tan`` stays finite there
    (about 1.6e16), so a nonzero first entry pushes the resonance to infinity
    for that phase: the element becomes lossless with phase close to +-pi.
    The named defaults keep this coefficient at zero.
    """

    alpha: tuple
    name: str = "custom"

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        if len(alpha) != 7:
            raise ModelValidityError(f"expected 7 coefficients, got {len(alpha)}")
        if not all(np.isfinite(alpha)):
            raise ModelValidityError(f"non-finite coefficient in {alpha}")
        object.__setattr__(self, "alpha", alpha)

    def to_dict(self):
        return {"name": self.name, "alpha": list(self.alpha)}

    @classmethod
    def from_dict(cls, d):
        return cls(alpha=tuple(d["alpha"]), name=d.get("name", "custom"))

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            d = json.load(fh)
        if isinstance(d, list):
            return cls(alpha=tuple(d), name=Path(path).stem)
        if "response_model" in d:
            d = d["response_model"]
        return cls.from_dict(d)


# Named default coefficient set. Resonance sits 1 GHz above the 2.4 GHz
# carrier, so the phase slope is moderate over a 200 MHz band; the
# phase-dependent loss spans amplitudes of roughly 0.6 to 0.95.
DEFAULT_PARAMS = CircuitParams(
    alpha=(0.0, 0.05, 0.5, 1.4 / TWO_PI, 0.2, 3.4, -0.5 * np.pi),
    name="default-2g4",
)


@dataclass(frozen=True)
class OfdmGrid:
    """Subcarrier layout of one OFDM symbol."""

    n_subcarriers: int
    bandwidth_hz: float
    carrier_hz: float
    tap_count: int = 1
    cp_length: int = 1

    def __post_init__(self):
        if int(self.n_subcarriers) != self.n_subcarriers or self.n_subcarriers < 1:
            raise ValueError(f"n_subcarriers must be a positive integer, got {self.n_subcarriers}")
        if not self.bandwidth_hz >= 0:
            raise ValueError(f"bandwidth_hz must be nonnegative, got {self.bandwidth_hz}")
        if not self.carrier_hz > 0:
            raise ValueError(f"carrier_hz must be positive, got {self.carrier_hz}")
        if self.tap_count < 1 or self.cp_length < 1:
            raise ValueError("tap_count and cp_length must be positive")
        if self.cp_length < self.tap_count:
            raise ValueError(
                f"cyclic prefix ({self.cp_length}) shorter than the channel ({self.tap_count} taps)"
            )
        if self.tap_count > self.n_subcarriers:
            raise ValueError("tap_count cannot exceed n_subcarriers")

    @property
    def frequencies(self):
        """Centre frequency of every subcarrier in Hz, shape ``(N,)``."""
        n = np.arange(1, self.n_subcarriers + 1)
        return self.carrier_hz + (n - (self.n_subcarriers + 1) / 2) * self.bandwidth_hz / self.n_subcarriers

    @property
    def band(self):
        f = self.frequencies
        return float(f[0]), float(f[-1])

    def to_dict(self):
        return {
            "n_subcarriers": int(self.n_subcarriers),
            "bandwidth_hz": float(self.bandwidth_hz),
            "carrier_hz": float(self.carrier_hz),
            "tap_count": int(self.tap_count),
            "cp_length": int(self.cp_length),
        }


def subcarrier_frequency(grid, n):
    """Frequency in Hz of subcarrier ``n`` (1-based)."""
    N = grid.n_subcarriers
    if not 1 <= n <= N:
        raise IndexError(f"subcarrier index {n} outside 1..{N}")
    return grid.carrier_hz + (n - (N + 1) / 2) * grid.bandwidth_hz / N


def resonance_offset(params, phi_c):
    """D1, the phase-dependent resonance frequency in GHz."""
    a = params.alpha
    phi_c = np.asarray(phi_c, dtype=float)
    return a[0] * np.tan(phi_c / 3) + a[1] * np.sin(phi_c) + a[5]


def phase_slope(params, phi_c):
    """D2, the phase-dependent slope of the phase curve."""
    a = params.alpha
    return a[2] * np.asarray(phi_c, dtype=float) + a[6]


def _amplitude(params, phi_c, f):
    a = params.alpha
    detune = np.asarray(f, dtype=float) / 1e9 - resonance_offset(params, phi_c)
    return 1.0 - (a[3] * np.asarray(phi_c, dtype=float) + a[4]) / ((0.05 * detune) ** 2 + 4.0)


def amplitude_response(params, phi_c, f):
    """Reflection amplitude at carrier phase ``phi_c`` (rad) and frequency ``f`` (Hz).

    Broadcasts over array inputs. Raises :class:`ModelValidityError` if any
    value falls outside (0, 1].
    """
    amp = _amplitude(params, phi_c, f)
    if np.any(~(amp > 0)) or np.any(amp > 1):
        raise ModelValidityError(
            f"amplitude outside (0, 1] for coefficient set {params.name!r}: "
            f"range [{np.min(amp):.6g}, {np.max(amp):.6g}]"
        )
    return amp


def phase_response(params, phi_c, f):
    """Reflection phase in (-pi, pi) at carrier phase ``phi_c`` and frequency ``f`` (Hz)."""
    detune = np.asarray(f, dtype=float) / 1e9 - resonance_offset(params, phi_c)
    return -2.0 * np.arctan(phase_slope(params, phi_c) * detune)


def validate_params(params, grid):
    """Check a coefficient set over a dense phase grid and the whole band.

    The phase grid contains every codebook value up to 12 bits. Raises
    :class:`ModelValidityError` on failure.
    """
    phi = build_codebook(_VALIDATION_BITS).values[:, None]
    lo, hi = grid.band
    f = np.linspace(lo, hi, max(grid.n_subcarriers, 64))[None, :]
    with np.errstate(all="ignore"):
        amplitude_response(params, phi, f)
        w = phase_response(params, phi, f)
    if np.any(~np.isfinite(w)) or np.any(np.abs(w) >= np.pi):
        raise ModelValidityError(
            f"phase response of {params.name!r} reaches +/-pi (singular resonance) inside the band"
        )


@dataclass(frozen=True)
class PhaseCodebook:
    """Uniform ``bits``-bit phase codebook ``{0, dw, ..., (2**bits - 1) dw}``."""

    bits: int
    values: np.ndarray = field(repr=False, compare=False)

    @property
    def size(self):
        return 2**self.bits

    @property
    def step(self):
        return TWO_PI / 2**self.bits

    def index_of(self, value, atol=1e-9):
        """Codebook index of ``value``; raises ``ValueError`` if it is not a member."""
        idx = np.rint(np.asarray(value, dtype=float) / self.step).astype(int)
        if np.any(np.abs(np.asarray(value) - idx * self.step) > atol) or np.any(idx < 0) or np.any(idx >= self.size):
            raise ValueError(f"{value} is not a member of the {self.bits}-bit codebook")
        return idx

    def contains(self, value, atol=1e-9):
        try:
            self.index_of(value, atol)
        except ValueError:
            return False
        return True

    def quantize(self, phases, offset=0.0):
        """Nearest codebook index of each phase (circular distance).

        ``offset`` shifts the phases before rounding. Exact ties round to the
        lower index.
        """
        x = np.mod(np.asarray(phases, dtype=float) + offset, TWO_PI) / self.step
        return np.mod(np.ceil(x - 0.5).astype(int), self.size)


def build_codebook(bits):
    if int(bits) != bits or bits < 1:
        raise ValueError(f"bits must be a positive integer, got {bits}")
    bits = int(bits)
    return PhaseCodebook(bits=bits, values=np.arange(2**bits) * (TWO_PI / 2**bits))


class PatternMatrix:
    """Carrier-frequency phases of an M x K training reflection pattern.

    Stores codebook indices; the all-ones first row of each training matrix
    is implicit.
    """

    def __init__(self, indices, bits):
        self.codebook = build_codebook(bits)
        indices = np.array(indices, dtype=int)
        if indices.ndim != 2:
            raise ValueError(f"pattern must be 2-D, got shape {indices.shape}")
        if np.any(indices < 0) or np.any(indices >= self.codebook.size):
            raise ValueError("pattern index outside the codebook")
        self.indices = indices

    @classmethod
    def from_phases(cls, phases, bits):
        codebook = build_codebook(bits)
        return cls(codebook.index_of(np.asarray(phases, dtype=float)), bits)

    @property
    def bits(self):
        return self.codebook.bits

    @property
    def phases(self):
        return self.codebook.values[self.indices]

    @property
    def m_elements(self):
        return self.indices.shape[0]

    @property
    def k_slots(self):
        return self.indices.shape[1]

    @property
    def shape(self):
        return self.indices.shape

    def copy(self):
        return PatternMatrix(self.indices.copy(), self.bits)

    def at_bits(self, bits):
        """Same phases expressed in a finer codebook."""
        if bits < self.bits:
            raise ValueError("can only re-express a pattern in a finer codebook")
        return PatternMatrix(self.indices * 2 ** (bits - self.bits), bits)

    def __eq__(self, other):
        if not isinstance(other, PatternMatrix):
            return NotImplemented
        return self.bits == other.bits and np.array_equal(self.indices, other.indices)

    def __repr__(self):
        return f"PatternMatrix(m={self.m_elements}, k={self.k_slots}, bits={self.bits})"

    def to_dict(self):
        return {
            "m": self.m_elements,
            "k": self.k_slots,
            "bits": self.bits,
            "phases": self.phases.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        phases = np.asarray(d["phases"], dtype=float)
        if phases.shape != (d["m"], d["k"]):
            raise ValueError(f"phases shape {phases.shape} disagrees with m={d['m']}, k={d['k']}")
        return cls.from_phases(phases, d["bits"])

    def save(self, path, **extra):
        with open(path, "w") as fh:
            json.dump({**self.to_dict(), **extra}, fh, indent=2)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class ExpandedPattern:
    """Per-subcarrier training matrices, ``matrices[n]`` of shape (M+1, K)."""

    matrices: np.ndarray

    def __post_init__(self):
        if self.matrices.ndim != 3:
            raise ValueError("expected an (N, M+1, K) array")

    @property
    def n_subcarriers(self):
        return self.matrices.shape[0]

    @property
    def m_elements(self):
        return self.matrices.shape[1] - 1

    @property
    def k_slots(self):
        return self.matrices.shape[2]

    def __len__(self):
        return self.matrices.shape[0]

    def __getitem__(self, n):
        return self.matrices[n]


def response_table(params, phases, frequencies, mode=PRACTICAL):
    """Complex reflection coefficient for every (phase, frequency) pair.

    Returns shape ``phases.shape + frequencies.shape`` style broadcast of
    ``phases[..., None]`` against ``frequencies``.
    """
    phases = np.asarray(phases, dtype=float)[..., None]
    frequencies = np.asarray(frequencies, dtype=float)
    if mode == IDEAL:
        return np.broadcast_to(np.exp(1j * phases), phases.shape[:-1] + frequencies.shape).copy()
    if mode != PRACTICAL:
        raise ValueError(f"unknown response mode {mode!r}")
    return amplitude_response(params, phases, frequencies) * np.exp(1j * phase_response(params, phases, frequencies))


def expand_pattern(pattern, params, grid, mode=PRACTICAL):
    """Expand carrier-frequency phases into the per-subcarrier training matrices.

    In ``"ideal"`` mode every element has unit amplitude and applies its
    carrier phase unchanged at every subcarrier.
    """
    freqs = grid.frequencies
    coeff = response_table(params, pattern.phases, freqs, mode)  # (M, K, N)
    M, K = pattern.shape
    out = np.ones((grid.n_subcarriers, M + 1, K), dtype=complex)
    out[:, 1:, :] = np.moveaxis(coeff, -1, 0)
    return ExpandedPattern(out)


def random_circuit_params(rng, grid, name=None, max_tries=100):
    """Draw a valid coefficient set scattered around :data:`DEFAULT_PARAMS`.

    The resonance is placed 0.5 to 1.5 GHz above the carrier and the
    ``tan`` coefficient is held at zero (see :class:`CircuitParams`).
    """
    fc = grid.carrier_hz / 1e9
    for _ in range(max_tries):
        a3 = rng.uniform(0.3, 0.8)
        alpha = (
            0.0,
            rng.uniform(0.0, 0.1),
            a3,
            rng.uniform(0.05, 0.3),
            rng.uniform(0.05, 0.3),
            fc + rng.uniform(0.5, 1.5),
            -a3 * np.pi * rng.uniform(0.8, 1.2),
        )
        params = CircuitParams(alpha=alpha, name=name or "random")
        try:
            validate_params(params, grid)
        except ModelValidityError:
            continue
        return params
    raise ModelValidityError(f"no valid coefficient set after {max_tries} draws")
