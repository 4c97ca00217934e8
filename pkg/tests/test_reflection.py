import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irsofdm.exceptions import ModelValidityError
from irsofdm.reflection import (
    DEFAULT_PARAMS,
    IDEAL,
    CircuitParams,
    OfdmGrid,
    PatternMatrix,
    amplitude_response,
    build_codebook,
    expand_pattern,
    phase_response,
    random_circuit_params,
    subcarrier_frequency,
    validate_params,
)

from oracles import expand_by_loops


# --- subcarrier frequencies -------------------------------------------------

def test_first_and_last_subcarrier(paper_grid):
    assert subcarrier_frequency(paper_grid, 1) == pytest.approx(2.3015625e9, abs=1e-3)
    assert subcarrier_frequency(paper_grid, 64) == pytest.approx(2.4984375e9, abs=1e-3)


def test_frequencies_symmetric_about_carrier(paper_grid):
    f = paper_grid.frequencies
    assert f.shape == (64,)
    assert np.allclose(f + f[::-1], 2 * paper_grid.carrier_hz, rtol=0, atol=1e-3)
    assert np.allclose(np.diff(f), 0.2e9 / 64)


def test_subcarrier_index_out_of_range(paper_grid):
    with pytest.raises(IndexError):
        subcarrier_frequency(paper_grid, 0)
    with pytest.raises(IndexError):
        subcarrier_frequency(paper_grid, 65)


def test_grid_rejects_short_cyclic_prefix():
    with pytest.raises(ValueError):
        OfdmGrid(16, 0.2e9, 2.4e9, tap_count=8, cp_length=4)
    with pytest.raises(ValueError):
        OfdmGrid(0, 0.2e9, 2.4e9)
    with pytest.raises(ValueError):
        OfdmGrid(4, 0.2e9, 2.4e9, tap_count=8, cp_length=8)


# --- amplitude and phase ----------------------------------------------------

def test_amplitude_at_resonance():
    # D1(pi/2) = 0.05 + 3.4 GHz; loss term (0.35 + 0.2) / 4
    phi = np.pi / 2
    amp = amplitude_response(DEFAULT_PARAMS, phi, 3.45e9)
    assert amp == pytest.approx(1 - 0.55 / 4, abs=1e-12)


def test_amplitude_far_from_resonance_tends_to_one():
    assert amplitude_response(DEFAULT_PARAMS, 1.0, 1e14) == pytest.approx(1.0, abs=1e-6)


def test_lossless_coefficients_give_unit_amplitude(desk_grid):
    p = CircuitParams(alpha=(0.0, 0.05, 0.5, 0.0, 0.0, 3.4, -0.5 * np.pi))
    phi = build_codebook(3).values[:, None]
    assert np.all(amplitude_response(p, phi, desk_grid.frequencies[None, :]) == 1.0)


def test_amplitude_out_of_range_raises():
    p = CircuitParams(alpha=(0.0, 0.0, 0.5, 0.0, -0.5, 3.4, 0.0))  # A = 1.125 at resonance
    with pytest.raises(ModelValidityError):
        amplitude_response(p, 0.0, 3.4e9)
    p = CircuitParams(alpha=(0.0, 0.0, 0.5, 0.0, 5.0, 3.4, 0.0))  # A < 0 at resonance
    with pytest.raises(ModelValidityError):
        amplitude_response(p, 0.0, 3.4e9)


def test_phase_zero_at_resonance():
    assert phase_response(DEFAULT_PARAMS, np.pi / 2, 3.45e9) == pytest.approx(0.0, abs=1e-12)


def test_phase_example_value():
    # phi = pi/2: D1 = 3.45, D2 = pi/4 - pi/2, detune = 2.4 - 3.45
    w = phase_response(DEFAULT_PARAMS, np.pi / 2, 2.4e9)
    assert w == pytest.approx(-2 * np.arctan(np.pi / 4 * 1.05), abs=1e-12)


def test_phase_approaches_minus_pi_far_above_resonance():
    # D2(3 pi / 2) = pi / 4 > 0
    w = phase_response(DEFAULT_PARAMS, 1.5 * np.pi, 1e15)
    assert -np.pi < w < -np.pi + 1e-5


def test_response_broadcasts(desk_grid):
    phi = build_codebook(2).values
    out = amplitude_response(DEFAULT_PARAMS, phi[:, None], desk_grid.frequencies[None, :])
    assert out.shape == (4, 16)
    assert phase_response(DEFAULT_PARAMS, phi[:, None], desk_grid.frequencies[None, :]).shape == (4, 16)


@settings(max_examples=200, deadline=None)
@given(phi=st.floats(0, 2 * np.pi, exclude_max=True), n=st.integers(1, 64), seed=st.integers(0, 2**32 - 1))
def test_response_ranges_for_valid_coefficients(phi, n, seed):
    grid = OfdmGrid(64, 0.2e9, 2.4e9, 8, 16)
    p = random_circuit_params(np.random.default_rng(seed), grid)
    f = subcarrier_frequency(grid, n)
    a = amplitude_response(p, phi, f)
    w = phase_response(p, phi, f)
    assert 0 < a <= 1
    assert -np.pi < w < np.pi


def test_default_params_valid(desk_grid, paper_grid):
    validate_params(DEFAULT_PARAMS, desk_grid)
    validate_params(DEFAULT_PARAMS, paper_grid)


def test_default_amplitude_range(paper_grid):
    phi = build_codebook(6).values[:, None]
    a = amplitude_response(DEFAULT_PARAMS, phi, paper_grid.frequencies[None, :])
    assert 0.55 < a.min() < a.max() < 0.96


def test_validate_rejects_lossy_amplitude(desk_grid):
    bad = CircuitParams(alpha=(0.0, 0.05, 0.5, 2.0, 0.2, 3.4, -0.5 * np.pi))
    with pytest.raises(ModelValidityError):
        validate_params(bad, desk_grid)


def test_validate_rejects_gain(desk_grid):
    bad = CircuitParams(alpha=(0.0, 0.05, 0.5, 0.2, -0.1, 3.4, -0.5 * np.pi))
    with pytest.raises(ModelValidityError):
        validate_params(bad, desk_grid)


def test_params_need_seven_finite_values():
    with pytest.raises(ModelValidityError):
        CircuitParams(alpha=(0.0,) * 6)
    with pytest.raises(ModelValidityError):
        CircuitParams(alpha=(0.0,) * 6 + (np.nan,))


def test_params_from_file(tmp_path):
    path = tmp_path / "alpha.json"
    path.write_text(json.dumps(list(DEFAULT_PARAMS.alpha)))
    assert CircuitParams.from_file(path).alpha == DEFAULT_PARAMS.alpha
    path.write_text(json.dumps({"response_model": DEFAULT_PARAMS.to_dict()}))
    loaded = CircuitParams.from_file(path)
    assert loaded == DEFAULT_PARAMS


def test_random_params_are_valid(desk_grid):
    rng = np.random.default_rng(3)
    for _ in range(20):
        validate_params(random_circuit_params(rng, desk_grid), desk_grid)


# --- codebooks --------------------------------------------------------------

@pytest.mark.parametrize(
    "bits, expected",
    [
        (1, [0, np.pi]),
        (2, [0, np.pi / 2, np.pi, 3 * np.pi / 2]),
        (3, [k * np.pi / 4 for k in range(8)]),
    ],
)
def test_codebook_values(bits, expected):
    cb = build_codebook(bits)
    assert cb.size == 2**bits
    assert np.allclose(cb.values, expected, rtol=0, atol=1e-15)


def test_codebooks_nest_exactly():
    for b in range(1, 8):
        coarse = build_codebook(b).values
        fine = build_codebook(b + 1).values
        assert np.array_equal(coarse, fine[::2])


@settings(max_examples=100, deadline=None)
@given(bits=st.integers(1, 8), i=st.integers(0, 255), j=st.integers(0, 255))
def test_codebook_closed_under_addition_mod_2pi(bits, i, j):
    cb = build_codebook(bits)
    i, j = i % cb.size, j % cb.size
    s = np.mod(cb.values[i] + cb.values[j], 2 * np.pi)
    assert cb.index_of(s if s < 2 * np.pi - 1e-12 else 0.0) == (i + j) % cb.size


def test_codebook_membership_and_quantize():
    cb = build_codebook(2)
    assert cb.index_of(np.pi) == 2
    assert not cb.contains(0.3)
    with pytest.raises(ValueError):
        cb.index_of(0.3)
    assert list(cb.quantize([0.1, 1.5, 3.0, 6.2, np.pi / 4])) == [0, 1, 2, 0, 0]


def test_build_codebook_rejects_zero_bits():
    with pytest.raises(ValueError):
        build_codebook(0)


# --- patterns ---------------------------------------------------------------

def test_pattern_json_round_trip(tmp_path):
    p = PatternMatrix(np.array([[0, 1, 2], [3, 2, 1]]), bits=2)
    path = tmp_path / "p.json"
    p.save(path, meta={"algorithm": "test"})
    q = PatternMatrix.load(path)
    assert q == p
    d = json.loads(path.read_text())
    assert (d["m"], d["k"], d["bits"]) == (2, 3, 2)


def test_pattern_rejects_off_codebook_phase():
    with pytest.raises(ValueError):
        PatternMatrix.from_phases([[0.0, 0.5]], bits=1)
    with pytest.raises(ValueError):
        PatternMatrix(np.array([[0, 4]]), bits=2)


def test_pattern_at_finer_bits_keeps_phases():
    p = PatternMatrix(np.array([[0, 1], [1, 0]]), bits=1)
    q = p.at_bits(3)
    assert np.array_equal(q.phases, p.phases)
    assert q.bits == 3


# --- expansion --------------------------------------------------------------

def test_expand_matches_loop_oracle(desk_grid):
    rng = np.random.default_rng(1)
    p = PatternMatrix(rng.integers(0, 8, size=(4, 5)), bits=3)
    fast = expand_pattern(p, DEFAULT_PARAMS, desk_grid).matrices
    slow = expand_by_loops(p.phases, DEFAULT_PARAMS, desk_grid.frequencies)
    assert np.allclose(fast, slow, rtol=0, atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), bits=st.integers(1, 4))
def test_expand_entries_follow_scalar_response(seed, bits):
    grid = OfdmGrid(8, 0.2e9, 2.4e9, 1, 1)
    rng = np.random.default_rng(seed)
    params = random_circuit_params(rng, grid)
    p = PatternMatrix(rng.integers(0, 2**bits, size=(3, 4)), bits=bits)
    mats = expand_pattern(p, params, grid).matrices
    f = grid.frequencies
    assert np.all(mats[:, 0, :] == 1)
    amp = amplitude_response(params, p.phases[None], f[:, None, None])
    ph = phase_response(params, p.phases[None], f[:, None, None])
    assert np.allclose(np.abs(mats[:, 1:, :]), amp, rtol=0, atol=1e-12)
    assert np.allclose(np.angle(mats[:, 1:, :]), ph, rtol=0, atol=1e-12)


def test_zero_bandwidth_gives_identical_matrices():
    grid = OfdmGrid(8, 0.0, 2.4e9, 1, 1)
    p = PatternMatrix(np.array([[0, 1], [1, 0]]), bits=1)
    mats = expand_pattern(p, DEFAULT_PARAMS, grid).matrices
    assert np.all(mats == mats[0])


def test_ideal_mode_is_pure_phase(desk_grid):
    p = PatternMatrix(np.array([[0, 1, 2, 3]]), bits=2)
    mats = expand_pattern(p, DEFAULT_PARAMS, desk_grid, IDEAL).matrices
    assert np.allclose(mats[:, 1, :], np.exp(1j * p.phases[0]))


def test_single_element_two_slot_example(small_grid):
    p = PatternMatrix(np.array([[0, 1]]), bits=1)
    mats = expand_pattern(p, DEFAULT_PARAMS, small_grid).matrices
    assert mats.shape == (4, 2, 2)
    for n, f in enumerate(small_grid.frequencies):
        for k, phi in enumerate([0.0, np.pi]):
            want = amplitude_response(DEFAULT_PARAMS, phi, f) * np.exp(1j * phase_response(DEFAULT_PARAMS, phi, f))
            assert mats[n, 1, k] == pytest.approx(want, abs=1e-14)


def test_single_subcarrier_sits_at_carrier():
    grid = OfdmGrid(1, 0.2e9, 2.4e9, 1, 1)
    assert grid.frequencies[0] == 2.4e9
    p = PatternMatrix(np.array([[1, 0]]), bits=1)
    mats = expand_pattern(p, DEFAULT_PARAMS, grid).matrices
    want = amplitude_response(DEFAULT_PARAMS, np.pi, 2.4e9) * np.exp(1j * phase_response(DEFAULT_PARAMS, np.pi, 2.4e9))
    assert mats[0, 1, 0] == pytest.approx(want, abs=1e-15)
