import numpy as np
import pytest

from irsofdm.channel import (
    AP_IRS,
    AP_USER,
    IRS_USER,
    ChannelRealization,
    LinkGeometry,
    dbm_to_watt,
    mean_channel_energy,
    path_gain,
    power_delay_profile,
    realize_channels,
    sample_taps,
    taps_to_cfr,
)

from oracles import dft_by_sum


def test_dbm_to_watt():
    assert dbm_to_watt(30) == pytest.approx(1.0)
    assert dbm_to_watt(-80) == pytest.approx(1e-11)
    assert dbm_to_watt(20) == pytest.approx(0.1)


def test_path_gain_examples():
    g = LinkGeometry(dist_ap_irs_m=10.0, ple_ap_irs=2.0, dist_irs_user_m=1.0, ref_gain_db=-30.0)
    assert path_gain(g, AP_IRS) == pytest.approx(1e-5, rel=1e-12)
    assert path_gain(g, IRS_USER) == pytest.approx(1e-3, rel=1e-12)
    assert path_gain(LinkGeometry(), AP_USER) == pytest.approx(1e-3 * 50.0**-3.5, rel=1e-12)


def test_geometry_validation():
    with pytest.raises(ValueError):
        LinkGeometry(dist_ap_irs_m=0.5)
    with pytest.raises(ValueError):
        LinkGeometry(ple_ap_user=7.0)
    with pytest.raises(ValueError):
        path_gain(LinkGeometry(), "nowhere")


def test_power_delay_profiles_sum_to_one():
    assert np.allclose(power_delay_profile(8), 1 / 8)
    w = power_delay_profile(4, "exponential", decay=2.0)
    assert w.sum() == pytest.approx(1.0)
    assert np.all(np.diff(w) < 0)
    with pytest.raises(ValueError):
        power_delay_profile(4, "flat")


def test_zero_gain_gives_zero_taps(rng):
    assert np.all(sample_taps(rng, 8, 0.0, size=5) == 0)


def test_taps_deterministic_for_seed():
    a = sample_taps(np.random.default_rng(9), 8, 1.0, size=3)
    b = sample_taps(np.random.default_rng(9), 8, 1.0, size=3)
    assert np.array_equal(a, b)
    assert a.shape == (3, 8)


def test_tap_variance_matches_gain(rng):
    taps = sample_taps(rng, 8, 2.0, size=100_000)
    per_tap = np.mean(np.abs(taps) ** 2, axis=0)
    assert np.allclose(per_tap, 2.0 / 8, rtol=0.02)
    # circular symmetry: real and imaginary parts carry equal power, no pseudo-covariance
    assert np.mean(taps.real**2) == pytest.approx(np.mean(taps.imag**2), rel=0.02)
    assert abs(np.mean(taps**2)) < 0.01


def test_cfr_of_delta_is_flat():
    assert np.allclose(taps_to_cfr(np.array([1.0]), 8), np.ones(8))


def test_cfr_of_unit_delay():
    assert np.allclose(taps_to_cfr(np.array([0, 1.0]), 4), [1, -1j, -1, 1j], atol=1e-15)


def test_cfr_matches_direct_sum(rng):
    taps = sample_taps(rng, 8, 1.0)
    assert np.allclose(taps_to_cfr(taps, 16), dft_by_sum(taps, 16), rtol=0, atol=1e-13)


def test_parseval(rng):
    taps = sample_taps(rng, 8, 1.0, size=50)
    H = taps_to_cfr(taps, 64)
    lhs = np.sum(np.abs(H) ** 2, axis=-1)
    rhs = 64 * np.sum(np.abs(taps) ** 2, axis=-1)
    assert np.max(np.abs(lhs - rhs) / rhs) < 1e-12


def test_too_many_taps_rejected():
    with pytest.raises(ValueError):
        taps_to_cfr(np.ones(9), 8)


def test_cascade_is_elementwise_product(desk_grid, geometry, rng):
    ch = realize_channels(rng, geometry, desk_grid, 8)
    assert ch.G.shape == (8, 16)
    assert np.array_equal(ch.G, ch.H_u * ch.H_a)
    assert ch.g_hat.shape == (16, 9)
    assert np.array_equal(ch.g_hat[:, 0], ch.h_d)
    assert np.array_equal(ch.g_hat[:, 1:], ch.G.T)


def test_realization_deterministic(desk_grid, geometry):
    a = realize_channels(np.random.default_rng(5), geometry, desk_grid, 4)
    b = realize_channels(np.random.default_rng(5), geometry, desk_grid, 4)
    assert np.array_equal(a.g_hat, b.g_hat)


def test_elements_independent(paper_grid, geometry):
    rng = np.random.default_rng(11)
    xs = np.array([realize_channels(rng, geometry, paper_grid, 2).H_a[:, 0] for _ in range(4000)])
    xs /= np.sqrt(path_gain(geometry, AP_IRS))
    corr = np.mean(xs[:, 0] * np.conj(xs[:, 1]))
    assert abs(corr) < 0.06


def test_realization_json_round_trip(tmp_path, small_grid, geometry, rng):
    ch = realize_channels(rng, geometry, small_grid, 3)
    path = tmp_path / "ch.json"
    ch.save(path)
    back = ChannelRealization.load(path)
    assert np.array_equal(back.g_hat, ch.g_hat)


def test_mean_energy_analytic_matches_samples(desk_grid, geometry):
    rng = np.random.default_rng(21)
    e = np.mean([realize_channels(rng, geometry, desk_grid, 8).energy() for _ in range(4000)])
    assert e == pytest.approx(mean_channel_energy(geometry, desk_grid, 8), rel=0.05)
