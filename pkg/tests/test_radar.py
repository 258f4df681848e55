import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from segsr import (
    InvalidSegmentLength,
    InvalidSlide,
    NoiseSpec,
    NonIntegralDimensions,
    RadarConfig,
    add_noise,
    constant_waveform,
    isnr_db,
    lfm_waveform,
    make_config,
    random_scene,
    scene_from_support,
    signal_power,
    synthesize_nyquist,
)


def test_toy_dimensions(toy_config):
    c = toy_config
    assert (c.Np, c.Mp, c.P, c.N, c.M, c.L) == (9, 3, 6, 45, 18, 3)


def test_full_scale_dimensions():
    c = make_config(1e8, 1e-5, 1e-4, 5, 3, 1)
    assert (c.Np, c.Mp, c.P, c.N, c.M, c.L) == (1000, 200, 10, 9000, 2000, 7)


def test_desk_dimensions(desk_config):
    c = desk_config
    assert (c.Np, c.Mp, c.P, c.N, c.M, c.L) == (100, 20, 10, 900, 200, 7)


def test_segment_as_long_as_window_rejected():
    with pytest.raises(InvalidSegmentLength):
        make_config(1e7, 1e-6, 5e-6, 2, 5, 1)


def test_slide_not_below_segment_rejected():
    with pytest.raises(InvalidSlide):
        make_config(1e7, 0.9e-6, 5.4e-6, 3, 3, 3)


@pytest.mark.parametrize("args", [
    (1e7, 0.95e-6, 5.4e-6, 3),  # Tp*B not integral
    (1e7, 0.9e-6, 5.0e-6, 3),  # T/Tp not integral
    (1e7, 0.9e-6, 5.4e-6, 4),  # Np not divisible by R
])
def test_non_integral_rejected(args):
    with pytest.raises(NonIntegralDimensions):
        make_config(*args, 3, 1)


@given(Mp=st.integers(1, 8), R=st.integers(2, 5), P=st.integers(3, 12), data=st.data())
def test_dimension_identities(Mp, R, P, data):
    S = data.draw(st.integers(2, P - 1))
    W = data.draw(st.integers(1, S - 1)) if S > 2 else 1
    c = RadarConfig.from_counts(Mp * R, R, P, S, W)
    assert c.N == (P - 1) * c.Np
    assert c.M == P * c.Mp
    assert c.Np == R * c.Mp
    assert c.L == math.ceil((P - 1 - S) / W) + 1
    if W == 1:
        assert c.L == P - S


def test_lfm_center_and_start():
    c = make_config(1e8, 1e-5, 1e-4, 5, 3)
    s = lfm_waveform(c).samples
    assert s[c.Np // 2] == pytest.approx(1.0)
    # t = 0: cos(pi * 250) = 1
    assert s[0] == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.abs(s) <= 1.0)


def test_constant_waveform(toy_config):
    assert np.all(constant_waveform(toy_config).samples == 1.0)


def test_scene_extremes(desk_config):
    assert random_scene(desk_config, 0.0, 1).sparsity == 0
    assert random_scene(desk_config, 1.0, 1).sparsity == desk_config.N
    amps = random_scene(desk_config, 1.0, 2).coefficients
    assert np.all((amps > 0) & (amps <= 1))


def test_scene_sparsity_statistics():
    c = make_config(1e8, 1e-5, 1e-4, 5, 3)
    rng = np.random.default_rng(7)
    counts = [random_scene(c, 0.01, rng).sparsity for _ in range(500)]
    sd = math.sqrt(c.N * 0.01 * 0.99)
    # the mean of 500 draws has standard deviation sd / sqrt(500)
    assert abs(np.mean(counts) - 90) <= 3 * sd / math.sqrt(500)


def test_synth_single_spike(toy_config):
    wf = lfm_waveform(toy_config)
    x = synthesize_nyquist(scene_from_support(toy_config, [0]), wf, toy_config)
    assert np.array_equal(x[: toy_config.Np], wf.samples)
    assert np.all(x[toy_config.Np:] == 0)
    assert np.all(synthesize_nyquist(np.zeros(toy_config.N), wf, toy_config) == 0)


def test_synth_abutting_pulses(toy_config):
    wf = lfm_waveform(toy_config)
    Np = toy_config.Np
    x = synthesize_nyquist(scene_from_support(toy_config, [0, Np]), wf, toy_config)
    assert x[Np - 1] == wf.samples[Np - 1]
    assert x[Np] == wf.samples[0]


@given(seed=st.integers(0, 2**32 - 1), a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_synth_linear(seed, a, b):
    c = RadarConfig.from_counts(9, 3, 6, 3)
    wf = lfm_waveform(c)
    rng = np.random.default_rng(seed)
    s1, s2 = rng.standard_normal(c.N), rng.standard_normal(c.N)
    lhs = synthesize_nyquist(a * s1 + b * s2, wf, c)
    rhs = a * synthesize_nyquist(s1, wf, c) + b * synthesize_nyquist(s2, wf, c)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(1.0, np.linalg.norm(rhs))


@given(n=st.integers(0, 44))
def test_echo_contained(n):
    c = RadarConfig.from_counts(9, 3, 6, 3)
    x = synthesize_nyquist(scene_from_support(c, [n]), constant_waveform(c), c)
    nz = np.flatnonzero(x)
    assert nz[0] == n and nz[-1] == n + c.Np - 1 < c.P * c.Np


def test_zero_noise_is_identity(toy_config):
    x = np.arange(toy_config.n_nyquist, dtype=float)
    out = add_noise(x, NoiseSpec(n0=0.0), toy_config, 1)
    assert np.array_equal(out, x)


def test_noise_variance():
    c = make_config(1e8, 1e-6, 1e-5, 5, 3)
    x = np.zeros(100_000)
    w = add_noise(x, NoiseSpec(n0=2.0 / c.bandwidth_hz), c, np.random.default_rng(3))
    assert 0.97 <= w.var() <= 1.03


def test_isnr_target(desk_config):
    rng = np.random.default_rng(0)
    x = rng.standard_normal(desk_config.n_nyquist)
    spec = NoiseSpec(isnr_db=10.0)
    assert spec.variance(x, desk_config) == pytest.approx(np.mean(x**2) / 10)
    assert isnr_db(x, spec.variance(x, desk_config)) == pytest.approx(10.0)
    assert signal_power(x) == pytest.approx(np.mean(x**2))


def test_noise_spec_requires_one_field():
    with pytest.raises(ValueError):
        NoiseSpec()
    with pytest.raises(ValueError):
        NoiseSpec(n0=1.0, isnr_db=3.0)
