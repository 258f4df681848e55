"""Pulsed-radar system model: parameters, LFM pulse, sparse scenes, Nyquist synthesis.

Time is measured in Nyquist intervals internally (tau0 = 1), so continuous
integrals become plain sums over samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSegmentLength, InvalidSlide, NonIntegralDimensions

_INT_RTOL = 1e-9


def _as_int(value: float, name: str) -> int:
    n = round(value)
    if n <= 0 or abs(value - n) > _INT_RTOL * max(1.0, abs(value)):
        raise NonIntegralDimensions(f"{name} = {value!r} is not a positive integer")
    return int(n)


@dataclass(frozen=True)
class RadarConfig:
    """Scalar system parameters plus the integer dimensions derived from them.

    Use :func:`make_config` (or :meth:`from_counts`) rather than calling the
    constructor directly; those validate integrality.
    """

    bandwidth_hz: float
    pulse_width_s: float
    receive_time_s: float
    downsample_ratio: int
    segment_pulses: int
    slide_pulses: int = 1
    chip_rate_hz: float | None = None
    # derived
    Np: int = field(init=False)
    Mp: int = field(init=False)
    P: int = field(init=False)

    def __post_init__(self):
        B, Tp, T = self.bandwidth_hz, self.pulse_width_s, self.receive_time_s
        R, S, W = self.downsample_ratio, self.segment_pulses, self.slide_pulses
        if min(B, Tp, T) <= 0:
            raise NonIntegralDimensions("B, Tp and T must be positive")
        if int(R) != R or R < 2:
            raise NonIntegralDimensions(f"downsample ratio R = {R!r} must be an integer > 1")
        Np = _as_int(Tp * B, "Tp*B")
        P = _as_int(T / Tp, "T/Tp")
        if Np % R:
            raise NonIntegralDimensions(f"Np = {Np} is not divisible by R = {R}")
        if int(S) != S or S < 2 or S >= P:
            raise InvalidSegmentLength(f"segment length S = {S} must satisfy 2 <= S < P = {P}")
        if int(W) != W or W < 1 or W >= S:
            raise InvalidSlide(f"slide W = {W} must satisfy 1 <= W < S = {S}")
        if self.chip_rate_hz is not None and not math.isclose(self.chip_rate_hz, B):
            raise NonIntegralDimensions("only a chip rate equal to the bandwidth is supported")
        object.__setattr__(self, "Np", Np)
        object.__setattr__(self, "Mp", Np // int(R))
        object.__setattr__(self, "P", P)

    @classmethod
    def from_counts(cls, Np, R, P, S, W=1, bandwidth_hz=1.0e8):
        """Build a config from sample counts instead of physical durations."""
        Tp = Np / bandwidth_hz
        return make_config(bandwidth_hz, Tp, P * Tp, R, S, W)

    @property
    def R(self) -> int:
        return int(self.downsample_ratio)

    @property
    def S(self) -> int:
        return int(self.segment_pulses)

    @property
    def W(self) -> int:
        return int(self.slide_pulses)

    @property
    def nyquist_interval_s(self) -> float:
        return 1.0 / self.bandwidth_hz

    @property
    def integration_time_s(self) -> float:
        return self.R / self.bandwidth_hz

    @property
    def N(self) -> int:
        return (self.P - 1) * self.Np

    @property
    def M(self) -> int:
        return self.P * self.Mp

    @property
    def L(self) -> int:
        return -(-(self.P - 1 - self.S) // self.W) + 1

    @property
    def seg_cols(self) -> int:
        return self.S * self.Np

    @property
    def seg_rows(self) -> int:
        return (self.S + 1) * self.Mp

    @property
    def n_nyquist(self) -> int:
        """Nyquist samples spanning the receive window [0, T)."""
        return self.P * self.Np

    def replace(self, **changes) -> "RadarConfig":
        kw = dict(
            bandwidth_hz=self.bandwidth_hz,
            pulse_width_s=self.pulse_width_s,
            receive_time_s=self.receive_time_s,
            downsample_ratio=self.downsample_ratio,
            segment_pulses=self.segment_pulses,
            slide_pulses=self.slide_pulses,
        )
        kw.update(changes)
        return make_config(
            kw["bandwidth_hz"], kw["pulse_width_s"], kw["receive_time_s"],
            kw["downsample_ratio"], kw["segment_pulses"], kw["slide_pulses"],
        )


def make_config(B, Tp, T, R, S, W=1) -> RadarConfig:
    """Validate the scalar parameters and return a :class:`RadarConfig`.

    Raises
    ------
    NonIntegralDimensions
        If Tp*B, T/Tp or Tp*B/R are not integers.
    InvalidSegmentLength
        If not 2 <= S < P.
    InvalidSlide
        If not 1 <= W < S.
    """
    return RadarConfig(float(B), float(Tp), float(T), int(R), int(S), int(W))


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray
    chirp_rate: float

    def __post_init__(self):
        self.samples.setflags(write=False)

    @property
    def energy(self) -> float:
        return float(self.samples @ self.samples)


def lfm_waveform(config: RadarConfig, chirp_rate: float | None = None) -> Waveform:
    """Sample ``cos(gamma*pi*(t - Tp/2)**2)`` on the left-endpoint Nyquist grid.

    ``chirp_rate`` defaults to B/Tp; passing 0 gives the constant test pulse.
    """
    gamma = config.bandwidth_hz / config.pulse_width_s if chirp_rate is None else float(chirp_rate)
    Np = config.Np
    # (j*tau0 - Tp/2)^2 = tau0^2 (j - Np/2)^2; for the default rate gamma*tau0^2 == 1/Np
    if chirp_rate is None:
        scale = 1.0 / Np
    else:
        scale = gamma * config.nyquist_interval_s ** 2
    j = np.arange(Np, dtype=float)
    samples = np.cos(np.pi * scale * (j - Np / 2.0) ** 2)
    return Waveform(samples, gamma)


def constant_waveform(config: RadarConfig) -> Waveform:
    return lfm_waveform(config, chirp_rate=0.0)


@dataclass(frozen=True)
class TargetScene:
    coefficients: np.ndarray
    bernoulli_p: float | None = None

    def __post_init__(self):
        self.coefficients.setflags(write=False)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.coefficients)

    @property
    def sparsity(self) -> int:
        return int(np.count_nonzero(self.coefficients))


def random_scene(config: RadarConfig, p: float, rng) -> TargetScene:
    """Bernoulli(p) support with Uniform(0, 1] amplitudes.

    ``rng`` may be a seed or a ``numpy.random.Generator``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p = {p} outside [0, 1]")
    rng = np.random.default_rng(rng)
    N = config.N
    mask = rng.random(N) < p
    amps = 1.0 - rng.random(N)  # (0, 1]
    sigma = np.where(mask, amps, 0.0)
    return TargetScene(sigma, p)


def scene_from_support(config: RadarConfig, support, amplitudes=1.0) -> TargetScene:
    sigma = np.zeros(config.N)
    idx = np.asarray(support, dtype=int)
    sigma[idx] = amplitudes
    return TargetScene(sigma)


def synthesize_nyquist(scene, waveform: Waveform, config: RadarConfig) -> np.ndarray:
    """Nyquist-rate echo ``x[k] = sum_n sigma[n] s[k - n]`` over P*Np samples."""
    sigma = scene.coefficients if isinstance(scene, TargetScene) else np.asarray(scene, float)
    if sigma.shape != (config.N,):
        raise ValueError(f"coefficient vector must have length N = {config.N}")
    x = np.zeros(config.n_nyquist)
    full = np.convolve(sigma, waveform.samples)
    x[: full.size] = full
    return x


@dataclass(frozen=True)
class NoiseSpec:
    """Band-limited white noise, given either by ``n0`` or by a target ISNR.

    ``n0`` is the one-sided level N0 (two-sided PSD N0/2); the per-Nyquist-sample
    variance is ``N0 * B / 2``.
    """

    n0: float | None = None
    isnr_db: float | None = None
    seed: object = None

    def __post_init__(self):
        if (self.n0 is None) == (self.isnr_db is None):
            raise ValueError("give exactly one of n0 or isnr_db")
        if self.n0 is not None and self.n0 < 0:
            raise ValueError("n0 must be non-negative")

    def variance(self, x: np.ndarray, config: RadarConfig) -> float:
        if self.n0 is not None:
            return self.n0 * config.bandwidth_hz / 2.0
        return signal_power(x) / 10.0 ** (self.isnr_db / 10.0)


def signal_power(x: np.ndarray) -> float:
    return float(np.mean(np.square(x)))


def isnr_db(x: np.ndarray, variance: float) -> float:
    """Input SNR: mean signal power over the receive window / noise power."""
    if variance == 0:
        return math.inf
    return 10.0 * math.log10(signal_power(x) / variance)


def add_noise(x: np.ndarray, noise: NoiseSpec, config: RadarConfig, rng=None) -> np.ndarray:
    """Return ``x + w`` with ``w`` i.i.d. N(0, N0*B/2) per Nyquist sample."""
    var = noise.variance(x, config)
    if var == 0:
        return np.array(x, dtype=float, copy=True)
    rng = np.random.default_rng(noise.seed if rng is None else rng)
    return x + rng.normal(0.0, math.sqrt(var), size=np.shape(x))
