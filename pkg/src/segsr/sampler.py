"""Random-demodulator front end: chipping, integrate-and-dump, banded matrix.

Binary dump layout (all little-endian, 8 bytes per field)::

    offset  0   magic      b"SEGSRAY1"
    offset  8   float64    bandwidth_hz
    offset 16   float64    pulse_width_s
    offset 24   float64    receive_time_s
    offset 32   int64      R
    offset 40   int64      S
    offset 48   int64      W
    offset 56   int64      M (rows)
    offset 64   int64      N (columns)
    offset 72   int64      1 if y follows A, else 0
    offset 80   float64[M*N]  A, row-major
    ...         float64[M]    y (optional)
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch
from .radar import RadarConfig, Waveform, make_config

MAGIC = b"SEGSRAY1"
_HEADER = struct.Struct("<8s3d6q")


@dataclass(frozen=True)
class ChippingSequence:
    chips: np.ndarray
    seed: object = None

    def __post_init__(self):
        self.chips.setflags(write=False)


def make_chipping(config: RadarConfig, seed=None, length: int | None = None) -> ChippingSequence:
    """Rademacher +/-1 chips, one per Nyquist interval."""
    n = config.n_nyquist if length is None else int(length)
    rng = np.random.default_rng(seed)
    chips = 2.0 * rng.integers(0, 2, size=n) - 1.0
    return ChippingSequence(chips, seed)


@dataclass(frozen=True)
class MeasurementMatrix:
    """Dense ``M x N`` matrix with the per-column row band (0-based, inclusive)."""

    A: np.ndarray
    first_row: np.ndarray
    last_row: np.ndarray
    config: RadarConfig

    def __post_init__(self):
        for arr in (self.A, self.first_row, self.last_row):
            arr.setflags(write=False)

    @property
    def shape(self):
        return self.A.shape

    def column_band(self, n: int) -> np.ndarray:
        return self.A[self.first_row[n] : self.last_row[n] + 1, n]


def band_bounds(config: RadarConfig, n):
    """First and last row (0-based, inclusive) a column can touch.

    A column is zero in 1-based rows m <= floor(n/R) and m >= ceil((Np + n)/R) + 1.
    """
    n = np.asarray(n)
    R = config.R
    return n // R, -(-(config.Np + n) // R) - 1


def build_measurement_matrix(
    config: RadarConfig,
    waveform: Waveform,
    chipping: ChippingSequence,
    normalize: bool = False,
) -> MeasurementMatrix:
    """``A[m, n] = sum_{k=mR}^{(m+1)R-1} chips[k] * s[k - n]``."""
    chips = chipping.chips
    if chips.size < config.n_nyquist:
        raise DimensionMismatch(
            f"need at least {config.n_nyquist} chips, got {chips.size}"
        )
    s = waveform.samples
    if s.size != config.Np:
        raise DimensionMismatch(f"waveform has {s.size} samples, expected Np = {config.Np}")
    M, N, R = config.M, config.N, config.R
    A = np.zeros((M, N))
    cols = np.arange(N)
    for j, sj in enumerate(s):
        k = cols + j
        # (row, col) pairs are distinct for fixed j, so fancy += is safe
        A[k // R, cols] += chips[k] * sj
    if normalize:
        norms = np.linalg.norm(A, axis=0)
        A /= np.where(norms > 0, norms, 1.0)
    first, last = band_bounds(config, cols)
    return MeasurementMatrix(A, first.astype(np.int64), last.astype(np.int64), config)


@dataclass(frozen=True)
class Measurements:
    y: np.ndarray
    n0: float = 0.0
    isnr_db: float | None = None
    seed: object = None

    def __post_init__(self):
        self.y.setflags(write=False)


def rd_sample(nyquist_signal, chipping: ChippingSequence, config: RadarConfig, **meta) -> Measurements:
    """Integrate-and-dump of the chipped signal: ``y[m] = sum_k chips[k] x[k]`` over row m."""
    x = np.asarray(nyquist_signal, dtype=float)
    n = config.M * config.R
    if x.size < n:
        raise DimensionMismatch(f"signal has {x.size} samples, need {n}")
    if chipping.chips.size < n:
        raise DimensionMismatch(f"need at least {n} chips, got {chipping.chips.size}")
    y = (chipping.chips[:n] * x[:n]).reshape(config.M, config.R).sum(axis=1)
    return Measurements(y, **meta)


def dump_matrix(path, matrix: MeasurementMatrix, y=None) -> None:
    cfg = matrix.config
    M, N = matrix.shape
    header = _HEADER.pack(
        MAGIC, cfg.bandwidth_hz, cfg.pulse_width_s, cfg.receive_time_s,
        cfg.R, cfg.S, cfg.W, M, N, int(y is not None),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(matrix.A, dtype="<f8").tobytes())
        if y is not None:
            y = np.asarray(y, dtype="<f8")
            if y.shape != (M,):
                raise DimensionMismatch(f"y must have length M = {M}")
            fh.write(y.tobytes())


def load_matrix(path):
    """Inverse of :func:`dump_matrix`; returns ``(MeasurementMatrix, y or None)``."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise DimensionMismatch("file too short for header")
    magic, B, Tp, T, R, S, W, M, N, has_y = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DimensionMismatch(f"bad magic {magic!r}")
    cfg = make_config(B, Tp, T, R, S, W)
    if (M, N) != (cfg.M, cfg.N):
        raise DimensionMismatch(f"header shape {(M, N)} disagrees with config {(cfg.M, cfg.N)}")
    expected = _HEADER.size + 8 * (M * N + (M if has_y else 0))
    if len(data) != expected:
        raise DimensionMismatch(f"expected {expected} bytes, found {len(data)}")
    A = np.frombuffer(data, dtype="<f8", count=M * N, offset=_HEADER.size).reshape(M, N).copy()
    y = None
    if has_y:
        y = np.frombuffer(data, dtype="<f8", count=M, offset=_HEADER.size + 8 * M * N).copy()
    first, last = band_bounds(cfg, np.arange(N))
    return MeasurementMatrix(A, first.astype(np.int64), last.astype(np.int64), cfg), y
