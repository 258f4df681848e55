"""Overlapping segment windows, boundary matrices and virtual measurements.

Segment ``l`` (1-based) covers pulse blocks ``c .. c+S-1`` of the coefficient
vector and measurement rows ``[c*Mp, (c+S+1)*Mp)``. Every column in the window
keeps its complete band, unlike a non-overlapping split of ``y``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, MissingPreviousEstimate
from .radar import RadarConfig


def segment_starts(config: RadarConfig) -> list[int]:
    """Starting pulse block of every segment; the last one is clamped to end at N."""
    last = config.P - 1 - config.S
    starts = [min(i * config.W, last) for i in range(config.L)]
    return starts


@dataclass(frozen=True)
class SegmentView:
    index: int
    start_block: int
    slide_blocks: int  # blocks slid out since the previous segment (0 for l = 1)
    coeff_start: int
    coeff_stop: int
    meas_start: int
    meas_stop: int
    sub_matrix: np.ndarray
    boundary_prev: np.ndarray  # rows x (slide_blocks*Np)
    boundary_next: np.ndarray  # rows x Np, or rows x 0 when the window ends at N
    y: np.ndarray
    Np: int
    Mp: int
    S: int

    def __post_init__(self):
        for arr in (self.sub_matrix, self.boundary_prev, self.boundary_next, self.y):
            arr.setflags(write=False)

    @property
    def coeff_range(self):
        return self.coeff_start, self.coeff_stop

    @property
    def meas_range(self):
        return self.meas_start, self.meas_stop

    @property
    def prev_range(self):
        return self.coeff_start - self.boundary_prev.shape[1], self.coeff_start

    @property
    def next_range(self):
        return self.coeff_stop, self.coeff_stop + self.boundary_next.shape[1]

    @property
    def is_first(self) -> bool:
        return self.slide_blocks == 0

    @property
    def is_last(self) -> bool:
        return self.boundary_next.shape[1] == 0

    def block(self, s: int) -> slice:
        """Column slice of the s-th pulse block (1-based) in window coordinates."""
        if not 1 <= s <= self.S:
            raise IndexOutOfRange(f"block {s} outside 1..{self.S}")
        return slice((s - 1) * self.Np, s * self.Np)


def segment_view(A, y, config: RadarConfig, l: int) -> SegmentView:
    """Extract the l-th (1-based) window of ``A`` and ``y`` with its boundary matrices."""
    A = getattr(A, "A", A)
    y = getattr(y, "y", y)
    if A.shape != (config.M, config.N):
        raise DimensionMismatch(f"A has shape {A.shape}, expected {(config.M, config.N)}")
    if y is not None and np.shape(y) != (config.M,):
        raise DimensionMismatch(f"y must have length M = {config.M}")
    L = config.L
    if not 1 <= l <= L:
        raise IndexOutOfRange(f"segment {l} outside 1..{L}")
    starts = segment_starts(config)
    c = starts[l - 1]
    slide = 0 if l == 1 else c - starts[l - 2]
    Np, Mp, S = config.Np, config.Mp, config.S
    n0, n1 = c * Np, (c + S) * Np
    m0, m1 = c * Mp, (c + S + 1) * Mp
    rows = slice(m0, m1)
    sub = np.array(A[rows, n0:n1])
    prev = np.array(A[rows, n0 - slide * Np : n0])
    nxt_stop = min(n1 + Np, config.N)
    nxt = np.array(A[rows, n1:nxt_stop])
    y_seg = np.zeros(m1 - m0) if y is None else np.array(y[rows], dtype=float)
    return SegmentView(l, c, slide, n0, n1, m0, m1, sub, prev, nxt, y_seg, Np, Mp, S)


def segment_views(A, y, config: RadarConfig) -> list[SegmentView]:
    return [segment_view(A, y, config, l) for l in range(1, config.L + 1)]


def _parts(view: SegmentView, sigma):
    sigma = np.asarray(sigma, dtype=float)
    p0, p1 = view.prev_range
    q0, q1 = view.next_range
    return sigma[p0:p1], sigma[view.coeff_start : view.coeff_stop], sigma[q0:q1]


def decompose_check(view: SegmentView, sigma) -> float:
    """Norm of ``y_seg - (B_prev s_prev + A_seg s_seg + B_next s_next)``.

    Zero (to rounding) whenever the view was cut from noiseless ``y = A sigma``.
    """
    s_prev, s_seg, s_next = _parts(view, sigma)
    model = view.sub_matrix @ s_seg
    if s_prev.size:
        model = model + view.boundary_prev @ s_prev
    if s_next.size:
        model = model + view.boundary_next @ s_next
    return float(np.linalg.norm(view.y - model))


@dataclass(frozen=True)
class VirtualMeasurement:
    y_virt: np.ndarray
    subtracted_support: np.ndarray


def virtual_measurement(view: SegmentView, prev_first_block=None) -> VirtualMeasurement:
    """Subtract the previous segment's estimated slid-out block from the window."""
    if view.is_first:
        return VirtualMeasurement(np.array(view.y), np.array([], dtype=int))
    if prev_first_block is None:
        raise MissingPreviousEstimate(f"segment {view.index} needs the previous estimate")
    est = np.asarray(prev_first_block, dtype=float)
    if est.shape != (view.boundary_prev.shape[1],):
        raise DimensionMismatch(
            f"previous block has length {est.size}, expected {view.boundary_prev.shape[1]}"
        )
    support = np.flatnonzero(est)
    y_virt = view.y - view.boundary_prev[:, support] @ est[support]
    return VirtualMeasurement(y_virt, support + view.prev_range[0])


@dataclass(frozen=True)
class VirtualNoise:
    n_virt: np.ndarray
    forward_part: np.ndarray
    backward_part: np.ndarray


def oracle_virtual_noise(view: SegmentView, sigma, prev_first_block=None) -> VirtualNoise:
    """Forward (previous-block error) and backward (next-block leakage) interference."""
    s_prev, _, s_next = _parts(view, sigma)
    rows = view.sub_matrix.shape[0]
    forward = np.zeros(rows)
    if not view.is_first:
        if prev_first_block is None:
            raise MissingPreviousEstimate(f"segment {view.index} needs the previous estimate")
        forward = view.boundary_prev @ (s_prev - np.asarray(prev_first_block, float))
    backward = view.boundary_next @ s_next if s_next.size else np.zeros(rows)
    return VirtualNoise(forward + backward, forward, backward)
