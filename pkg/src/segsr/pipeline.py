"""Segment-by-segment reconstruction of the full coefficient vector."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import SegSRError
from .radar import RadarConfig
from .segment import SegmentView, segment_starts, segment_view, virtual_measurement
from .solvers import SolverParams, SparseEstimate, known_support_from, omp, omp_pks, tompp

log = logging.getLogger(__name__)

SEGMENT_SOLVERS = ("omp-pks", "tompp")


@dataclass
class SegmentRecord:
    index: int
    coeff_range: tuple
    output_range: tuple
    n_atoms: int
    iterations: int
    residual_norm: float
    stop_reason: str
    seconds: float
    error: str | None = None


@dataclass
class PipelineResult:
    estimate: np.ndarray
    solver: str
    segment_estimates: list = field(default_factory=list)
    forwarded: list = field(default_factory=list)
    segments: list = field(default_factory=list)

    @property
    def seconds(self) -> float:
        return float(sum(s.seconds for s in self.segments))

    @property
    def failed_segments(self):
        return [s.index for s in self.segments if s.error is not None]


def _solve_segment(solver, view: SegmentView, y_virt, prev_estimate, config, params):
    if solver == "tompp":
        return tompp(view.sub_matrix, y_virt, prev_estimate, config, params, slide=view.slide_blocks)
    if solver == "omp-pks":
        known = known_support_from(prev_estimate, view.slide_blocks * view.Np)
        return omp_pks(view.sub_matrix, y_virt, known, params)
    raise ValueError(f"unknown segment solver {solver!r}; expected one of {SEGMENT_SOLVERS}")


class _Sweep:
    """State carried from one segment to the next."""

    def __init__(self, config: RadarConfig, solver: str, params: SolverParams | None):
        if solver not in SEGMENT_SOLVERS:
            raise ValueError(f"unknown segment solver {solver!r}; expected one of {SEGMENT_SOLVERS}")
        self.config = config
        self.solver = solver
        self.params = params or SolverParams()
        self.starts = segment_starts(config)
        self.prev_estimate = None
        self.prev_first = None
        self.result = PipelineResult(np.zeros(config.N), solver)

    def output_range(self, l):
        Np, L = self.config.Np, self.config.L
        lo = self.starts[l - 1] * Np
        hi = self.config.N if l == L else self.starts[l] * Np
        return lo, hi

    def step(self, view: SegmentView):
        l = view.index
        cfg = self.config
        t0 = time.perf_counter()
        error = None
        try:
            vm = virtual_measurement(view, self.prev_first)
            est = _solve_segment(self.solver, view, vm.y_virt, self.prev_estimate, cfg, self.params)
            x = est.x
        except SegSRError as exc:
            log.warning("segment %d failed: %s", l, exc)
            error = f"{type(exc).__name__}: {exc}"
            n_cols = view.sub_matrix.shape[1]
            est = SparseEstimate(np.zeros(0, int), np.zeros(0), n_cols, float("nan"), [float("nan")], "failed")
            x = np.zeros(n_cols)
        seconds = time.perf_counter() - t0
        lo, hi = self.output_range(l)
        self.result.estimate[lo:hi] = x[: hi - lo]
        self.result.segment_estimates.append(x)
        nxt = cfg.Np * (self.starts[l] - self.starts[l - 1]) if l < cfg.L else 0
        self.prev_first = x[:nxt] if l < cfg.L else None
        self.prev_estimate = x
        self.result.forwarded.append(self.prev_first)
        self.result.segments.append(
            SegmentRecord(
                l, view.coeff_range, (lo, hi), int(est.support.size), est.iterations,
                float(est.residual_norm), est.stop_reason, seconds, error,
            )
        )
        return lo, x[: hi - lo]


def segsr_run(A, y, config: RadarConfig, solver: str = "tompp", params: SolverParams | None = None) -> PipelineResult:
    """Reconstruct the whole coefficient vector one overlapping window at a time.

    A segment whose solver raises is recorded with an empty estimate and the
    sweep carries on.
    """
    sweep = _Sweep(config, solver, params)
    for l in range(1, config.L + 1):
        sweep.step(segment_view(A, y, config, l))
    return sweep.result


class SegSRStream:
    """Incremental variant of :func:`segsr_run` fed with measurement chunks.

    ``push`` returns the ``(start_index, values)`` blocks finalised by the new
    data; the numerics are identical to the batch sweep.
    """

    def __init__(self, A, config: RadarConfig, solver: str = "tompp", params: SolverParams | None = None):
        self.A = getattr(A, "A", A)
        self.config = config
        self._sweep = _Sweep(config, solver, params)
        self._y = np.zeros(config.M)
        self._have = 0
        self._next = 1

    @property
    def result(self) -> PipelineResult:
        return self._sweep.result

    @property
    def done(self) -> bool:
        return self._next > self.config.L

    def push(self, chunk):
        chunk = np.asarray(chunk, dtype=float).ravel()
        if self._have + chunk.size > self.config.M:
            raise ValueError("more measurements than the receive window holds")
        self._y[self._have : self._have + chunk.size] = chunk
        self._have += chunk.size
        out = []
        cfg = self.config
        while not self.done:
            c = self._sweep.starts[self._next - 1]
            if (c + cfg.S + 1) * cfg.Mp > self._have:
                break
            view = segment_view(self.A, self._y, cfg, self._next)
            out.append(self._sweep.step(view))
            self._next += 1
        return out


def full_omp_baseline(A, y, params: SolverParams | None = None) -> PipelineResult:
    """One global OMP solve over the whole measurement matrix."""
    A = getattr(A, "A", A)
    y = getattr(y, "y", y)
    t0 = time.perf_counter()
    est = omp(A, y, params)
    seconds = time.perf_counter() - t0
    x = est.x
    N = A.shape[1]
    rec = SegmentRecord(1, (0, N), (0, N), int(est.support.size), est.iterations,
                        float(est.residual_norm), est.stop_reason, seconds)
    return PipelineResult(x, "omp", [x], [None], [rec])
