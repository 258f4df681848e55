import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from segsr import (
    RadarConfig,
    RankDeficientSupport,
    SegSRStream,
    SolverParams,
    build_measurement_matrix,
    full_omp_baseline,
    lfm_waveform,
    make_chipping,
    segsr_run,
)
from segsr import pipeline as pipeline_mod
from segsr.analysis import relative_error

from .conftest import instance


@given(Mp=st.integers(1, 4), R=st.integers(2, 4), P=st.integers(4, 10), data=st.data())
def test_output_ranges_cover_once(Mp, R, P, data):
    S = data.draw(st.integers(2, P - 1))
    W = data.draw(st.integers(1, S - 1)) if S > 2 else 1
    cfg = RadarConfig.from_counts(Mp * R, R, P, S, W)
    A, sigma, y, _ = instance(cfg, 0.1, 0)
    res = segsr_run(A, y, cfg)
    hits = np.zeros(cfg.N, int)
    for seg in res.segments:
        lo, hi = seg.output_range
        hits[lo:hi] += 1
    assert np.all(hits == 1)
    for seg, x in zip(res.segments, res.segment_estimates):
        lo, hi = seg.output_range
        assert np.array_equal(res.estimate[lo:hi], x[: hi - lo])


def test_toy_output_ranges(toy_config):
    A, sigma, y, _ = instance(toy_config)
    res = segsr_run(A, y, toy_config)
    assert [s.output_range for s in res.segments] == [(0, 9), (9, 18), (18, 45)]


@pytest.mark.parametrize("solver", ["tompp", "omp-pks"])
def test_zero_scene(desk_config, solver):
    A, _, _, _ = instance(desk_config)
    res = segsr_run(A, np.zeros(desk_config.M), desk_config, solver)
    assert np.all(res.estimate == 0)
    assert all(s.iterations <= 1 for s in res.segments)


def test_single_target_at_origin(desk_config):
    A, _, _, _ = instance(desk_config)
    sigma = np.zeros(desk_config.N)
    sigma[0] = 0.6
    y = A @ sigma
    res = segsr_run(A, y, desk_config, "tompp")
    assert np.flatnonzero(res.estimate).tolist() == [0]
    assert abs(res.estimate[0] - 0.6) <= 1e-6
    base = full_omp_baseline(A, y, SolverParams(residual_tol=1e-9 * np.linalg.norm(y)))
    assert np.flatnonzero(base.estimate).tolist() == [0]


def test_baseline_exact_and_empty(desk_config):
    A, sigma, y, _ = instance(desk_config, 0.01, 3)
    res = full_omp_baseline(A, y, SolverParams(residual_tol=1e-9 * np.linalg.norm(y)))
    assert relative_error(sigma, res.estimate) <= 1e-8
    assert np.all(full_omp_baseline(A, np.zeros(desk_config.M)).estimate == 0)


@pytest.mark.parametrize("W", [1, 2])
@pytest.mark.parametrize("chunk", [1, 7, 20, 200])
def test_stream_matches_batch(desk_config, W, chunk):
    cfg = desk_config.replace(slide_pulses=W)
    A, sigma, y, _ = instance(cfg, 0.02, 9)
    batch = segsr_run(A, y, cfg)
    stream = SegSRStream(A, cfg)
    blocks = []
    for i in range(0, cfg.M, chunk):
        blocks.extend(stream.push(y[i : i + chunk]))
    assert stream.done
    assert np.array_equal(stream.result.estimate, batch.estimate)
    out = np.zeros(cfg.N)
    for start, vals in blocks:
        out[start : start + vals.size] = vals
    assert np.array_equal(out, batch.estimate)


def test_stream_rejects_overflow(toy_config):
    A, _, y, _ = instance(toy_config)
    s = SegSRStream(A, toy_config)
    with pytest.raises(ValueError):
        s.push(np.zeros(toy_config.M + 1))


@pytest.mark.parametrize("solver", ["tompp", "omp-pks"])
def test_causality(desk_config, solver):
    A, sigma, y, _ = instance(desk_config, 0.02, 4)
    full = segsr_run(A, y, desk_config, solver)
    for l in range(1, desk_config.L):
        cut = np.array(y)
        stop = (l - 1 + desk_config.S + 1) * desk_config.Mp
        cut[stop:] = 0.0
        part = segsr_run(A, cut, desk_config, solver)
        for k in range(l):
            assert np.array_equal(part.segment_estimates[k], full.segment_estimates[k])


def test_failed_segment_is_contained(desk_config, monkeypatch):
    A, sigma, y, _ = instance(desk_config, 0.02, 1)
    real = pipeline_mod._solve_segment

    def flaky(solver, view, *args):
        if view.index == 3:
            raise RankDeficientSupport("forced")
        return real(solver, view, *args)

    monkeypatch.setattr(pipeline_mod, "_solve_segment", flaky)
    res = segsr_run(A, y, desk_config)
    assert res.failed_segments == [3]
    assert len(res.segments) == desk_config.L
    assert "forced" in res.segments[2].error
    lo, hi = res.segments[2].output_range
    assert np.all(res.estimate[lo:hi] == 0)


def test_unknown_solver(toy_config):
    A, _, y, _ = instance(toy_config)
    with pytest.raises(ValueError):
        segsr_run(A, y, toy_config, "omp")


@pytest.mark.xfail(strict=True, reason="error floor from forwarded interference; see notes/decisions.md")
def test_single_target_per_pulse_median_error(desk_config):
    ers = []
    for t in range(40):
        rng = np.random.default_rng(t)
        A = build_measurement_matrix(desk_config, lfm_waveform(desk_config), make_chipping(desk_config, rng)).A
        sigma = np.zeros(desk_config.N)
        for b in range(desk_config.P - 1):
            sigma[b * desk_config.Np + rng.integers(desk_config.Np)] = 1.0 - rng.random()
        ers.append(relative_error(sigma, segsr_run(A, A @ sigma, desk_config).estimate))
    assert np.median(ers) <= 1e-3
