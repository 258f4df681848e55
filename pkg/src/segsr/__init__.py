"""Segment-sliding sparse reconstruction of random-demodulator radar echoes."""
from .errors import *  # noqa: F401,F403
from .pipeline import PipelineResult, SegSRStream, SegmentRecord, full_omp_baseline, segsr_run
from .radar import (
    NoiseSpec,
    RadarConfig,
    TargetScene,
    Waveform,
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
from .sampler import (
    ChippingSequence,
    MeasurementMatrix,
    Measurements,
    band_bounds,
    build_measurement_matrix,
    dump_matrix,
    load_matrix,
    make_chipping,
    rd_sample,
)
from .segment import (
    SegmentView,
    VirtualMeasurement,
    VirtualNoise,
    decompose_check,
    oracle_virtual_noise,
    segment_starts,
    segment_view,
    segment_views,
    virtual_measurement,
)
from .solvers import SolverParams, SparseEstimate, known_support_from, least_squares_on_support, omp, omp_pks, tompp

__version__ = "0.1.0"
