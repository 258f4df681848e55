import math

import numpy as np
import pytest

from segsr.analysis import rip_bruteforce
from segsr.checks import (
    SmallInstance,
    incoherent_dictionary,
    paley_hadamard_12,
    recovery_suite,
    theorem1_suite,
    theorem4_suite,
)


def test_hadamard():
    H = paley_hadamard_12()
    assert np.array_equal(H @ H.T, 12 * np.eye(12, dtype=int))


def test_incoherent_dictionary_rip():
    A = incoherent_dictionary(np.random.default_rng(0))
    assert A.shape == (12, 20)
    assert np.allclose(np.linalg.norm(A, axis=0), 1.0)
    assert rip_bruteforce(A, 3).delta < 1 / (math.sqrt(2) + 1)


def test_small_instance_geometry():
    cfg = SmallInstance().config()
    assert cfg.seg_cols <= 24


def test_theorem1_suite_quick():
    r = theorem1_suite(20, seed=1)
    assert r.ok and r.checks == 60


def test_theorem4_suite_quick():
    r = theorem4_suite(20, seed=1)
    assert r.ok and r.checks > 0
    assert r.notes["alpha_beta_checks"] > 0


@pytest.mark.parametrize("theorem", [2, 3])
def test_recovery_inside_bound(theorem):
    r = recovery_suite(theorem, trials=20, seed=2, noise_fraction=0.5)
    assert r.ok and r.skipped == 0


def test_correlation_stop_at_full_noise_level():
    """At the full correlation level the first K picks stay exact; the stopping
    rule may keep extra atoms, never lose a true one."""
    r = recovery_suite(3, trials=50, seed=0, noise_fraction=1.0)
    assert r.notes["first_k_exact"] == r.checks
    assert r.notes["superset_failures"] == r.violations


def test_recovery_suite_validation():
    with pytest.raises(ValueError):
        recovery_suite(4)
    with pytest.raises(ValueError):
        recovery_suite(2, noise_fraction=0.0)
